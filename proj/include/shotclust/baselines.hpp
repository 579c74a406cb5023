#pragma once

#include "shotclust/basis.hpp"
#include "shotclust/court.hpp"

#include <cstdint>
#include <vector>

namespace shotclust {

/// Fraction of object pairs on which two partitions agree (together in both
/// or apart in both).
double rand_index(const std::vector<int>& labels_a, const std::vector<int>& labels_b);

struct KmeansResult {
    std::vector<int> labels;
    Mat centers;
    double objective = 0.0;                 // within-cluster sum of squares
    std::vector<double> objective_trace;    // per Lloyd iteration of the best run
};

/// Lloyd's algorithm with k-means++ seeding, best of `restarts` runs by the
/// within-cluster sum of squares.
KmeansResult kmeans(const Mat& features, int k, int restarts, std::uint64_t seed);

struct MeanShiftOptions {
    double bandwidth = 0.0; // <= 0: Silverman's rule per dimension
    double step_tol = 1e-6;
    int max_iter = 500;
};

/// Gaussian-kernel mean shift: iterate every point to its mode, then merge
/// modes within bandwidth/2. Deterministic in the input.
std::vector<int> mean_shift(const Mat& features, const MeanShiftOptions& opts = {});

/// Silverman's rule-of-thumb bandwidth for one coordinate of a d-dimensional
/// sample.
double silverman_bandwidth(const Vec& column, int d = 1);

enum class FeatureKind {
    zip_mle,     // per-player (beta_hat, rho_hat) from fit_zip_mle
    nmf_weights, // nonnegative least-squares projection onto the basis rows
};

struct FeatureMatrix {
    Mat F;
    FeatureKind kind = FeatureKind::zip_mle;
    std::vector<bool> degenerate; // per-player flag from the MLE path
};

/// Per-player feature vectors for the baseline clusterers. The nmf_weights
/// kind needs the basis matrix B (K x J); zip_mle needs only the design.
FeatureMatrix build_features(const CountMatrix& counts, const DesignMatrix& X, FeatureKind kind,
                             const Mat* basis = nullptr);

/// Nonnegative least squares min_w ||y - B^T w||^2, w >= 0, by coordinate
/// descent.
Vec nnls(const Mat& BT, const Vec& y, int max_iter = 500, double tol = 1e-10);

} // namespace shotclust
