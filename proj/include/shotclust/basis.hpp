#pragma once

#include "shotclust/common.hpp"
#include "shotclust/court.hpp"
#include "shotclust/rng.hpp"

#include <vector>

namespace shotclust {

/// Per-player KDE intensity values on the grid (N historical players x J).
struct IntensityMatrix {
    Mat Lambda;

    int N() const { return static_cast<int>(Lambda.rows()); }
    int J() const { return static_cast<int>(Lambda.cols()); }
};

/// Gaussian product-kernel density of one player's shots, evaluated at block
/// centroids and rescaled so the block-area-weighted row sum equals the
/// number of records. Entries are floored at a tiny positive value before
/// rescaling, so the row is strictly positive even far from any shot.
Vec kde_grid(const std::vector<ShotRecord>& records, const CourtGrid& grid, double bandwidth);

struct NmfFactors {
    Mat W; // N x K nonnegative weights
    Mat B; // K x J nonnegative basis vectors
    std::vector<double> objective_trace; // KL divergence after each accepted iteration
    double objective() const { return objective_trace.back(); }
};

struct NmfOptions {
    int max_iter = 2000;
    double tol = 1e-6;     // relative objective change
    int restarts = 5;      // best-of by final objective
    std::uint64_t seed = 20172018;
    double floor = 1e-12;  // elementwise floor on W and B
};

/// Nonnegative matrix factorization Lambda ~ W B by Lee-Seung multiplicative
/// updates for the KL divergence. The objective trace is recorded and is
/// non-increasing.
NmfFactors nmf(const IntensityMatrix& Lambda, int K, const NmfOptions& opts = {});

/// J x (K+1) covariate matrix: intercept column of ones, then each basis row
/// log-transformed and standardized to mean 0 / sample sd 1.
struct DesignMatrix {
    Mat X;

    int J() const { return static_cast<int>(X.rows()); }
    int p() const { return static_cast<int>(X.cols()) - 1; }
};

DesignMatrix build_design(const Mat& B);

} // namespace shotclust
