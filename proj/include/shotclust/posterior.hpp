#pragma once

#include "shotclust/sampler.hpp"

#include <utility>
#include <vector>

namespace shotclust {

struct DahlResult {
    int index = 0;            // retained-draw index t*
    std::vector<int> z_hat;   // that draw's partition
    double distance = 0.0;    // squared distance to the mean membership matrix
};

/// Dahl's method: pick the retained draw whose membership matrix is closest
/// in element-wise squared distance to the average membership matrix. Ties
/// break to the earliest draw.
DahlResult dahl_select(const MCMCTrace& trace);

/// Shortest interval containing ceil(level * T) consecutive order statistics.
std::pair<double, double> hpd_interval(std::vector<double> draws, double level = 0.95);

struct PosteriorSummary {
    int dahl_index = 0;
    std::vector<int> z_hat;
    int k_hat = 0;

    // per-player posterior summaries, columns beta_0..beta_p then rho
    Mat player_mean;
    Mat player_lo;
    Mat player_hi;

    // per-cluster (of z_hat) means over members, same column layout
    Mat cluster_mean;
    std::vector<int> cluster_sizes;
};

/// Per-player parameter draws are formed by dereferencing each retained
/// draw's cluster parameters through that draw's labels; means and 95% HPD
/// intervals come from those, and cluster-level rows average the per-player
/// means over the members of z_hat.
PosteriorSummary summarize(const MCMCTrace& trace, const std::vector<int>& z_hat,
                           double hpd_level = 0.95);

struct SimMetrics {
    Vec mab;  // mean absolute bias
    Vec msd;  // mean standard deviation across replicates
    Vec mmse; // mean of mean squared error
    Vec mcr;  // coverage rate of the true value by the 95% HPD interval
};

/// The four benchmark metrics, generalized to L players and R replicates.
/// `estimates[r]`, `lo[r]`, `hi[r]` are L x M matrices of point estimates and
/// interval ends for replicate r; `truth` is L x M.
SimMetrics sim_metrics(const std::vector<Mat>& estimates, const std::vector<Mat>& lo,
                       const std::vector<Mat>& hi, const Mat& truth);

} // namespace shotclust
