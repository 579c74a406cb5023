#pragma once

#include "shotclust/common.hpp"
#include "shotclust/rng.hpp"

#include <vector>

namespace shotclust {

/// Prior on the number of mixture components.
enum class KPriorForm {
    truncated, // k ~ Poisson(psi) conditioned on k >= 1
    shifted,   // (k - 1) ~ Poisson(psi)
};

struct MfmPrior {
    double psi = 1.0;
    double gamma = 1.0;
    KPriorForm form = KPriorForm::shifted;
};

/// log p(k) under the component-count prior, k >= 1.
double log_k_prior(int k, const MfmPrior& prior);

/// Precomputed log V_n(t) for t = 1..t_max, where
///   V_n(t) = sum_k k_(t) / (gamma k)^(n) p(k)
/// with k_(t) the falling and (gamma k)^(n) the rising factorial. Immutable
/// once built; `extended` returns a fresh table with a larger t range.
class VnTable {
public:
    VnTable() = default;
    VnTable(int n, int t_max, const MfmPrior& prior);

    int n() const { return n_; }
    int t_max() const { return static_cast<int>(log_values_.size()); }
    const MfmPrior& prior() const { return prior_; }

    double log_vn(int t) const;

    VnTable extended(int new_t_max) const { return VnTable(n_, new_t_max, prior_); }

private:
    int n_ = 0;
    MfmPrior prior_;
    std::vector<double> log_values_;
};

/// One entry of the infinite series, summed in log space until the additive
/// tail falls below exp(-40) of the running sum (capped at 10,000 terms).
double compute_log_vn(int n, int t, const MfmPrior& prior);

/// Unnormalized log weights for reassigning one observation: entry c < t is
/// log(|c| + gamma) for existing cluster c, the last entry is
/// log(gamma) + log V_n(t+1) - log V_n(t) for opening a new cluster.
/// Extends (replaces) the table when t + 1 exceeds its range.
std::vector<double> log_urn_weights(const std::vector<int>& cluster_sizes, int n, VnTable& vn);

struct StickBreakingDraw {
    int k = 0;
    Vec weights; // length k, sums to 1
};

/// Mixture-weight simulation for (k-1) ~ Poisson(psi): iid Exp(psi) gaps on
/// [0, 1), k = first index where the cumulative sum reaches 1, weights are
/// the gaps with the last one absorbing the remainder.
StickBreakingDraw stick_breaking_sim(double psi, Rng& rng);

} // namespace shotclust
