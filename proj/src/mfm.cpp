#include "shotclust/mfm.hpp"

#include <cmath>

namespace shotclust {

double log_k_prior(int k, const MfmPrior& prior)
{
    if (k < 1)
        return -std::numeric_limits<double>::infinity();
    if (prior.form == KPriorForm::shifted)
        return -prior.psi + (k - 1) * std::log(prior.psi) - std::lgamma(static_cast<double>(k));
    // truncated positive Poisson
    return -prior.psi + k * std::log(prior.psi) - std::lgamma(static_cast<double>(k) + 1.0) -
           std::log1p(-std::exp(-prior.psi));
}

double compute_log_vn(int n, int t, const MfmPrior& prior)
{
    if (t < 1 || t > n)
        throw param_error("V_n(t) requires 1 <= t <= n");
    if (!(prior.psi > 0.0) || !(prior.gamma > 0.0))
        throw param_error("MFM prior requires psi > 0 and gamma > 0");

    constexpr int kMaxTerms = 10000;
    constexpr double kLogTailCutoff = -40.0;

    double log_sum = -std::numeric_limits<double>::infinity();
    double prev_term = std::numeric_limits<double>::infinity();
    for (int k = t; k < t + kMaxTerms; ++k) {
        // k_(t) = k! / (k-t)!, (gamma k)^(n) = gamma(gk+n)/gamma(gk)
        const double gk = prior.gamma * k;
        const double term = std::lgamma(k + 1.0) - std::lgamma(k - t + 1.0) -
                            (std::lgamma(gk + n) - std::lgamma(gk)) + log_k_prior(k, prior);
        log_sum = log_add_exp(log_sum, term);
        if (term < prev_term && term - log_sum < kLogTailCutoff)
            return log_sum;
        prev_term = term;
    }
    throw numeric_error("V_n series did not converge within 10,000 terms");
}

VnTable::VnTable(int n, int t_max, const MfmPrior& prior)
    : n_(n)
    , prior_(prior)
{
    if (t_max < 1 || t_max > n)
        throw param_error("VnTable requires 1 <= t_max <= n");
    log_values_.reserve(t_max);
    for (int t = 1; t <= t_max; ++t)
        log_values_.push_back(compute_log_vn(n, t, prior));
}

double VnTable::log_vn(int t) const
{
    if (t < 1 || t > t_max())
        throw param_error("V_n(t) outside the tabulated range");
    return log_values_[t - 1];
}

std::vector<double> log_urn_weights(const std::vector<int>& cluster_sizes, int n, VnTable& vn)
{
    const int t = static_cast<int>(cluster_sizes.size());
    if (vn.n() != n)
        throw param_error("VnTable sample size does not match urn sample size");
    if (t == 0)
        return {0.0}; // first observation: a new cluster is the only option
    if (t + 1 > vn.t_max())
        vn = vn.extended(std::min(n, std::max(t + 1, 2 * vn.t_max())));

    const double gamma = vn.prior().gamma;
    std::vector<double> logw(t + 1);
    for (int c = 0; c < t; ++c)
        logw[c] = std::log(cluster_sizes[c] + gamma);
    logw[t] = std::log(gamma) + vn.log_vn(t + 1) - vn.log_vn(t);
    return logw;
}

StickBreakingDraw stick_breaking_sim(double psi, Rng& rng)
{
    if (!(psi > 0.0))
        throw param_error("stick breaking requires psi > 0");

    std::vector<double> gaps;
    double total = 0.0;
    while (total < 1.0) {
        const double eta = rng.exponential(psi);
        gaps.push_back(eta);
        total += eta;
    }

    StickBreakingDraw draw;
    draw.k = static_cast<int>(gaps.size());
    draw.weights = Vec(draw.k);
    double partial = 0.0;
    for (int h = 0; h + 1 < draw.k; ++h) {
        draw.weights[h] = gaps[h];
        partial += gaps[h];
    }
    draw.weights[draw.k - 1] = 1.0 - partial;
    return draw;
}

} // namespace shotclust
