#include "shotclust/posterior.hpp"

#include <algorithm>
#include <cmath>

namespace shotclust {

DahlResult dahl_select(const MCMCTrace& trace)
{
    const int T = trace.T();
    if (T < 1)
        throw param_error("dahl_select needs a nonempty trace");
    const int n = static_cast<int>(trace.draws[0].z.size());

    // pair co-clustering counts C_ij = T * Abar_ij (upper triangle; the
    // membership matrices are symmetric with unit diagonal)
    Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic> C(n, n);
    C.setZero();
    for (const TraceDraw& draw : trace.draws)
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (draw.z[i] == draw.z[j])
                    C(i, j) += 1;

    // sum_ij (A - Abar)^2 = sum_ij A_ij (1 - 2 C_ij / T) + sum_ij (C_ij / T)^2;
    // minimizing the draw-dependent part in exact integer arithmetic makes
    // ties (and their earliest-index resolution) reproducible
    long best_score = std::numeric_limits<long>::max();
    DahlResult best;
    for (int t = 0; t < T; ++t) {
        const TraceDraw& draw = trace.draws[t];
        long score = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (draw.z[i] == draw.z[j])
                    score += static_cast<long>(T) - 2 * C(i, j);
        if (score < best_score) {
            best_score = score;
            best.index = t;
        }
    }
    best.z_hat = trace.draws[best.index].z;

    double const_term = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double abar = static_cast<double>(C(i, j)) / T;
            const_term += abar * abar;
        }
    best.distance = 2.0 * (static_cast<double>(best_score) / T + const_term);
    return best;
}

std::pair<double, double> hpd_interval(std::vector<double> draws, double level)
{
    if (draws.empty())
        throw param_error("hpd_interval needs at least one draw");
    if (!(level > 0.0 && level <= 1.0))
        throw param_error("hpd level must lie in (0, 1]");
    std::sort(draws.begin(), draws.end());
    const int T = static_cast<int>(draws.size());
    const int m = std::min<int>(T, static_cast<int>(std::ceil(level * T)));

    int best = 0;
    double width = std::numeric_limits<double>::infinity();
    for (int i = 0; i + m <= T; ++i) {
        const double w = draws[i + m - 1] - draws[i];
        if (w < width) {
            width = w;
            best = i;
        }
    }
    return {draws[best], draws[best + m - 1]};
}

PosteriorSummary summarize(const MCMCTrace& trace, const std::vector<int>& z_hat,
                           double hpd_level)
{
    const int T = trace.T();
    if (T < 1)
        throw param_error("summarize needs a nonempty trace");
    const int n = trace.n;
    if (static_cast<int>(z_hat.size()) != n)
        throw param_error("z_hat length does not match trace");
    const int p1 = static_cast<int>(trace.draws[0].theta[0].beta.size());
    const int M = p1 + 1; // beta coordinates then rho

    PosteriorSummary out;
    out.z_hat = z_hat;
    out.k_hat = z_hat.empty() ? 0 : *std::max_element(z_hat.begin(), z_hat.end()) + 1;

    out.player_mean = Mat::Zero(n, M);
    out.player_lo = Mat::Zero(n, M);
    out.player_hi = Mat::Zero(n, M);

    std::vector<double> scratch(T);
    for (int i = 0; i < n; ++i) {
        for (int m = 0; m < M; ++m) {
            for (int t = 0; t < T; ++t) {
                const TraceDraw& d = trace.draws[t];
                const ClusterParams& th = d.theta[d.z[i]];
                scratch[t] = m < p1 ? th.beta[m] : th.rho;
            }
            double mean = 0.0;
            for (double v : scratch)
                mean += v;
            out.player_mean(i, m) = mean / T;
            const auto [lo, hi] = hpd_interval(scratch, hpd_level);
            out.player_lo(i, m) = lo;
            out.player_hi(i, m) = hi;
        }
    }

    out.cluster_mean = Mat::Zero(out.k_hat, M);
    out.cluster_sizes.assign(out.k_hat, 0);
    for (int i = 0; i < n; ++i) {
        out.cluster_mean.row(z_hat[i]) += out.player_mean.row(i);
        out.cluster_sizes[z_hat[i]] += 1;
    }
    for (int h = 0; h < out.k_hat; ++h) {
        if (out.cluster_sizes[h] == 0)
            throw param_error("z_hat has an empty cluster label");
        out.cluster_mean.row(h) /= static_cast<double>(out.cluster_sizes[h]);
    }
    return out;
}

SimMetrics sim_metrics(const std::vector<Mat>& estimates, const std::vector<Mat>& lo,
                       const std::vector<Mat>& hi, const Mat& truth)
{
    const int R = static_cast<int>(estimates.size());
    if (R < 1 || lo.size() != estimates.size() || hi.size() != estimates.size())
        throw param_error("sim_metrics needs matching replicate lists");
    const Index L = truth.rows();
    const Index M = truth.cols();
    for (const Mat& e : estimates)
        if (e.rows() != L || e.cols() != M)
            throw param_error("replicate estimate shape mismatch");

    SimMetrics out;
    out.mab = Vec::Zero(M);
    out.msd = Vec::Zero(M);
    out.mmse = Vec::Zero(M);
    out.mcr = Vec::Zero(M);

    for (Index m = 0; m < M; ++m) {
        for (Index l = 0; l < L; ++l) {
            double abs_bias = 0.0, sq_err = 0.0, cover = 0.0, mean_est = 0.0;
            for (int r = 0; r < R; ++r) {
                const double est = estimates[r](l, m);
                const double err = est - truth(l, m);
                abs_bias += std::abs(err);
                sq_err += err * err;
                mean_est += est;
                if (truth(l, m) >= lo[r](l, m) && truth(l, m) <= hi[r](l, m))
                    cover += 1.0;
            }
            mean_est /= R;
            double var = 0.0;
            for (int r = 0; r < R; ++r) {
                const double d = estimates[r](l, m) - mean_est;
                var += d * d;
            }
            out.mab[m] += abs_bias / R;
            out.mmse[m] += sq_err / R;
            out.mcr[m] += cover / R;
            out.msd[m] += R > 1 ? std::sqrt(var / (R - 1)) : 0.0;
        }
        out.mab[m] /= static_cast<double>(L);
        out.msd[m] /= static_cast<double>(L);
        out.mmse[m] /= static_cast<double>(L);
        out.mcr[m] /= static_cast<double>(L);
    }
    return out;
}

} // namespace shotclust
