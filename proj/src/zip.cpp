#include "shotclust/zip.hpp"

#include <cmath>

namespace shotclust {

void validate(const ZipParams& params)
{
    if (!(params.mu > 0.0) || !std::isfinite(params.mu))
        throw param_error("ZIP mu must be positive and finite, got " + std::to_string(params.mu));
    if (!(params.rho >= 0.0 && params.rho <= 1.0))
        throw param_error("ZIP rho must lie in [0, 1], got " + std::to_string(params.rho));
}

double zip_pmf(long kappa, const ZipParams& params)
{
    validate(params);
    if (kappa < 0)
        throw param_error("ZIP support is the nonnegative integers");
    if (kappa == 0)
        return params.rho + (1.0 - params.rho) * std::exp(-params.mu);
    return std::exp(zip_logpmf(kappa, params));
}

double zip_logpmf(long kappa, const ZipParams& params)
{
    validate(params);
    if (kappa < 0)
        throw param_error("ZIP support is the nonnegative integers");
    const double log1mrho =
        params.rho < 1.0 ? std::log1p(-params.rho) : -std::numeric_limits<double>::infinity();
    if (kappa == 0) {
        if (params.rho == 0.0)
            return -params.mu;
        return log_add_exp(std::log(params.rho), log1mrho - params.mu);
    }
    const double k = static_cast<double>(kappa);
    return log1mrho + k * std::log(params.mu) - params.mu - std::lgamma(k + 1.0);
}

long zip_sample(const ZipParams& params, Rng& rng)
{
    validate(params);
    if (rng.bernoulli(params.rho))
        return 0;
    return rng.poisson(params.mu);
}

double link_mean(const Vec& x, const Vec& beta, double bound)
{
    if (x.size() != beta.size())
        throw param_error("covariate/coefficient length mismatch");
    return std::exp(clamp_lp(x.dot(beta), bound));
}

namespace {

// Poisson part of the ZIP log-likelihood with per-cell weights (1 - w_hat),
// dropping the lgamma(y+1) constant. lp is clamped consistently with
// link_mean.
double weighted_poisson_loglik(const Eigen::VectorXi& y, const Vec& lp_raw, const Vec& wt,
                               double bound)
{
    double ll = 0.0;
    for (Index j = 0; j < y.size(); ++j) {
        const double lp = clamp_lp(lp_raw[j], bound);
        ll += wt[j] * (y[j] * lp - std::exp(lp));
    }
    return ll;
}

double zip_loglik(const Eigen::VectorXi& y, const Vec& lp_raw, double rho, double bound)
{
    double ll = 0.0;
    for (Index j = 0; j < y.size(); ++j) {
        const double mu = std::exp(clamp_lp(lp_raw[j], bound));
        ll += zip_logpmf(y[j], ZipParams{mu, rho});
    }
    return ll;
}

} // namespace

ZipMleFit fit_zip_mle(const Eigen::VectorXi& y_row, const Mat& X, double tol, int max_iter,
                      double lp_bound)
{
    const Index J = X.rows();
    const Index p1 = X.cols();
    if (y_row.size() != J)
        throw param_error("count row length does not match design rows");

    ZipMleFit fit;
    fit.beta = Vec::Zero(p1);

    if (y_row.maxCoeff() == 0) {
        fit.rho = 1.0;
        fit.degenerate = true;
        fit.loglik = 0.0; // P(all zeros) = 1 at rho = 1
        return fit;
    }

    const double ybar = y_row.cast<double>().mean();
    const double zero_frac =
        static_cast<double>((y_row.array() == 0).count()) / static_cast<double>(J);
    fit.beta[0] = std::log(std::max(ybar, 1e-3));
    double rho = std::min(0.9, 0.5 * zero_frac);

    Vec lp = X * fit.beta;
    Vec what = Vec::Zero(J);
    double prev_ll = zip_loglik(y_row, lp, rho, lp_bound);

    for (int iter = 1; iter <= max_iter; ++iter) {
        // E-step: posterior probability the zero is structural
        for (Index j = 0; j < J; ++j) {
            if (y_row[j] != 0) {
                what[j] = 0.0;
                continue;
            }
            const double pois0 = std::exp(-std::exp(clamp_lp(lp[j], lp_bound)));
            what[j] = rho <= 0.0 ? 0.0 : rho / (rho + (1.0 - rho) * pois0);
        }

        // M-step: Newton with step halving, stopped on step size
        rho = what.mean();
        Vec wt = (1.0 - what.array()).matrix();
        double m_ll = weighted_poisson_loglik(y_row, lp, wt, lp_bound);
        for (int newton = 0; newton < 40; ++newton) {
            Vec mu(J);
            for (Index j = 0; j < J; ++j)
                mu[j] = std::exp(clamp_lp(lp[j], lp_bound));
            Vec grad = X.transpose() * (wt.array() * (y_row.cast<double>().array() - mu.array())).matrix();
            Mat H = X.transpose() * (wt.array() * mu.array()).matrix().asDiagonal() * X;
            Vec step = H.ldlt().solve(grad);
            double scale = 1.0;
            bool moved = false;
            for (int halvings = 0; halvings < 30; ++halvings) {
                Vec cand_lp = lp + scale * (X * step);
                const double cand_ll = weighted_poisson_loglik(y_row, cand_lp, wt, lp_bound);
                if (cand_ll >= m_ll) {
                    fit.beta += scale * step;
                    lp = std::move(cand_lp);
                    m_ll = cand_ll;
                    moved = true;
                    break;
                }
                scale *= 0.5;
            }
            if (!moved || scale * step.norm() < 1e-9)
                break;
        }

        const double ll = zip_loglik(y_row, lp, rho, lp_bound);
        fit.iterations = iter;
        if (ll - prev_ll < tol && iter > 1) {
            prev_ll = std::max(ll, prev_ll);
            break;
        }
        prev_ll = ll;
    }

    fit.rho = rho;
    fit.loglik = prev_ll;
    return fit;
}

} // namespace shotclust
