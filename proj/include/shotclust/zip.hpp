#pragma once

#include "shotclust/common.hpp"
#include "shotclust/rng.hpp"

namespace shotclust {

/// Parameters of a zero-inflated Poisson: point mass at 0 with probability
/// rho, Poisson(mu) otherwise.
struct ZipParams {
    double mu;  // Poisson mean, > 0
    double rho; // extra-zero probability, in [0, 1]
};

void validate(const ZipParams& params);

///   P(Y = 0) = rho + (1 - rho) exp(-mu)
///   P(Y = k) = (1 - rho) mu^k exp(-mu) / k!,  k > 0
double zip_pmf(long kappa, const ZipParams& params);

/// log zip_pmf, stable for large kappa / extreme mu. The kappa = 0 branch is
/// a log-sum-exp of log(rho) and log(1-rho) - mu; log k! via lgamma.
double zip_logpmf(long kappa, const ZipParams& params);

/// Generative draw: Bernoulli(rho) gate, else Poisson(mu).
long zip_sample(const ZipParams& params, Rng& rng);

/// Log-link mean exp(x . beta) with the linear predictor clamped to
/// [-bound, bound] so early MCMC iterates cannot overflow.
double link_mean(const Vec& x, const Vec& beta, double bound = 30.0);

/// Regression coefficients (intercept first).
struct RegressionCoef {
    Vec beta;
};

struct ZipMleFit {
    Vec beta;
    double rho = 0.0;
    double loglik = 0.0;
    int iterations = 0;
    bool degenerate = false; // all-zero row: rho = 1, beta at prior center
};

/// Per-player maximum likelihood fit of the ZIP regression by EM.
///
/// E-step imputes structural-zero indicators on zero cells, M-step is a
/// weighted Poisson regression solved by Newton iterations. Stops when the
/// log-likelihood gain drops below `tol` or after `max_iter` EM rounds.
ZipMleFit fit_zip_mle(const Eigen::VectorXi& y_row,
                      const Mat& X,
                      double tol = 1e-8,
                      int max_iter = 500,
                      double lp_bound = 30.0);

} // namespace shotclust
