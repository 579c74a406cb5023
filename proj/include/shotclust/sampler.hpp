#pragma once

#include "shotclust/basis.hpp"
#include "shotclust/court.hpp"
#include "shotclust/mfm.hpp"
#include "shotclust/rng.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace shotclust {

struct FitConfig {
    int n_iter = 15000;
    int n_burnin = 5000;
    int thin = 1;
    double sigma0_scale = 5.0; // prior sd per beta coordinate
    double rw_step = 0.1;      // initial RW Metropolis step, adapted during burn-in
    int m_aux = 2;             // auxiliary components per label update
    std::uint64_t seed = 1;
    double psi = 1.0;
    bool psi_gamma_update = false; // Gamma(1,1) hyperprior update on psi
    KPriorForm k_prior = KPriorForm::shifted;
    double gamma = 1.0;
    int k_init = 10;           // clusters at initialization (capped at n)
    int init_param_sweeps = 25; // parameter-only sweeps before label moves start
    bool mle_init = true;      // seed clusters at farthest-point per-player MLE fits
    double lp_clamp = 30.0;
    bool likelihood_off = false; // prior-only validation mode: data ignored
    bool adapt_steps = true;
    int progress_every = 0; // stderr progress cadence, 0 = silent

    void validate() const;
};

struct ClusterParams {
    Vec beta;
    double rho = 0.5;
};

/// Full MCMC state. Labels are 0-based and compact (every value in [0, k)
/// with no gaps after each sweep). w marks structural zeros and is only
/// meaningful on cells with y_ij = 0; it is forced to 0 elsewhere.
struct ClusterState {
    std::vector<int> z;
    std::vector<ClusterParams> theta;
    Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> w;
    double psi = 1.0;
    VnTable vn;

    int k() const { return static_cast<int>(theta.size()); }
};

struct TraceDraw {
    int iter = 0;
    std::vector<int> z; // 0-based
    std::vector<ClusterParams> theta;
    double psi = 1.0;
    double log_post = 0.0;

    int k() const { return static_cast<int>(theta.size()); }
};

struct MCMCTrace {
    int n = 0;
    int p = 0; // non-intercept covariates
    std::vector<TraceDraw> draws;

    int T() const { return static_cast<int>(draws.size()); }
};

/// Sum of zip_logpmf over the member rows and all blocks; the slow reference
/// path the sampler's table-based evaluation is tested against.
double loglik_cluster(const CountMatrix& y, const std::vector<int>& members,
                      const DesignMatrix& X, const Vec& beta, double rho,
                      double lp_bound = 30.0);

/// Per-block sufficient statistics for one cluster's beta update: s_j is the
/// member count total at block j, m_j the number of member cells at j whose
/// zero is not structural (w = 0).
struct BetaSuffStats {
    Vec s;
    Vec m;
};

/// log target for the beta update: N(0, sigma0^2 I) prior plus the augmented
/// Poisson likelihood restricted to w = 0 cells.
double beta_log_target(const Vec& beta, const Mat& X, const BetaSuffStats& stats, double sigma0,
                       double lp_bound);

/// One coordinate-wise Gaussian RW Metropolis pass over beta, in place.
/// Returns the per-coordinate acceptance probabilities (for adaptation).
/// `lp` must equal X * beta on entry and is kept in sync.
Vec rw_beta_sweep(Vec& beta, Vec& lp, const Mat& X, const BetaSuffStats& stats, double sigma0,
                  const Vec& steps, double lp_bound, Rng& rng);

/// MCMC for the hierarchical MFM-ZIP model. One sweep runs update_indicators,
/// update_labels, update_beta, update_rho, update_psi in that order.
class Sampler {
public:
    Sampler(const CountMatrix& y, const DesignMatrix& X, FitConfig config);

    /// Redraw the structural-zero indicators on every y = 0 cell.
    void update_indicators();

    /// Collapsed urn update of each label with m_aux auxiliary components.
    /// Marginalizes the moved player's indicators and redraws them under the
    /// destination cluster, so the (z_i, w_i) move is a valid blocked update.
    void update_labels();

    /// Coordinate-wise adaptive RW Metropolis on each cluster's beta.
    void update_beta();

    /// Conjugate Beta draw for each cluster's rho given the indicators.
    void update_rho();

    /// Gamma(1, 1)-conjugate draw for psi (if enabled), refreshing the
    /// V_n table.
    void update_psi();

    void sweep();

    /// Run the configured chain and return the retained draws.
    MCMCTrace run();

    double log_posterior() const;

    const ClusterState& state() const { return state_; }
    ClusterState& state() { return state_; }
    const FitConfig& config() const { return cfg_; }
    Rng& rng() { return rng_; }

    /// Replace labels and cluster parameters (testing / validation hook).
    /// Indicators are re-derived on the next update_indicators call.
    void set_state(const std::vector<int>& z, std::vector<ClusterParams> theta);

    /// Evaluate one player's marginal ZIP log-likelihood under arbitrary
    /// parameters through the sampler's fast table path.
    double player_loglik(int i, const ClusterParams& theta) const;

private:
    struct LikTable {
        Vec lp;
        Vec mu;
        Vec zero_term; // zip_logpmf(0) per block
        double zero_sum = 0.0;
        double log_rho = 0.0;
        double log1mrho = 0.0;
    };

    LikTable make_table(const ClusterParams& theta) const;
    double player_loglik(int i, const LikTable& tab) const;
    ClusterParams draw_prior_params();
    void redraw_player_indicators(int i, const LikTable& tab);
    void remove_cluster(int h, std::vector<LikTable>& tables);
    std::vector<BetaSuffStats> all_cluster_stats() const;
    void record_acceptance(int coord, double accept_prob);
    void init_state();
    void init_state_from_mle(int k_init);

    const CountMatrix* counts_;
    const DesignMatrix* design_;
    FitConfig cfg_;
    int n_ = 0;
    int J_ = 0;
    int p1_ = 0;

    struct PosCell {
        int j;
        int y;
        double lgyp1; // lgamma(y + 1)
    };
    std::vector<std::vector<PosCell>> pos_cells_;
    std::vector<std::vector<int>> zero_blocks_;

    ClusterState state_;
    std::vector<int> sizes_;
    Rng rng_;

    Vec log_step_;
    std::vector<long> adapt_count_;
    bool adapting_ = true;
    int iter_ = 0;
};

/// Convenience wrapper: construct a Sampler and run the full chain.
MCMCTrace run_chain(const CountMatrix& y, const DesignMatrix& X, const FitConfig& config);

} // namespace shotclust
