#include "shotclust/sampler.hpp"

#include "shotclust/zip.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>

namespace shotclust {

void FitConfig::validate() const
{
    if (n_iter < 1 || n_burnin < 0 || n_burnin >= n_iter)
        throw param_error("need 0 <= n_burnin < n_iter");
    if (thin < 1)
        throw param_error("thin must be >= 1");
    if (!(rw_step > 0.0))
        throw param_error("rw_step must be positive");
    if (m_aux < 1)
        throw param_error("m_aux must be >= 1");
    if (!(sigma0_scale > 0.0))
        throw param_error("sigma0_scale must be positive");
    if (!(psi > 0.0) || !(gamma > 0.0))
        throw param_error("psi and gamma must be positive");
    if (k_init < 1)
        throw param_error("k_init must be >= 1");
}

double loglik_cluster(const CountMatrix& y, const std::vector<int>& members,
                      const DesignMatrix& X, const Vec& beta, double rho, double lp_bound)
{
    double ll = 0.0;
    for (int i : members) {
        if (i < 0 || i >= y.n())
            throw param_error("member index out of range");
        for (int j = 0; j < y.J(); ++j) {
            const double mu = std::exp(clamp_lp(X.X.row(j).dot(beta), lp_bound));
            ll += zip_logpmf(y.y(i, j), ZipParams{mu, rho});
        }
    }
    return ll;
}

double beta_log_target(const Vec& beta, const Mat& X, const BetaSuffStats& stats, double sigma0,
                       double lp_bound)
{
    double ll = -beta.squaredNorm() / (2.0 * sigma0 * sigma0);
    const Vec lp = X * beta;
    for (Index j = 0; j < X.rows(); ++j) {
        const double c = clamp_lp(lp[j], lp_bound);
        ll += stats.s[j] * c - stats.m[j] * std::exp(c);
    }
    return ll;
}

Vec rw_beta_sweep(Vec& beta, Vec& lp, const Mat& X, const BetaSuffStats& stats, double sigma0,
                  const Vec& steps, double lp_bound, Rng& rng)
{
    const Index p1 = beta.size();
    Vec accept_probs(p1);

    auto partial_ll = [&](const Vec& lpv) {
        double ll = 0.0;
        for (Index j = 0; j < lpv.size(); ++j) {
            const double c = clamp_lp(lpv[j], lp_bound);
            ll += stats.s[j] * c - stats.m[j] * std::exp(c);
        }
        return ll;
    };

    double cur_ll = partial_ll(lp);
    for (Index c = 0; c < p1; ++c) {
        const double delta = rng.normal(0.0, steps[c]);
        const Vec cand_lp = lp + delta * X.col(c);
        const double cand_ll = partial_ll(cand_lp);
        const double cand_coef = beta[c] + delta;
        const double log_ratio = cand_ll - cur_ll +
                                 (beta[c] * beta[c] - cand_coef * cand_coef) /
                                     (2.0 * sigma0 * sigma0);
        const double accept = std::min(1.0, std::exp(log_ratio));
        accept_probs[c] = accept;
        if (rng.uniform() < accept) {
            beta[c] = cand_coef;
            lp = cand_lp;
            cur_ll = cand_ll;
        }
    }
    return accept_probs;
}

Sampler::Sampler(const CountMatrix& y, const DesignMatrix& X, FitConfig config)
    : counts_(&y)
    , design_(&X)
    , cfg_(std::move(config))
    , n_(y.n())
    , J_(y.J())
    , p1_(static_cast<int>(X.X.cols()))
    , rng_(cfg_.seed)
{
    cfg_.validate();
    if (X.J() != J_)
        throw param_error("design rows (" + std::to_string(X.J()) +
                          ") do not match count columns (" + std::to_string(J_) + ")");
    if (n_ < 1)
        throw param_error("need at least one player");
    if ((y.y.array() < 0).any())
        throw param_error("counts must be nonnegative");

    pos_cells_.resize(n_);
    zero_blocks_.resize(n_);
    for (int i = 0; i < n_; ++i) {
        for (int j = 0; j < J_; ++j) {
            const int yij = y.y(i, j);
            if (yij > 0)
                pos_cells_[i].push_back({j, yij, std::lgamma(yij + 1.0)});
            else
                zero_blocks_[i].push_back(j);
        }
    }

    log_step_ = Vec::Constant(p1_, std::log(cfg_.rw_step));
    adapt_count_.assign(p1_, 0);

    init_state();
}

void Sampler::init_state()
{
    state_.psi = cfg_.psi;
    const MfmPrior prior{cfg_.psi, cfg_.gamma, cfg_.k_prior};
    const int k_init = std::min(cfg_.k_init, n_);
    state_.vn = VnTable(n_, std::min(n_, std::max(16, k_init + 4)), prior);
    state_.w.setZero(n_, J_);

    if (!cfg_.likelihood_off && cfg_.mle_init) {
        init_state_from_mle(k_init);
        return;
    }

    state_.z.resize(n_);
    for (int i = 0; i < n_; ++i)
        state_.z[i] = static_cast<int>(rng_.integer(k_init));

    // compact away labels that drew no members
    std::vector<int> remap(k_init, -1);
    int next = 0;
    for (int i = 0; i < n_; ++i) {
        if (remap[state_.z[i]] < 0)
            remap[state_.z[i]] = next++;
        state_.z[i] = remap[state_.z[i]];
    }

    state_.theta.clear();
    for (int h = 0; h < next; ++h)
        state_.theta.push_back(draw_prior_params());
    sizes_.assign(next, 0);
    for (int i = 0; i < n_; ++i)
        sizes_[state_.z[i]] += 1;
}

// Seed the chain at data-informed atoms: per-player ZIP MLE fits, cluster
// seeds chosen by farthest-point traversal in standardized feature space,
// every player attached to its nearest seed. Pure initialization; the
// invariant distribution is untouched.
void Sampler::init_state_from_mle(int k_init)
{
    Mat feats(n_, p1_ + 1);
    std::vector<ZipMleFit> fits;
    fits.reserve(n_);
    for (int i = 0; i < n_; ++i) {
        // loose tolerances: seeds only need to land in the right basin
        fits.push_back(fit_zip_mle(counts_->y.row(i).transpose(), design_->X, 1e-4, 60,
                                   cfg_.lp_clamp));
        feats.row(i).head(p1_) = fits.back().beta.transpose();
        feats(i, p1_) = fits.back().rho;
    }
    for (Index c = 0; c < feats.cols(); ++c) {
        const double mean = feats.col(c).mean();
        const double sd = std::sqrt((feats.col(c).array() - mean).square().sum() /
                                    std::max(1, n_ - 1));
        if (sd > 1e-12)
            feats.col(c) = (feats.col(c).array() - mean) / sd;
        else
            feats.col(c).setZero();
    }

    std::vector<int> seeds{static_cast<int>(rng_.integer(n_))};
    Vec d2 = (feats.rowwise() - feats.row(seeds[0])).rowwise().squaredNorm();
    while (static_cast<int>(seeds.size()) < k_init) {
        Index far = 0;
        const double best = d2.maxCoeff(&far);
        if (best <= 0.0)
            break; // all remaining players coincide with a seed
        seeds.push_back(static_cast<int>(far));
        d2 = d2.cwiseMin((feats.rowwise() - feats.row(far)).rowwise().squaredNorm());
    }

    const int t = static_cast<int>(seeds.size());
    state_.theta.clear();
    for (int s : seeds) {
        ClusterParams th;
        th.beta = fits[s].beta;
        th.rho = std::clamp(fits[s].rho, 1e-3, 1.0 - 1e-3);
        state_.theta.push_back(std::move(th));
    }

    state_.z.assign(n_, 0);
    sizes_.assign(t, 0);
    for (int i = 0; i < n_; ++i) {
        int best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (int h = 0; h < t; ++h) {
            const double dd = (feats.row(i) - feats.row(seeds[h])).squaredNorm();
            if (dd < bd) {
                bd = dd;
                best = h;
            }
        }
        state_.z[i] = best;
        sizes_[best] += 1;
    }
}

void Sampler::set_state(const std::vector<int>& z, std::vector<ClusterParams> theta)
{
    if (static_cast<int>(z.size()) != n_)
        throw param_error("label vector length mismatch");
    const int t = static_cast<int>(theta.size());
    sizes_.assign(t, 0);
    for (int zi : z) {
        if (zi < 0 || zi >= t)
            throw param_error("label references missing cluster");
        sizes_[zi] += 1;
    }
    for (int h = 0; h < t; ++h)
        if (sizes_[h] == 0)
            throw param_error("cluster " + std::to_string(h) + " has no members");
    for (const auto& th : theta)
        if (th.beta.size() != p1_)
            throw param_error("beta dimension mismatch");
    state_.z = z;
    state_.theta = std::move(theta);
    state_.w.setZero(n_, J_);
}

ClusterParams Sampler::draw_prior_params()
{
    ClusterParams th;
    th.beta = Vec(p1_);
    for (int c = 0; c < p1_; ++c)
        th.beta[c] = rng_.normal(0.0, cfg_.sigma0_scale);
    th.rho = std::clamp(rng_.uniform(), 1e-8, 1.0 - 1e-8);
    return th;
}

Sampler::LikTable Sampler::make_table(const ClusterParams& theta) const
{
    LikTable tab;
    tab.lp = (design_->X * theta.beta).cwiseMax(-cfg_.lp_clamp).cwiseMin(cfg_.lp_clamp);
    tab.mu = tab.lp.array().exp();
    tab.log_rho = theta.rho > 0.0 ? std::log(theta.rho) : -std::numeric_limits<double>::infinity();
    tab.log1mrho = theta.rho < 1.0 ? std::log1p(-theta.rho) : -std::numeric_limits<double>::infinity();
    // rho + (1-rho) e^{-mu} never underflows for rho > 0, so the direct form
    // is safe and vectorizes
    if (theta.rho > 0.0)
        tab.zero_term = (theta.rho + (1.0 - theta.rho) * (-tab.mu.array()).exp()).log();
    else
        tab.zero_term = -tab.mu;
    tab.zero_sum = tab.zero_term.sum();
    return tab;
}

double Sampler::player_loglik(int i, const LikTable& tab) const
{
    if (cfg_.likelihood_off)
        return 0.0;
    double ll = tab.zero_sum;
    for (const PosCell& cell : pos_cells_[i])
        ll += tab.log1mrho + cell.y * tab.lp[cell.j] - tab.mu[cell.j] - cell.lgyp1 -
              tab.zero_term[cell.j];
    return ll;
}

double Sampler::player_loglik(int i, const ClusterParams& theta) const
{
    return player_loglik(i, make_table(theta));
}

void Sampler::redraw_player_indicators(int i, const LikTable& tab)
{
    for (int j : zero_blocks_[i]) {
        // P(w=1 | y=0) = rho / (rho + (1-rho) e^{-mu})
        const double p = std::exp(tab.log_rho - tab.zero_term[j]);
        state_.w(i, j) = rng_.bernoulli(p) ? 1 : 0;
    }
}

void Sampler::update_indicators()
{
    if (cfg_.likelihood_off)
        return;
    std::vector<LikTable> tables;
    tables.reserve(state_.theta.size());
    for (const auto& th : state_.theta)
        tables.push_back(make_table(th));
    for (int i = 0; i < n_; ++i)
        redraw_player_indicators(i, tables[state_.z[i]]);
}

void Sampler::remove_cluster(int h, std::vector<LikTable>& tables)
{
    const int last = static_cast<int>(state_.theta.size()) - 1;
    if (h != last) {
        std::swap(state_.theta[h], state_.theta[last]);
        std::swap(sizes_[h], sizes_[last]);
        std::swap(tables[h], tables[last]);
        for (int& zi : state_.z)
            if (zi == last)
                zi = h;
    }
    state_.theta.pop_back();
    sizes_.pop_back();
    tables.pop_back();
}

void Sampler::update_labels()
{
    std::vector<LikTable> tables;
    tables.reserve(state_.theta.size());
    for (const auto& th : state_.theta)
        tables.push_back(make_table(th));

    std::vector<ClusterParams> aux_params(cfg_.m_aux);
    std::vector<LikTable> aux_tables(cfg_.m_aux);

    for (int i = 0; i < n_; ++i) {
        const int h_old = state_.z[i];
        sizes_[h_old] -= 1;
        const bool was_singleton = sizes_[h_old] == 0;

        int fresh_from = 0;
        if (was_singleton) {
            // retain the emptied cluster's parameters as the first auxiliary
            aux_params[0] = state_.theta[h_old];
            aux_tables[0] = tables[h_old];
            fresh_from = 1;
            remove_cluster(h_old, tables);
        }
        for (int a = fresh_from; a < cfg_.m_aux; ++a) {
            aux_params[a] = draw_prior_params();
            aux_tables[a] = make_table(aux_params[a]);
        }

        const int t_minus = static_cast<int>(state_.theta.size());
        std::vector<double> logw = log_urn_weights(sizes_, n_, state_.vn);

        std::vector<double> score(t_minus + cfg_.m_aux);
        const double log_m = std::log(static_cast<double>(cfg_.m_aux));
        for (int c = 0; c < t_minus; ++c)
            score[c] = logw[c] + player_loglik(i, tables[c]);
        for (int a = 0; a < cfg_.m_aux; ++a)
            score[t_minus + a] = logw[t_minus] - log_m + player_loglik(i, aux_tables[a]);

        const double smax = *std::max_element(score.begin(), score.end());
        double total = 0.0;
        for (double& s : score) {
            s = std::exp(s - smax);
            total += s;
        }
        double u = rng_.uniform() * total;
        int pick = 0;
        for (; pick + 1 < static_cast<int>(score.size()); ++pick) {
            u -= score[pick];
            if (u < 0.0)
                break;
        }

        if (pick < t_minus) {
            state_.z[i] = pick;
            sizes_[pick] += 1;
        } else {
            const int a = pick - t_minus;
            state_.z[i] = t_minus;
            state_.theta.push_back(aux_params[a]);
            tables.push_back(aux_tables[a]);
            sizes_.push_back(1);
        }

        // complete the blocked (z_i, w_i) move under the destination cluster
        if (!cfg_.likelihood_off)
            redraw_player_indicators(i, tables[state_.z[i]]);
    }
}

std::vector<BetaSuffStats> Sampler::all_cluster_stats() const
{
    std::vector<BetaSuffStats> stats(state_.k());
    for (BetaSuffStats& s : stats) {
        s.s = Vec::Zero(J_);
        s.m = Vec::Zero(J_);
    }
    if (cfg_.likelihood_off)
        return stats;
    for (int i = 0; i < n_; ++i) {
        BetaSuffStats& s = stats[state_.z[i]];
        for (const PosCell& cell : pos_cells_[i]) {
            s.s[cell.j] += cell.y;
            s.m[cell.j] += 1.0;
        }
        for (int j : zero_blocks_[i])
            s.m[j] += state_.w(i, j) ? 0.0 : 1.0;
    }
    return stats;
}

void Sampler::record_acceptance(int coord, double accept_prob)
{
    if (!adapting_ || !cfg_.adapt_steps)
        return;
    adapt_count_[coord] += 1;
    const double gain = 1.0 / std::pow(static_cast<double>(adapt_count_[coord]), 0.7);
    log_step_[coord] += gain * (accept_prob - 0.44);
    log_step_[coord] = std::clamp(log_step_[coord], std::log(1e-5), std::log(10.0));
}

void Sampler::update_beta()
{
    const Vec steps = log_step_.array().exp();
    const std::vector<BetaSuffStats> stats = all_cluster_stats();
    for (std::size_t h = 0; h < state_.theta.size(); ++h) {
        Vec& beta = state_.theta[h].beta;
        Vec lp = design_->X * beta;
        const Vec accepts = rw_beta_sweep(beta, lp, design_->X, stats[h], cfg_.sigma0_scale,
                                          steps, cfg_.lp_clamp, rng_);
        for (int c = 0; c < p1_; ++c)
            record_acceptance(c, accepts[c]);
    }
}

void Sampler::update_rho()
{
    std::vector<double> sum_w(state_.k(), 0.0);
    std::vector<double> cells(state_.k(), 0.0);
    if (!cfg_.likelihood_off) {
        for (int i = 0; i < n_; ++i) {
            const int h = state_.z[i];
            cells[h] += static_cast<double>(J_);
            for (int j : zero_blocks_[i])
                sum_w[h] += state_.w(i, j);
        }
    }
    for (int h = 0; h < state_.k(); ++h) {
        const double draw = rng_.beta(1.0 + sum_w[h], 1.0 + cells[h] - sum_w[h]);
        state_.theta[h].rho = std::clamp(draw, 1e-8, 1.0 - 1e-8);
    }
}

void Sampler::update_psi()
{
    if (!cfg_.psi_gamma_update)
        return;
    const int k = state_.k();
    state_.psi = rng_.gamma(1.0 + (k - 1), 2.0);
    const MfmPrior prior{state_.psi, cfg_.gamma, cfg_.k_prior};
    state_.vn = VnTable(n_, state_.vn.t_max(), prior);
}

void Sampler::sweep()
{
    update_indicators();
    update_labels();
    update_beta();
    update_rho();
    update_psi();
}

double Sampler::log_posterior() const
{
    static const double kLog2Pi = std::log(2.0 * M_PI);
    const double s0 = cfg_.sigma0_scale;
    const int t = state_.k();

    double lp = 0.0;
    for (const auto& th : state_.theta)
        lp += -th.beta.squaredNorm() / (2.0 * s0 * s0) -
              p1_ * (0.5 * kLog2Pi + std::log(s0));

    // EPPF: V_n(t) * prod_c gamma^(|c|)
    lp += state_.vn.log_vn(t);
    for (int h = 0; h < t; ++h)
        lp += std::lgamma(cfg_.gamma + sizes_[h]) - std::lgamma(cfg_.gamma);

    if (cfg_.psi_gamma_update)
        lp += -state_.psi; // Gamma(1,1) prior density up to normalization

    if (cfg_.likelihood_off)
        return lp;

    std::vector<LikTable> tables;
    tables.reserve(state_.theta.size());
    for (const auto& th : state_.theta)
        tables.push_back(make_table(th));
    for (int i = 0; i < n_; ++i) {
        const LikTable& tab = tables[state_.z[i]];
        for (const PosCell& cell : pos_cells_[i])
            lp += tab.log1mrho + cell.y * tab.lp[cell.j] - tab.mu[cell.j] - cell.lgyp1;
        for (int j : zero_blocks_[i])
            lp += state_.w(i, j) ? tab.log_rho : tab.log1mrho - tab.mu[j];
    }
    return lp;
}

MCMCTrace Sampler::run()
{
    MCMCTrace trace;
    trace.n = n_;
    trace.p = p1_ - 1;

    for (int s = 0; s < cfg_.init_param_sweeps; ++s) {
        update_indicators();
        update_beta();
        update_rho();
    }

    adapting_ = true;
    for (iter_ = 1; iter_ <= cfg_.n_iter; ++iter_) {
        if (iter_ > cfg_.n_burnin)
            adapting_ = false;
        sweep();

        if (iter_ > cfg_.n_burnin && (iter_ - cfg_.n_burnin) % cfg_.thin == 0) {
            TraceDraw draw;
            draw.iter = iter_;
            draw.z = state_.z;
            draw.theta = state_.theta;
            draw.psi = state_.psi;
            draw.log_post = log_posterior();
            if (!std::isfinite(draw.log_post)) {
                std::ostringstream msg;
                msg << "non-finite log-posterior at iteration " << iter_ << " (k=" << state_.k()
                    << ", psi=" << state_.psi << ")";
                for (int h = 0; h < state_.k(); ++h)
                    msg << "\n  cluster " << h << ": size=" << sizes_[h]
                        << " rho=" << state_.theta[h].rho
                        << " beta0=" << state_.theta[h].beta[0];
                throw numeric_error(msg.str());
            }
            trace.draws.push_back(std::move(draw));
        }

        if (cfg_.progress_every > 0 && iter_ % cfg_.progress_every == 0)
            std::cerr << "iter " << iter_ << "/" << cfg_.n_iter << "  k=" << state_.k()
                      << "  log_post=" << log_posterior() << '\n';
    }
    return trace;
}

MCMCTrace run_chain(const CountMatrix& y, const DesignMatrix& X, const FitConfig& config)
{
    Sampler sampler(y, X, config);
    return sampler.run();
}

} // namespace shotclust
