// Acceptance suite: runs the numbered criteria and prints one line each.
// Usage: acceptance [N ...]   (no arguments: run all)
// Exit: 0 all pass, 1 any failure, 77 when every requested criterion was
// skipped for lack of the optional real dataset.

#include "shotclust/baselines.hpp"
#include "shotclust/cli.hpp"
#include "shotclust/io.hpp"
#include "shotclust/posterior.hpp"
#include "shotclust/simgen.hpp"
#include "shotclust/zip.hpp"

#include "support.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

using namespace shotclust;
using namespace testsupport;

namespace {

struct Outcome {
    bool pass = false;
    bool skipped = false;
    std::string detail;
};

bool approx_rel(double a, double b, double tol)
{
    return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

// ---------------------------------------------------------------------------
// 1. ZIP distribution correctness
Outcome criterion1()
{
    Outcome out;
    double worst_gap = 0.0;
    for (double mu : {0.1, 1.0, 10.0, 50.0}) {
        for (double rho : {0.0, 0.3, 0.9}) {
            double total = 0.0;
            for (long k = 0; k <= 500; ++k)
                total += zip_pmf(k, {mu, rho});
            worst_gap = std::max(worst_gap, std::abs(1.0 - total));
        }
    }

    double worst_pois = 0.0;
    for (double mu : {0.1, 1.0, 10.0, 50.0}) {
        double pois = std::exp(-mu);
        for (long k = 0; k <= 500; ++k) {
            if (k > 0)
                pois *= mu / static_cast<double>(k);
            worst_pois = std::max(worst_pois, std::abs(zip_pmf(k, {mu, 0.0}) - pois));
        }
    }

    out.pass = worst_gap < 1e-10 && worst_pois < 1e-14;
    std::ostringstream ss;
    ss << "max |1 - sum| = " << worst_gap << ", max Poisson gap = " << worst_pois;
    out.detail = ss.str();
    return out;
}

// ---------------------------------------------------------------------------
// 2. V_n(t) against the 100-digit direct-summation oracle
Outcome criterion2()
{
    Outcome out;
    double worst = 0.0;
    for (KPriorForm form : {KPriorForm::shifted, KPriorForm::truncated}) {
        for (int n : {5, 20, 100}) {
            for (int t = 1; t <= 5; ++t) {
                for (double psi : {0.5, 1.0, 2.0}) {
                    const MfmPrior prior{psi, 1.0, form};
                    const double mine = std::exp(compute_log_vn(n, t, prior));
                    const double oracle =
                        vn_oracle(n, t, psi, 1.0, form == KPriorForm::shifted);
                    worst = std::max(worst, std::abs(mine - oracle) / oracle);
                }
            }
        }
    }
    out.pass = worst < 1e-8;
    std::ostringstream ss;
    ss << "max relative error = " << worst << " over 90 grid points";
    out.detail = ss.str();
    return out;
}

// ---------------------------------------------------------------------------
// 3. Prior-only sampler vs exhaustive partition law, n = 6
Outcome criterion3()
{
    Outcome out;
    const int n = 6;
    const auto partitions = all_partitions(n);

    std::ostringstream ss;
    bool ok = true;
    for (KPriorForm form : {KPriorForm::shifted, KPriorForm::truncated}) {
        CountMatrix counts;
        counts.y = IMat::Zero(n, 1);
        for (int i = 0; i < n; ++i)
            counts.player_ids.push_back("p" + std::to_string(i));
        const DesignMatrix X{Mat::Ones(1, 1)};

        FitConfig cfg;
        cfg.likelihood_off = true;
        cfg.k_prior = form;
        cfg.seed = form == KPriorForm::shifted ? 1001 : 1002;
        cfg.k_init = 3;
        cfg.init_param_sweeps = 0;
        cfg.n_iter = 2;
        cfg.n_burnin = 1;
        Sampler sampler(counts, X, cfg);

        std::map<std::vector<int>, long> freq;
        const long sweeps = 1000000;
        for (long s = 0; s < sweeps; ++s) {
            sampler.sweep();
            freq[canonical_labels(sampler.state().z)] += 1;
        }

        double tv = 0.0;
        for (const auto& part : partitions) {
            std::vector<int> sizes;
            for (int i = 0; i < n; ++i) {
                if (part[i] == static_cast<int>(sizes.size()))
                    sizes.push_back(1);
                else
                    sizes[part[i]] += 1;
            }
            const double exact = static_cast<double>(
                mfm_partition_prob(sizes, 1.0, 1.0, form == KPriorForm::shifted));
            tv += std::abs(exact - static_cast<double>(freq[part]) / sweeps);
        }
        tv /= 2.0;
        ok = ok && tv < 0.02;
        ss << (form == KPriorForm::shifted ? "shifted" : "truncated") << " TV = " << tv << "  ";
    }
    out.pass = ok;
    out.detail = ss.str() + "(threshold 0.02, 10^6 sweeps each)";
    return out;
}

// ---------------------------------------------------------------------------
// 4. Dahl selection vs full-materialization reference
Outcome criterion4()
{
    Outcome out;
    Rng rng(404);
    int agree = 0;
    const int trials = 100;
    for (int trial = 0; trial < trials; ++trial) {
        const int n = 3 + static_cast<int>(rng.integer(18));
        const int T = 1 + static_cast<int>(rng.integer(50));
        MCMCTrace trace;
        trace.n = n;
        trace.p = 0;
        for (int t = 0; t < T; ++t) {
            TraceDraw d;
            d.iter = t + 1;
            std::vector<int> z(n);
            for (int i = 0; i < n; ++i)
                z[i] = static_cast<int>(rng.integer(1 + rng.integer(5)));
            d.z = canonical_labels(z);
            const int k = *std::max_element(d.z.begin(), d.z.end()) + 1;
            for (int h = 0; h < k; ++h)
                d.theta.push_back({Vec::Zero(1), 0.5});
            trace.draws.push_back(std::move(d));
        }
        agree += dahl_select(trace).index == dahl_brute_force(trace) ? 1 : 0;
    }
    out.pass = agree == trials;
    out.detail = std::to_string(agree) + "/100 traces agree with the brute-force reference";
    return out;
}

// ---------------------------------------------------------------------------
// 5 & 6. Desk-scale clustering and estimation benchmarks
struct DeskResults {
    double cover_rate = 0.0;
    double ri_mfm = 0.0;
    double ri_kmeans = 0.0;
    double ri_meanshift = 0.0;
    SimMetrics metrics; // per beta coordinate
};

DeskResults run_desk_design(DesignType type, std::uint64_t master_seed)
{
    const int R = 10;
    const DesignMatrix X = synthetic_design(200, 5, 515);
    const SimDesign design = desk_design(type, X, master_seed);
    const int n = design.n();
    const int p1 = 6;

    Mat truth_players(n, p1);
    {
        int i = 0;
        for (int g = 0; g < design.k0(); ++g)
            for (int r = 0; r < design.group_sizes[g]; ++r, ++i)
                truth_players.row(i) = design.true_betas[g].transpose();
    }

    std::vector<double> ri_mfm(R), ri_km(R), ri_ms(R);
    std::vector<int> k_hats(R);
    std::vector<Mat> est(R), lo(R), hi(R);

    Rng master(master_seed);
    std::vector<std::uint64_t> rep_seeds;
    for (int r = 0; r < R; ++r)
        rep_seeds.push_back(master.split(r).seed());

    cli::parallel_for(R, cli::worker_count(0), [&](int r) {
        Rng rng(rep_seeds[r]);
        auto [counts, labels] = generate(design, rng);

        FitConfig cfg;
        cfg.n_iter = 3000;
        cfg.n_burnin = 1000;
        cfg.seed = Rng(rep_seeds[r]).split(1).seed();
        const MCMCTrace trace = run_chain(counts, design.design, cfg);

        const DahlResult dahl = dahl_select(trace);
        const int k_hat = *std::max_element(dahl.z_hat.begin(), dahl.z_hat.end()) + 1;
        k_hats[r] = k_hat;
        ri_mfm[r] = rand_index(labels, dahl.z_hat);

        // baselines on the per-player ZIP MLE features; k-means cannot infer
        // k, so it takes the MFM estimate
        const FeatureMatrix feats = build_features(counts, design.design, FeatureKind::zip_mle);
        ri_km[r] = rand_index(labels, kmeans(feats.F, k_hat, 10, rep_seeds[r]).labels);
        ri_ms[r] = rand_index(labels, mean_shift(feats.F));

        const PosteriorSummary summary = summarize(trace, dahl.z_hat);
        est[r] = summary.player_mean.leftCols(p1);
        lo[r] = summary.player_lo.leftCols(p1);
        hi[r] = summary.player_hi.leftCols(p1);
    });

    DeskResults out;
    for (int r = 0; r < R; ++r) {
        out.cover_rate += k_hats[r] == 3 ? 1.0 : 0.0;
        out.ri_mfm += ri_mfm[r];
        out.ri_kmeans += ri_km[r];
        out.ri_meanshift += ri_ms[r];
    }
    out.cover_rate /= R;
    out.ri_mfm /= R;
    out.ri_kmeans /= R;
    out.ri_meanshift /= R;
    out.metrics = sim_metrics(est, lo, hi, truth_players);
    return out;
}

std::map<DesignType, DeskResults>& desk_cache()
{
    static std::map<DesignType, DeskResults> cache;
    return cache;
}

const DeskResults& desk_results(DesignType type)
{
    auto& cache = desk_cache();
    if (!cache.count(type))
        cache[type] = run_desk_design(type, type == DesignType::balanced ? 56001 : 56002);
    return cache.at(type);
}

Outcome criterion5()
{
    Outcome out;
    std::ostringstream ss;
    bool ok = true;
    for (DesignType type : {DesignType::balanced, DesignType::imbalanced}) {
        const DeskResults& res = desk_results(type);
        const bool cover_ok = res.cover_rate >= 0.80;
        const bool ri_ok = res.ri_mfm >= 0.90;
        const bool order_ok = res.ri_mfm >= res.ri_kmeans && res.ri_kmeans >= res.ri_meanshift;
        ok = ok && cover_ok && ri_ok && order_ok;
        ss << (type == DesignType::balanced ? "balanced" : "imbalanced")
           << ": cover=" << res.cover_rate << " RI(mfm/kmeans/meanshift)=" << res.ri_mfm << "/"
           << res.ri_kmeans << "/" << res.ri_meanshift << "  ";
    }
    out.pass = ok;
    out.detail = ss.str();
    return out;
}

Outcome criterion6()
{
    Outcome out;
    std::ostringstream ss;
    bool ok = true;
    for (DesignType type : {DesignType::balanced, DesignType::imbalanced}) {
        const DeskResults& res = desk_results(type);
        double max_mab = 0.0, min_mcr = 1.0;
        for (int m = 0; m < res.metrics.mab.size(); ++m) {
            max_mab = std::max(max_mab, res.metrics.mab[m]);
            min_mcr = std::min(min_mcr, res.metrics.mcr[m]);
        }
        ok = ok && max_mab <= 0.10 && min_mcr >= 0.85;
        ss << (type == DesignType::balanced ? "balanced" : "imbalanced")
           << ": max MAB=" << max_mab << " min MCR=" << min_mcr << "  ";
    }
    out.pass = ok;
    out.detail = ss.str() + "(MAB <= 0.10, MCR in [0.85, 1])";
    return out;
}

// ---------------------------------------------------------------------------
// 7. Real-data protocol (gated on the public dataset being supplied)
Outcome criterion7()
{
    Outcome out;
    const char* env = std::getenv("SHOTCLUST_REALDATA");
    const std::string path = env ? env : "data/shots_2017_18.csv";
    if (!std::ifstream(path).good()) {
        out.skipped = true;
        out.detail = "dataset not supplied (set SHOTCLUST_REALDATA or place " + path + ")";
        return out;
    }

    const CourtGrid grid;
    auto records = read_shots_csv(path, grid, true);
    std::map<std::string, std::vector<ShotRecord>> by_player;
    for (ShotRecord& rec : records)
        by_player[rec.player_id].push_back(std::move(rec));

    // optional first-season exclusion list, one player id per line
    std::set<std::string> excluded;
    if (const char* exenv = std::getenv("SHOTCLUST_EXCLUDE")) {
        std::ifstream ex(exenv);
        std::string id;
        while (std::getline(ex, id))
            if (!id.empty())
                excluded.insert(id);
    }

    std::vector<std::string> ids;
    std::vector<ShotRecord> kept;
    for (auto& [id, recs] : by_player) {
        if (static_cast<int>(recs.size()) <= 400 || excluded.count(id))
            continue;
        ids.push_back(id);
        for (auto& rec : recs)
            kept.push_back(std::move(rec));
    }
    const CountMatrix counts = bin_shots(kept, grid, ids);

    // blocks-per-shot-count row for Capela
    int capela = -1;
    for (std::size_t i = 0; i < ids.size(); ++i)
        if (ids[i].find("Capela") != std::string::npos)
            capela = static_cast<int>(i);
    bool capela_ok = false;
    if (capela >= 0) {
        const auto hist = count_histogram(counts, capela);
        capela_ok = hist.at(0) == 1123 && hist.at(1) == 25 && hist.at(2) == 8 &&
                    hist.at(3) == 2 && hist.at(4) == 4 && hist.at(5) == 0 && hist.at(6) == 13;
    }

    const char* denv = std::getenv("SHOTCLUST_REALDESIGN");
    const DesignMatrix design = denv && std::ifstream(denv).good()
                                    ? read_design_csv(denv)
                                    : synthetic_design(grid.blocks(), 5, 20162017);

    FitConfig cfg;
    cfg.n_iter = 15000;
    cfg.n_burnin = 5000;
    cfg.seed = 20172018;
    cfg.progress_every = 1000;
    const MCMCTrace trace = run_chain(counts, design, cfg);
    const DahlResult dahl = dahl_select(trace);
    const PosteriorSummary summary = summarize(trace, dahl.z_hat);
    const int k_hat = summary.k_hat;

    out.pass = capela_ok && k_hat >= 3 && k_hat <= 6 &&
               summary.cluster_mean.cols() == 7; // beta0..beta5 + rho per group
    std::ostringstream ss;
    ss << "n=" << counts.n() << " capela_row=" << (capela_ok ? "exact" : "MISMATCH")
       << " k_hat=" << k_hat;
    out.detail = ss.str();
    return out;
}

// ---------------------------------------------------------------------------
// 8. Sampler sanity: Geweke-style moment agreement + seed determinism
struct GewekeStats {
    double beta0 = 0.0, beta0_sq = 0.0, rho = 0.0, rho_sq = 0.0, k_occ = 0.0;
};

GewekeStats stats_of(const std::vector<int>& z, const std::vector<ClusterParams>& theta)
{
    GewekeStats s;
    const ClusterParams& th = theta[z[0]];
    s.beta0 = th.beta[0];
    s.beta0_sq = th.beta[0] * th.beta[0];
    s.rho = th.rho;
    s.rho_sq = th.rho * th.rho;
    std::vector<bool> occ(theta.size(), false);
    for (int zi : z)
        occ[zi] = true;
    for (bool o : occ)
        s.k_occ += o ? 1.0 : 0.0;
    return s;
}

double batch_se(const std::vector<double>& xs, int batches = 40)
{
    const int B = batches;
    const int len = static_cast<int>(xs.size()) / B;
    std::vector<double> bm(B, 0.0);
    for (int b = 0; b < B; ++b) {
        for (int i = 0; i < len; ++i)
            bm[b] += xs[b * len + i];
        bm[b] /= len;
    }
    const double m = mean(bm);
    double v = 0.0;
    for (double x : bm)
        v += (x - m) * (x - m);
    v /= (B - 1);
    return std::sqrt(v / B);
}

Outcome criterion8()
{
    Outcome out;
    std::ostringstream ss;

    // --- seed determinism
    SimDesign sd = desk_design(DesignType::balanced, synthetic_design(50, 5, 81), 9);
    Rng gen_rng(9);
    auto [counts_d, labels_d] = generate(sd, gen_rng);
    (void)labels_d;
    FitConfig det_cfg;
    det_cfg.n_iter = 150;
    det_cfg.n_burnin = 50;
    det_cfg.seed = 777;
    det_cfg.k_init = 5;
    const MCMCTrace t1 = run_chain(counts_d, sd.design, det_cfg);
    const MCMCTrace t2 = run_chain(counts_d, sd.design, det_cfg);
    bool deterministic = t1.T() == t2.T();
    for (int t = 0; deterministic && t < t1.T(); ++t) {
        deterministic = t1.draws[t].z == t2.draws[t].z &&
                        t1.draws[t].psi == t2.draws[t].psi &&
                        t1.draws[t].log_post == t2.draws[t].log_post;
        for (int h = 0; deterministic && h < t1.draws[t].k(); ++h)
            deterministic = t1.draws[t].theta[h].rho == t2.draws[t].theta[h].rho &&
                            (t1.draws[t].theta[h].beta - t2.draws[t].theta[h].beta).norm() == 0.0;
    }
    ss << "determinism=" << (deterministic ? "bit-identical" : "MISMATCH") << "  ";

    // --- Geweke forward vs successive-conditional at n=10, J=50
    const int n = 10, J = 50;
    const DesignMatrix X = synthetic_design(J, 2, 82);
    const int p1 = 3;
    const double sigma0 = 0.4;
    const double psi = 1.0;

    FitConfig cfg;
    cfg.sigma0_scale = sigma0;
    cfg.psi = psi;
    cfg.m_aux = 2;
    cfg.adapt_steps = false;
    cfg.rw_step = 0.15;
    cfg.k_init = 2;
    cfg.init_param_sweeps = 0;
    cfg.mle_init = false; // set_state replaces the constructor's state anyway
    cfg.n_iter = 2;
    cfg.n_burnin = 1;
    cfg.seed = 7007;

    Rng fwd_rng(88001);
    auto draw_prior_theta = [&](Rng& r, int count) {
        std::vector<ClusterParams> theta;
        for (int h = 0; h < count; ++h) {
            ClusterParams th;
            th.beta = Vec(p1);
            for (int c = 0; c < p1; ++c)
                th.beta[c] = r.normal(0.0, sigma0);
            th.rho = std::clamp(r.uniform(), 1e-8, 1.0 - 1e-8);
            theta.push_back(std::move(th));
        }
        return theta;
    };
    auto forward_partition = [&](Rng& r) {
        const StickBreakingDraw sb = stick_breaking_sim(psi, r);
        std::vector<int> z(n);
        for (int i = 0; i < n; ++i) {
            double u = r.uniform();
            int h = 0;
            while (h + 1 < sb.k && u >= sb.weights[h]) {
                u -= sb.weights[h];
                ++h;
            }
            z[i] = h;
        }
        return canonical_labels(z);
    };
    auto gen_counts = [&](const std::vector<int>& z, const std::vector<ClusterParams>& theta,
                          Rng& r) {
        CountMatrix counts;
        counts.y = IMat(n, J);
        for (int i = 1; i <= n; ++i)
            counts.player_ids.push_back("p" + std::to_string(i));
        for (int i = 0; i < n; ++i) {
            const ClusterParams& th = theta[z[i]];
            const Vec mu = (X.X * th.beta)
                               .unaryExpr([](double lp) { return std::exp(clamp_lp(lp)); });
            for (int j = 0; j < J; ++j)
                counts.y(i, j) = static_cast<int>(zip_sample({mu[j], th.rho}, r));
        }
        return counts;
    };

    const int M_f = 40000;
    std::vector<std::vector<double>> fwd(5);
    for (int m = 0; m < M_f; ++m) {
        const std::vector<int> z = forward_partition(fwd_rng);
        const int k = *std::max_element(z.begin(), z.end()) + 1;
        const auto theta = draw_prior_theta(fwd_rng, k);
        const GewekeStats s = stats_of(z, theta);
        fwd[0].push_back(s.beta0);
        fwd[1].push_back(s.beta0_sq);
        fwd[2].push_back(s.rho);
        fwd[3].push_back(s.rho_sq);
        fwd[4].push_back(s.k_occ);
    }

    // data regenerated from the current state each outer iteration; several
    // inner parameter passes per regeneration shorten the autocorrelation of
    // the joint chain (any composition of the conditional updates is valid)
    const int M_g = 40000;
    std::vector<std::vector<double>> gibbs(5);
    Rng chain_rng(88002);
    std::vector<int> z = forward_partition(chain_rng);
    int k = *std::max_element(z.begin(), z.end()) + 1;
    std::vector<ClusterParams> theta = draw_prior_theta(chain_rng, k);
    for (int m = 0; m < M_g; ++m) {
        const CountMatrix counts = gen_counts(z, theta, chain_rng);
        Sampler sampler(counts, X, cfg);
        sampler.set_state(z, theta);
        sampler.rng() = chain_rng;
        sampler.update_indicators();
        sampler.update_labels();
        for (int inner = 0; inner < 4; ++inner) {
            sampler.update_beta();
            sampler.update_rho();
            sampler.update_indicators();
        }
        chain_rng = sampler.rng();
        z = sampler.state().z;
        theta = sampler.state().theta;

        const GewekeStats s = stats_of(z, theta);
        gibbs[0].push_back(s.beta0);
        gibbs[1].push_back(s.beta0_sq);
        gibbs[2].push_back(s.rho);
        gibbs[3].push_back(s.rho_sq);
        gibbs[4].push_back(s.k_occ);
    }

    const char* names[5] = {"beta0", "beta0^2", "rho", "rho^2", "k"};
    bool geweke_ok = true;
    for (int q = 0; q < 5; ++q) {
        const double mf = mean(fwd[q]);
        const double mg = mean(gibbs[q]);
        const double se_f = sample_sd(fwd[q]) / std::sqrt(static_cast<double>(M_f));
        const double se_g = batch_se(gibbs[q]);
        const double gap = std::abs(mf - mg);
        const double bound = 3.0 * std::sqrt(se_f * se_f + se_g * se_g);
        if (gap > bound) {
            geweke_ok = false;
            ss << names[q] << ": |" << mf << " - " << mg << "| > " << bound << "  ";
        }
    }
    ss << "geweke=" << (geweke_ok ? "within 3 MC SEs (5 stats)" : "MISMATCH");

    out.pass = deterministic && geweke_ok;
    out.detail = ss.str();
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    std::vector<int> wanted;
    for (int a = 1; a < argc; ++a)
        wanted.push_back(std::atoi(argv[a]));
    if (wanted.empty())
        wanted = {1, 2, 3, 4, 5, 6, 7, 8};

    const char* names[9] = {"",
                            "ZIP distribution correctness",
                            "V_n oracle equivalence",
                            "prior partition law equivalence",
                            "Dahl brute-force equivalence",
                            "desk-scale clustering benchmark",
                            "desk-scale estimation benchmark",
                            "real-data protocol",
                            "sampler sanity (Geweke + determinism)"};

    int failures = 0, skips = 0;
    for (int id : wanted) {
        Outcome out;
        switch (id) {
        case 1: out = criterion1(); break;
        case 2: out = criterion2(); break;
        case 3: out = criterion3(); break;
        case 4: out = criterion4(); break;
        case 5: out = criterion5(); break;
        case 6: out = criterion6(); break;
        case 7: out = criterion7(); break;
        case 8: out = criterion8(); break;
        default:
            std::cerr << "unknown criterion " << id << '\n';
            return 1;
        }
        const char* status = out.skipped ? "SKIP" : out.pass ? "PASS" : "FAIL";
        std::cout << "criterion " << id << " (" << names[id] << "): " << status << "  "
                  << out.detail << '\n';
        failures += !out.pass && !out.skipped ? 1 : 0;
        skips += out.skipped ? 1 : 0;
    }

    if (failures > 0)
        return 1;
    if (skips == static_cast<int>(wanted.size()))
        return 77;
    return 0;
}
