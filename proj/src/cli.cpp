#include "shotclust/cli.hpp"

#include "shotclust/baselines.hpp"
#include "shotclust/io.hpp"
#include "shotclust/posterior.hpp"
#include "shotclust/simgen.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace shotclust::cli {

namespace fs = std::filesystem;
using nlohmann::json;

int worker_count(int requested)
{
    if (requested > 0)
        return requested;
    if (const char* env = std::getenv("SHOTCLUST_WORKERS")) {
        const int v = std::atoi(env);
        if (v > 0)
            return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

void parallel_for(int tasks, int workers, const std::function<void(int)>& fn)
{
    workers = std::min(std::max(1, workers), std::max(1, tasks));
    if (workers == 1) {
        for (int t = 0; t < tasks; ++t)
            fn(t);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const int t = next.fetch_add(1);
                if (t >= tasks)
                    return;
                try {
                    fn(t);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error)
                        first_error = std::current_exception();
                }
            }
        });
    }
    for (std::thread& th : pool)
        th.join();
    if (first_error)
        std::rethrow_exception(first_error);
}

KPriorForm parse_k_prior(const std::string& name)
{
    if (name == "shifted")
        return KPriorForm::shifted;
    if (name == "truncated")
        return KPriorForm::truncated;
    throw io_error("unknown k-prior form '" + name + "' (expected shifted or truncated)");
}

std::uint64_t fnv1a(const std::string& text)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return h;
}

namespace {

void ensure_dir(const std::string& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw io_error("cannot create output directory '" + dir + "': " + ec.message());
}

std::string join(const std::string& dir, const std::string& name)
{
    return (fs::path(dir) / name).string();
}

void require_file(const std::string& path, const std::string& what)
{
    if (path.empty())
        throw io_error("missing required " + what + " path");
    if (!fs::exists(path))
        throw io_error(what + " file not found: '" + path + "'");
}

std::string git_revision()
{
#ifdef SHOTCLUST_GIT_REV
    return SHOTCLUST_GIT_REV;
#else
    return "unknown";
#endif
}

void write_manifest(const std::string& dir, const std::string& command, const json& config,
                    const std::vector<std::string>& artifacts)
{
    json manifest;
    manifest["format_version"] = 1;
    manifest["command"] = command;
    manifest["config"] = config;
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(fnv1a(config.dump())));
    manifest["config_hash"] = hash;
    manifest["git_revision"] = git_revision();
    manifest["artifacts"] = artifacts;
    std::ofstream out(join(dir, "manifest.json"));
    if (!out)
        throw io_error("cannot write manifest in '" + dir + "'");
    out << manifest.dump(2) << '\n';
}

std::map<std::string, std::vector<ShotRecord>> group_by_player(std::vector<ShotRecord> records)
{
    std::map<std::string, std::vector<ShotRecord>> by_player;
    for (ShotRecord& rec : records)
        by_player[rec.player_id].push_back(std::move(rec));
    return by_player;
}

DesignMatrix scale_design(const DesignMatrix& X, const std::string& scale, std::uint64_t seed)
{
    if (scale == "paper")
        return X;
    if (scale == "desk")
        return subsample_design(X, std::min(200, X.J()), seed);
    throw io_error("unknown scale '" + scale + "' (expected paper or desk)");
}

SimDesign make_sim_design(const std::string& type, const std::string& scale,
                          const std::string& design_path, std::uint64_t seed)
{
    DesignMatrix X;
    if (!design_path.empty()) {
        require_file(design_path, "design");
        X = read_design_csv(design_path);
    } else {
        X = synthetic_design(1175, 5, Rng(seed).split(91).seed());
    }
    X = scale_design(X, scale, Rng(seed).split(92).seed());

    const DesignType dtype = type == "balanced" ? DesignType::balanced
                             : type == "imbalanced"
                                 ? DesignType::imbalanced
                                 : throw io_error("unknown design type '" + type + "'");
    return scale == "paper" ? paper_design(dtype, X, seed) : desk_design(dtype, X, seed);
}

} // namespace

void cmd_basis(const BasisOptions& opt)
{
    require_file(opt.shots, "historical shots");
    ensure_dir(opt.out_dir);
    const CourtGrid grid;
    auto by_player = group_by_player(read_shots_csv(opt.shots, grid, opt.reflect));

    std::vector<const std::vector<ShotRecord>*> kept;
    for (const auto& [id, recs] : by_player)
        if (static_cast<int>(recs.size()) >= opt.min_attempts)
            kept.push_back(&recs);
    if (kept.empty())
        throw io_error("no players left after the attempt filter");

    IntensityMatrix Lambda;
    Lambda.Lambda = Mat::Zero(static_cast<Index>(kept.size()), grid.blocks());
    parallel_for(static_cast<int>(kept.size()), worker_count(opt.workers), [&](int i) {
        Lambda.Lambda.row(i) = kde_grid(*kept[i], grid, opt.bandwidth).transpose();
    });

    NmfOptions nopt;
    nopt.restarts = opt.restarts;
    nopt.seed = opt.seed;
    const NmfFactors factors = nmf(Lambda, opt.rank, nopt);
    const DesignMatrix design = build_design(factors.B);

    std::vector<std::string> bheader;
    for (int j = 1; j <= grid.blocks(); ++j)
        bheader.push_back("b" + std::to_string(j));
    write_matrix_csv(join(opt.out_dir, "basis.csv"), factors.B, bheader);
    write_design_csv(join(opt.out_dir, "design.csv"), design);

    // grid dump for plotting: one value column per basis surface
    Mat dump(grid.blocks(), 2 + opt.rank);
    for (int j = 0; j < grid.blocks(); ++j) {
        dump(j, 0) = grid.centroid_x(j);
        dump(j, 1) = grid.centroid_y(j);
        for (int k = 0; k < opt.rank; ++k)
            dump(j, 2 + k) = factors.B(k, j);
    }
    std::vector<std::string> gheader{"block_x", "block_y"};
    for (int k = 1; k <= opt.rank; ++k)
        gheader.push_back("basis" + std::to_string(k));
    write_matrix_csv(join(opt.out_dir, "basis_grid.csv"), dump, gheader);

    json config{{"shots", opt.shots},       {"rank", opt.rank},
                {"bandwidth", opt.bandwidth}, {"restarts", opt.restarts},
                {"min_attempts", opt.min_attempts}, {"seed", opt.seed},
                {"reflect", opt.reflect}};
    write_manifest(opt.out_dir, "basis", config,
                   {"basis.csv", "design.csv", "basis_grid.csv"});
}

void cmd_simulate(const SimulateOptions& opt)
{
    ensure_dir(opt.out_dir);
    const SimDesign design = make_sim_design(opt.type, opt.scale, opt.design_path, opt.seed);

    write_design_csv(join(opt.out_dir, "design.csv"), design.design);

    Rng master(opt.seed);
    std::vector<std::string> artifacts{"design.csv", "truth.csv"};
    for (int r = 0; r < opt.replicates; ++r) {
        Rng rng = master.split(r);
        auto [counts, labels] = generate(design, rng);
        char name[64];
        std::snprintf(name, sizeof name, "rep_%03d_counts.csv", r + 1);
        write_counts(join(opt.out_dir, name), counts);
        artifacts.emplace_back(name);
        if (r == 0)
            write_partition_csv(join(opt.out_dir, "truth.csv"), counts.player_ids, labels);
    }

    json config{{"type", opt.type},
                {"scale", opt.scale},
                {"replicates", opt.replicates},
                {"seed", opt.seed},
                {"design", opt.design_path}};
    write_manifest(opt.out_dir, "simulate", config, artifacts);
}

void cmd_fit(const FitOptions& opt)
{
    require_file(opt.counts, "counts");
    require_file(opt.design, "design");
    ensure_dir(opt.out_dir);

    const CountMatrix counts = read_counts(opt.counts);
    const DesignMatrix design = read_design_csv(opt.design);

    FitConfig base = opt.config;
    base.k_prior = parse_k_prior(opt.k_prior);
    base.validate();

    Rng master(base.seed);
    std::vector<std::string> artifacts;
    std::vector<std::uint64_t> chain_seeds;
    for (int c = 0; c < opt.chains; ++c)
        chain_seeds.push_back(master.split(c).seed());

    std::vector<std::string> names(opt.chains);
    parallel_for(opt.chains, worker_count(opt.workers), [&](int c) {
        FitConfig cfg = base;
        cfg.seed = chain_seeds[c];
        const MCMCTrace trace = run_chain(counts, design, cfg);
        char name[64];
        std::snprintf(name, sizeof name, "trace_chain%d.ndjson", c + 1);
        names[c] = name;
        write_trace_ndjson(join(opt.out_dir, name), trace);
    });
    artifacts.insert(artifacts.end(), names.begin(), names.end());

    json config{{"counts", opt.counts},
                {"design", opt.design},
                {"n_iter", base.n_iter},
                {"n_burnin", base.n_burnin},
                {"thin", base.thin},
                {"seed", base.seed},
                {"chains", opt.chains},
                {"chain_seeds", chain_seeds},
                {"psi", base.psi},
                {"psi_gamma_update", base.psi_gamma_update},
                {"sigma0", base.sigma0_scale},
                {"k_prior", opt.k_prior},
                {"m_aux", base.m_aux},
                {"k_init", base.k_init},
                {"rw_step", base.rw_step}};
    write_manifest(opt.out_dir, "fit", config, artifacts);
}

void cmd_summarize(const SummarizeOptions& opt)
{
    if (opt.traces.empty())
        throw io_error("summarize needs at least one --trace");
    ensure_dir(opt.out_dir);

    MCMCTrace pooled;
    for (const std::string& path : opt.traces) {
        require_file(path, "trace");
        MCMCTrace t = read_trace_ndjson(path);
        if (pooled.draws.empty()) {
            pooled = std::move(t);
        } else {
            if (t.n != pooled.n || t.p != pooled.p)
                throw io_error("traces disagree on player or covariate count");
            pooled.draws.insert(pooled.draws.end(), std::make_move_iterator(t.draws.begin()),
                                std::make_move_iterator(t.draws.end()));
        }
    }

    std::vector<std::string> ids;
    if (!opt.counts.empty()) {
        require_file(opt.counts, "counts");
        ids = read_counts(opt.counts).player_ids;
        if (static_cast<int>(ids.size()) != pooled.n)
            throw io_error("counts player list does not match trace");
    } else {
        for (int i = 1; i <= pooled.n; ++i)
            ids.push_back("player_" + std::to_string(i));
    }

    const DahlResult dahl = dahl_select(pooled);
    const PosteriorSummary summary = summarize(pooled, dahl.z_hat);

    write_partition_csv(join(opt.out_dir, "partition.csv"), ids, summary.z_hat);

    const int p1 = pooled.p + 1;
    std::vector<std::string> eheader{"cluster", "size", "rho"};
    for (int m = 0; m < p1; ++m)
        eheader.push_back("beta" + std::to_string(m));
    Mat est(summary.k_hat, 3 + p1);
    for (int h = 0; h < summary.k_hat; ++h) {
        est(h, 0) = h + 1;
        est(h, 1) = summary.cluster_sizes[h];
        est(h, 2) = summary.cluster_mean(h, p1); // rho column
        for (int m = 0; m < p1; ++m)
            est(h, 3 + m) = summary.cluster_mean(h, m);
    }
    write_matrix_csv(join(opt.out_dir, "estimates.csv"), est, eheader);

    std::ofstream hpd(join(opt.out_dir, "hpd.csv"));
    if (!hpd)
        throw io_error("cannot write hpd.csv");
    hpd << "player_id,parameter,mean,lo,hi\n";
    for (int i = 0; i < pooled.n; ++i) {
        for (int m = 0; m <= p1; ++m) {
            const std::string name = m < p1 ? "beta" + std::to_string(m) : "rho";
            hpd << ids[i] << ',' << name << ',' << fmt_double(summary.player_mean(i, m)) << ','
                << fmt_double(summary.player_lo(i, m)) << ','
                << fmt_double(summary.player_hi(i, m)) << '\n';
        }
    }

    json config{{"traces", opt.traces}, {"counts", opt.counts},
                {"dahl_index", dahl.index}, {"k_hat", summary.k_hat}};
    write_manifest(opt.out_dir, "summarize", config,
                   {"partition.csv", "estimates.csv", "hpd.csv"});
}

void cmd_eval(const EvalOptions& opt)
{
    require_file(opt.truth, "truth labels");
    const std::vector<int> truth = read_partition_csv(opt.truth);

    std::ostringstream table;
    table << "method,rand_index,k\n";
    for (const std::string& entry : opt.preds) {
        const auto eq = entry.find('=');
        const std::string name = eq == std::string::npos ? entry : entry.substr(0, eq);
        const std::string path = eq == std::string::npos ? entry : entry.substr(eq + 1);
        require_file(path, "prediction");
        const std::vector<int> pred = read_partition_csv(path);
        if (pred.size() != truth.size())
            throw io_error("prediction '" + name + "' has wrong length");
        const int k = *std::max_element(pred.begin(), pred.end()) + 1;
        table << name << ',' << fmt_double(rand_index(truth, pred)) << ',' << k << '\n';
    }

    std::cout << table.str();
    if (!opt.out.empty()) {
        std::ofstream out(opt.out);
        if (!out)
            throw io_error("cannot write '" + opt.out + "'");
        out << table.str();
    }
}

void cmd_plotdata(const PlotdataOptions& opt)
{
    CourtGrid grid;
    grid.nx = opt.nx;
    grid.ny = opt.ny;
    if (opt.out.empty())
        throw io_error("plotdata needs --out");

    if (opt.what == "counts") {
        require_file(opt.counts, "counts");
        const CountMatrix counts = read_counts(opt.counts);
        if (counts.J() != grid.blocks())
            throw io_error("counts block count does not match the grid");
        int row = -1;
        for (int i = 0; i < counts.n(); ++i)
            if (counts.player_ids[i] == opt.player)
                row = i;
        if (row < 0)
            throw io_error("player '" + opt.player + "' not present in counts");
        Mat dump(grid.blocks(), 3);
        for (int j = 0; j < grid.blocks(); ++j) {
            dump(j, 0) = grid.centroid_x(j);
            dump(j, 1) = grid.centroid_y(j);
            dump(j, 2) = counts.y(row, j);
        }
        write_matrix_csv(opt.out, dump, {"block_x", "block_y", "value"});
        return;
    }

    if (opt.what == "basis") {
        require_file(opt.basis, "basis");
        const Mat B = read_matrix_csv(opt.basis);
        if (B.cols() != grid.blocks())
            throw io_error("basis block count does not match the grid");
        const int K = static_cast<int>(B.rows());
        Mat dump(grid.blocks(), 2 + K);
        for (int j = 0; j < grid.blocks(); ++j) {
            dump(j, 0) = grid.centroid_x(j);
            dump(j, 1) = grid.centroid_y(j);
            for (int k = 0; k < K; ++k)
                dump(j, 2 + k) = B(k, j);
        }
        std::vector<std::string> header{"block_x", "block_y"};
        for (int k = 1; k <= K; ++k)
            header.push_back("basis" + std::to_string(k));
        write_matrix_csv(opt.out, dump, header);
        return;
    }

    if (opt.what == "partition") {
        require_file(opt.counts, "counts");
        require_file(opt.partition, "partition");
        const CountMatrix counts = read_counts(opt.counts);
        if (counts.J() != grid.blocks())
            throw io_error("counts block count does not match the grid");
        const std::vector<int> labels = read_partition_csv(opt.partition);
        if (static_cast<int>(labels.size()) != counts.n())
            throw io_error("partition length does not match counts");
        const int k = *std::max_element(labels.begin(), labels.end()) + 1;

        Mat mean = Mat::Zero(k, counts.J());
        std::vector<int> sizes(k, 0);
        for (int i = 0; i < counts.n(); ++i) {
            mean.row(labels[i]) += counts.y.row(i).cast<double>();
            sizes[labels[i]] += 1;
        }
        Mat dump(static_cast<Index>(k) * grid.blocks(), 4);
        Index r = 0;
        for (int h = 0; h < k; ++h) {
            for (int j = 0; j < grid.blocks(); ++j, ++r) {
                dump(r, 0) = grid.centroid_x(j);
                dump(r, 1) = grid.centroid_y(j);
                dump(r, 2) = sizes[h] > 0 ? mean(h, j) / sizes[h] : 0.0;
                dump(r, 3) = h + 1;
            }
        }
        write_matrix_csv(opt.out, dump, {"block_x", "block_y", "value", "cluster"});
        return;
    }

    throw io_error("unknown plotdata mode '" + opt.what + "'");
}

void cmd_pipeline(const PipelineOptions& opt)
{
    ensure_dir(opt.out_dir);
    const CourtGrid grid;
    std::vector<std::string> artifacts;

    auto stage = [](const std::string& name, const std::function<void()>& body) {
        try {
            body();
        } catch (const io_error& e) {
            throw io_error("stage " + name + ": " + e.what());
        } catch (const error& e) {
            throw numeric_error("stage " + name + ": " + e.what());
        }
    };

    CountMatrix counts;
    std::vector<int> truth_labels;
    bool have_truth = false;

    stage("ingest", [&] {
        if (!opt.sim_type.empty()) {
            const SimDesign design =
                make_sim_design(opt.sim_type, opt.sim_scale, opt.design_path, opt.seed);
            Rng rng(opt.seed);
            auto [c, labels] = generate(design, rng);
            counts = std::move(c);
            truth_labels = std::move(labels);
            have_truth = true;
            write_partition_csv(join(opt.out_dir, "truth.csv"), counts.player_ids, truth_labels);
            write_design_csv(join(opt.out_dir, "design.csv"), design.design);
            artifacts.emplace_back("truth.csv");
        } else if (!opt.counts.empty()) {
            require_file(opt.counts, "counts");
            counts = read_counts(opt.counts);
        } else {
            require_file(opt.shots, "shots");
            std::vector<ShotRecord> records = read_shots_csv(opt.shots, grid, opt.reflect);
            auto by_player = group_by_player(std::move(records));
            std::vector<std::string> excluded;
            if (!opt.exclude_players.empty()) {
                require_file(opt.exclude_players, "exclusion list");
                std::ifstream ex(opt.exclude_players);
                std::string id;
                while (std::getline(ex, id))
                    if (!id.empty())
                        by_player.erase(id);
            }
            std::vector<ShotRecord> filtered;
            std::vector<std::string> ids;
            for (auto& [id, recs] : by_player) {
                if (static_cast<int>(recs.size()) < opt.min_attempts)
                    continue;
                ids.push_back(id);
                for (ShotRecord& rec : recs)
                    filtered.push_back(std::move(rec));
            }
            if (ids.empty())
                throw io_error("no players left after filtering");
            counts = bin_shots(filtered, grid, ids);
        }
        write_counts(join(opt.out_dir, "counts.csv"), counts);
        artifacts.emplace_back("counts.csv");
    });

    DesignMatrix design;
    stage("design", [&] {
        if (!opt.sim_type.empty()) {
            design = read_design_csv(join(opt.out_dir, "design.csv"));
        } else if (!opt.design_path.empty()) {
            require_file(opt.design_path, "design");
            design = read_design_csv(opt.design_path);
            write_design_csv(join(opt.out_dir, "design.csv"), design);
        } else if (!opt.hist_shots.empty()) {
            BasisOptions bopt;
            bopt.shots = opt.hist_shots;
            bopt.out_dir = opt.out_dir;
            bopt.rank = opt.rank;
            bopt.bandwidth = opt.bandwidth;
            bopt.restarts = opt.restarts;
            bopt.reflect = opt.reflect;
            bopt.seed = Rng(opt.seed).split(7).seed();
            cmd_basis(bopt);
            design = read_design_csv(join(opt.out_dir, "design.csv"));
            artifacts.emplace_back("basis.csv");
        } else {
            design = synthetic_design(counts.J(), 5, Rng(opt.seed).split(8).seed());
            write_design_csv(join(opt.out_dir, "design.csv"), design);
        }
        if (design.J() != counts.J())
            throw io_error("design rows do not match count columns");
        artifacts.emplace_back("design.csv");
    });

    stage("fit", [&] {
        FitOptions fopt = opt.fit;
        fopt.counts = join(opt.out_dir, "counts.csv");
        fopt.design = join(opt.out_dir, "design.csv");
        fopt.out_dir = opt.out_dir;
        fopt.config.seed = Rng(opt.seed).split(1).seed();
        cmd_fit(fopt);
        for (int c = 1; c <= opt.fit.chains; ++c)
            artifacts.push_back("trace_chain" + std::to_string(c) + ".ndjson");
    });

    stage("summarize", [&] {
        SummarizeOptions sopt;
        for (int c = 1; c <= opt.fit.chains; ++c)
            sopt.traces.push_back(join(opt.out_dir, "trace_chain" + std::to_string(c) + ".ndjson"));
        sopt.counts = join(opt.out_dir, "counts.csv");
        sopt.out_dir = opt.out_dir;
        cmd_summarize(sopt);
        artifacts.insert(artifacts.end(), {"partition.csv", "estimates.csv", "hpd.csv"});
    });

    stage("eval", [&] {
        std::string truth_path = opt.truth;
        if (truth_path.empty() && have_truth)
            truth_path = join(opt.out_dir, "truth.csv");
        if (truth_path.empty())
            return;
        EvalOptions eopt;
        eopt.truth = truth_path;
        eopt.preds = {"mfm=" + join(opt.out_dir, "partition.csv")};
        eopt.out = join(opt.out_dir, "ri.csv");
        cmd_eval(eopt);
        artifacts.emplace_back("ri.csv");
    });

    json config{{"shots", opt.shots},
                {"counts", opt.counts},
                {"hist_shots", opt.hist_shots},
                {"design", opt.design_path},
                {"sim_type", opt.sim_type},
                {"sim_scale", opt.sim_scale},
                {"seed", opt.seed},
                {"min_attempts", opt.min_attempts},
                {"reflect", opt.reflect},
                {"n_iter", opt.fit.config.n_iter},
                {"n_burnin", opt.fit.config.n_burnin},
                {"chains", opt.fit.chains}};
    write_manifest(opt.out_dir, "pipeline", config, artifacts);
}

} // namespace shotclust::cli
