#include "shotclust/cli.hpp"
#include "shotclust/common.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <set>
#include <vector>

namespace {

using namespace shotclust;
using namespace shotclust::cli;

// Flat key=value config support: `--config FILE` anywhere on the line is
// replaced by `--key=value` tokens inserted right after the subcommand name,
// so explicitly passed flags still take precedence (last occurrence wins).
std::vector<std::string> expand_config(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);

    std::string config_path;
    for (std::size_t a = 0; a < args.size(); ++a) {
        if (args[a] == "--config" && a + 1 < args.size()) {
            config_path = args[a + 1];
            args.erase(args.begin() + a, args.begin() + a + 2);
            break;
        }
        if (args[a].rfind("--config=", 0) == 0) {
            config_path = args[a].substr(9);
            args.erase(args.begin() + a);
            break;
        }
    }
    if (config_path.empty())
        return args;

    // keys already given explicitly suppress their config-file values
    std::set<std::string> explicit_keys;
    for (const std::string& arg : args) {
        if (arg.rfind("--", 0) != 0)
            continue;
        const auto eq = arg.find('=');
        explicit_keys.insert(arg.substr(2, eq == std::string::npos ? arg.npos : eq - 2));
    }

    std::ifstream in(config_path);
    if (!in)
        throw io_error("cannot open config file '" + config_path + "'");
    std::vector<std::string> expanded;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos || line[start] == '#')
            continue;
        const auto eq = line.find('=', start);
        if (eq == std::string::npos)
            throw io_error(config_path + ":" + std::to_string(lineno) +
                           ": expected key=value");
        std::string key = line.substr(start, eq - start);
        key.erase(key.find_last_not_of(" \t") + 1);
        std::string value = line.substr(eq + 1);
        value.erase(0, value.find_first_not_of(" \t"));
        value.erase(value.find_last_not_of(" \t\r") + 1);
        if (!explicit_keys.count(key))
            expanded.push_back("--" + key + "=" + value);
    }

    // insert after the subcommand token (the first non-flag argument)
    auto pos = args.begin();
    while (pos != args.end() && pos->rfind("-", 0) == 0)
        ++pos;
    if (pos != args.end())
        ++pos;
    args.insert(pos, expanded.begin(), expanded.end());
    return args;
}

void add_fit_flags(CLI::App* sub, FitOptions& opt, bool own_seed = true)
{
    sub->add_option("--iters", opt.config.n_iter, "MCMC iterations");
    sub->add_option("--burnin", opt.config.n_burnin, "burn-in iterations");
    sub->add_option("--thin", opt.config.thin, "thinning interval");
    if (own_seed)
        sub->add_option("--seed", opt.config.seed, "master RNG seed");
    sub->add_option("--chains", opt.chains, "independent chains");
    sub->add_option("--psi", opt.config.psi, "MFM Poisson rate psi");
    sub->add_flag("--psi-gamma-prior", opt.config.psi_gamma_update,
                  "update psi under its Gamma(1,1) hyperprior");
    sub->add_option("--sigma0", opt.config.sigma0_scale, "prior sd for each beta coordinate");
    sub->add_option("--kprior", opt.k_prior, "k prior form: shifted | truncated")
        ->check(CLI::IsMember({"shifted", "truncated"}));
    sub->add_option("--m-aux", opt.config.m_aux, "auxiliary components per label update");
    sub->add_option("--k-init", opt.config.k_init, "clusters at initialization");
    sub->add_flag("!--prior-init", opt.config.mle_init,
                  "initialize from prior draws instead of per-player MLE seeds");
    sub->add_option("--rw-step", opt.config.rw_step, "initial Metropolis step size");
    sub->add_option("--workers", opt.workers, "worker threads (0: SHOTCLUST_WORKERS or cores)");
    sub->add_flag("--prior-only", opt.config.likelihood_off,
                  "ignore the data (prior validation mode)");
    sub->add_option("--progress", opt.config.progress_every,
                    "print progress every N iterations");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"MFM-ZIP shooting-habit clustering"};
    app.require_subcommand(1);
    app.footer("Any subcommand accepts --config FILE holding flat key=value lines\n"
               "mirroring its flags; explicitly passed flags override the file.");

    BasisOptions basis_opt;
    auto* basis = app.add_subcommand("basis", "build NMF basis surfaces and the design matrix");
    basis->add_option("--shots", basis_opt.shots, "historical shots CSV")->required();
    basis->add_option("--rank", basis_opt.rank, "number of basis surfaces");
    basis->add_option("--bandwidth", basis_opt.bandwidth, "KDE bandwidth in feet");
    basis->add_option("--restarts", basis_opt.restarts, "NMF restarts");
    basis->add_option("--min-attempts", basis_opt.min_attempts, "minimum shots per player");
    basis->add_flag("--reflect", basis_opt.reflect, "fold full-court coordinates");
    basis->add_option("--seed", basis_opt.seed, "RNG seed");
    basis->add_option("--workers", basis_opt.workers, "worker threads");
    basis->add_option("--out", basis_opt.out_dir, "output directory");

    SimulateOptions sim_opt;
    auto* simulate = app.add_subcommand("simulate", "generate synthetic replicate datasets");
    simulate->add_option("--type", sim_opt.type, "balanced | imbalanced")
        ->check(CLI::IsMember({"balanced", "imbalanced"}));
    simulate->add_option("--scale", sim_opt.scale, "paper | desk")
        ->check(CLI::IsMember({"paper", "desk"}));
    simulate->add_option("--replicates", sim_opt.replicates, "replicate count");
    simulate->add_option("--seed", sim_opt.seed, "master seed");
    simulate->add_option("--design", sim_opt.design_path, "design CSV (default: synthetic)");
    simulate->add_option("--out", sim_opt.out_dir, "output directory");

    FitOptions fit_opt;
    auto* fit = app.add_subcommand("fit", "run the MFM-ZIP sampler");
    fit->add_option("--counts", fit_opt.counts, "counts CSV or .bin cache")->required();
    fit->add_option("--design", fit_opt.design, "design CSV")->required();
    fit->add_option("--out", fit_opt.out_dir, "output directory");
    add_fit_flags(fit, fit_opt);

    SummarizeOptions sum_opt;
    auto* summarize = app.add_subcommand("summarize", "Dahl partition and posterior summaries");
    summarize->add_option("--trace", sum_opt.traces, "trace NDJSON (repeatable)")->required();
    summarize->add_option("--counts", sum_opt.counts, "counts file for player ids");
    summarize->add_option("--out", sum_opt.out_dir, "output directory");

    EvalOptions eval_opt;
    auto* eval = app.add_subcommand("eval", "Rand index of predictions against truth");
    eval->add_option("--truth", eval_opt.truth, "truth partition CSV")->required();
    eval->add_option("--pred", eval_opt.preds, "name=partition.csv (repeatable)")->required();
    eval->add_option("--out", eval_opt.out, "also write the table here");

    PlotdataOptions plot_opt;
    auto* plotdata = app.add_subcommand("plotdata", "long-format grid dumps for plotting");
    plotdata->add_option("mode", plot_opt.what, "counts | basis | partition")->required();
    plotdata->add_option("--counts", plot_opt.counts, "counts file");
    plotdata->add_option("--basis", plot_opt.basis, "basis CSV");
    plotdata->add_option("--partition", plot_opt.partition, "partition CSV");
    plotdata->add_option("--player", plot_opt.player, "player id (counts mode)");
    plotdata->add_option("--nx", plot_opt.nx, "grid blocks along x");
    plotdata->add_option("--ny", plot_opt.ny, "grid blocks along y");
    plotdata->add_option("--out", plot_opt.out, "output CSV")->required();

    PipelineOptions pipe_opt;
    auto* pipeline = app.add_subcommand("pipeline", "ingest -> basis -> fit -> summarize -> eval");
    pipeline->add_option("--shots", pipe_opt.shots, "raw shots CSV");
    pipeline->add_option("--counts", pipe_opt.counts, "precomputed counts");
    pipeline->add_option("--hist-shots", pipe_opt.hist_shots, "historical shots for the basis");
    pipeline->add_option("--design", pipe_opt.design_path, "design CSV");
    pipeline->add_flag("--reflect", pipe_opt.reflect, "fold full-court coordinates");
    pipeline->add_option("--min-attempts", pipe_opt.min_attempts, "minimum shots per player");
    pipeline->add_option("--exclude-players", pipe_opt.exclude_players,
                         "file of player ids to drop");
    pipeline->add_option("--sim-type", pipe_opt.sim_type,
                         "simulate instead of ingesting: balanced | imbalanced")
        ->check(CLI::IsMember({"balanced", "imbalanced"}));
    pipeline->add_option("--sim-scale", pipe_opt.sim_scale, "paper | desk")
        ->check(CLI::IsMember({"paper", "desk"}));
    pipeline->add_option("--rank", pipe_opt.rank, "basis rank");
    pipeline->add_option("--bandwidth", pipe_opt.bandwidth, "KDE bandwidth");
    pipeline->add_option("--truth", pipe_opt.truth, "truth partition for eval");
    pipeline->add_option("--out", pipe_opt.out_dir, "output directory");
    pipeline->add_option("--seed", pipe_opt.seed, "master seed");
    add_fit_flags(pipeline, pipe_opt.fit, /*own_seed=*/false);

    try {
        std::vector<std::string> args = expand_config(argc, argv);
        std::reverse(args.begin(), args.end()); // CLI11 wants a reversed vector
        app.parse(std::move(args));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const io_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (*basis)
            cmd_basis(basis_opt);
        else if (*simulate)
            cmd_simulate(sim_opt);
        else if (*fit)
            cmd_fit(fit_opt);
        else if (*summarize)
            cmd_summarize(sum_opt);
        else if (*eval)
            cmd_eval(eval_opt);
        else if (*plotdata)
            cmd_plotdata(plot_opt);
        else if (*pipeline)
            cmd_pipeline(pipe_opt);
    } catch (const io_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
