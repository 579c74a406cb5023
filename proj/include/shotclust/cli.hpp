#pragma once

#include "shotclust/sampler.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace shotclust::cli {

/// Resolve the worker count: explicit value, else SHOTCLUST_WORKERS, else
/// the hardware concurrency.
int worker_count(int requested);

/// Run fn(0..tasks-1) on up to `workers` threads. Exceptions are collected
/// and the first one rethrown.
void parallel_for(int tasks, int workers, const std::function<void(int)>& fn);

struct BasisOptions {
    std::string shots;
    std::string out_dir = ".";
    int rank = 5;
    double bandwidth = 2.5;
    int restarts = 5;
    int min_attempts = 0;
    bool reflect = false;
    std::uint64_t seed = 20162017;
    int workers = 0;
};

struct SimulateOptions {
    std::string type = "balanced"; // balanced | imbalanced
    std::string scale = "desk";    // paper | desk
    int replicates = 1;
    std::uint64_t seed = 1;
    std::string design_path; // optional real design
    std::string out_dir = ".";
};

struct FitOptions {
    std::string counts;
    std::string design;
    std::string out_dir = ".";
    FitConfig config;
    std::string k_prior = "shifted";
    int chains = 1;
    int workers = 0;
};

struct SummarizeOptions {
    std::vector<std::string> traces;
    std::string counts; // for player ids (optional)
    std::string out_dir = ".";
};

struct EvalOptions {
    std::string truth;
    std::vector<std::string> preds; // name=path entries
    std::string out; // empty: stdout only
};

struct PlotdataOptions {
    std::string what; // counts | basis | partition
    std::string counts;
    std::string basis;
    std::string partition;
    std::string player;
    std::string out;
    int nx = 47;
    int ny = 25;
};

struct PipelineOptions {
    // data route
    std::string shots;
    std::string counts;
    std::string hist_shots;
    std::string design_path;
    bool reflect = false;
    int min_attempts = 0;
    std::string exclude_players; // file of ids to drop, one per line
    // simulation route
    std::string sim_type;  // balanced | imbalanced (empty: data route)
    std::string sim_scale = "desk";
    // basis settings when built from hist_shots
    int rank = 5;
    double bandwidth = 2.5;
    int restarts = 5;
    // fit + eval
    FitOptions fit;
    std::string truth;
    std::string out_dir = ".";
    std::uint64_t seed = 1;
};

void cmd_basis(const BasisOptions& opt);
void cmd_simulate(const SimulateOptions& opt);
void cmd_fit(const FitOptions& opt);
void cmd_summarize(const SummarizeOptions& opt);
void cmd_eval(const EvalOptions& opt);
void cmd_plotdata(const PlotdataOptions& opt);
void cmd_pipeline(const PipelineOptions& opt);

KPriorForm parse_k_prior(const std::string& name);

/// FNV-1a hash of a string, used for config fingerprints in manifests.
std::uint64_t fnv1a(const std::string& text);

} // namespace shotclust::cli
