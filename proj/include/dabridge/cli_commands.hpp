#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dabridge/training.hpp"

namespace dabridge::cli {

// Ordered key=value manifest; every command writes one next to its outputs
// so any run can be reproduced from the file alone.
class Manifest {
public:
    void add(const std::string& key, const std::string& value);
    void add(const std::string& key, std::uint64_t value);
    void add(const std::string& key, std::int64_t value);
    void add(const std::string& key, int value);
    void add(const std::string& key, double value);
    void write(const std::filesystem::path& path) const;

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

// Worker cap for independent sweep cells: DABRIDGE_THREADS, else hardware
// concurrency, never more than `cells`.
int resolve_threads(int requested, std::size_t cells);

struct GenDataArgs {
    std::string task;  // gaussian | twomoons | blur
    std::size_t n = 512;
    int dim = 1;             // gaussian
    double mu0 = 0.0;        // gaussian
    double sigma0 = 1.0;     // gaussian
    double offset = 2.0;     // gaussian
    double noise_std = 0.0;  // twomoons
    int side = 8;            // blur
    int blur_radius = 1;     // blur
    std::uint64_t seed = 7;
    std::string name;  // output stem; defaults to the task name
    std::filesystem::path out_dir = "out";
    bool scatter_csv = false;  // also export points as CSV
};

std::filesystem::path cmd_gen_data(const GenDataArgs& args);

struct NetArgs {
    std::vector<int> hidden = {128, 128};
    Activation activation = Activation::tanh;
    TimeEmbedding time_embedding = TimeEmbedding::scalar_append;
    int sinusoidal_k = 4;
    bool conditional = false;
};

struct TrainArgs {
    std::filesystem::path dataset;
    std::string which = "both";  // forward | reverse | both
    TrainConfig config;
    NetArgs net;
    std::filesystem::path out_dir = "out";
};

struct TrainOutputs {
    std::filesystem::path forward_ckpt;
    std::filesystem::path reverse_ckpt;
};

TrainOutputs cmd_train(const TrainArgs& args);

struct SampleArgs {
    std::filesystem::path dataset;  // pairs to sample against (y inputs + GT)
    std::filesystem::path forward_ckpt;
    std::filesystem::path reverse_ckpt;  // dual samplers only
    bool oracle = false;                 // analytic per-pair approximators instead
    std::string sampler = "dual";
    int T = 200;
    int trials = 1;
    std::uint64_t seed = 7;
    std::string tag = "sample";
    std::filesystem::path out_dir = "out";
    bool dump_trajectory = false;
    std::size_t max_inputs = 0;  // 0 = all
};

std::filesystem::path cmd_sample(const SampleArgs& args);  // returns metrics.csv path

struct EvalArgs {
    std::filesystem::path pairs;  // DABT of (output, reference) rows
    int side = 0;                 // 0 = auto (square dims), -1 = disable ssim
    std::string label = "eval";
    std::filesystem::path out_csv;
};

std::filesystem::path cmd_eval(const EvalArgs& args);

struct SweepArgs {
    std::filesystem::path dataset;
    std::filesystem::path forward_ckpt;
    std::filesystem::path reverse_ckpt;
    bool oracle = false;
    int T = 200;
    std::vector<int> steps = {3, 10, 200};
    int trials = 5;
    bool early_stop = false;
    std::uint64_t seed = 7;
    std::filesystem::path out_dir = "out";
    int threads = 0;
};

std::filesystem::path cmd_sweep(const SweepArgs& args);

// Reference configuration of the benchmark tables; the acceptance suite
// runs exactly these defaults.
struct ReproTableArgs {
    int side = 8;
    int blur_radius = 1;
    std::size_t n_train = 512;
    std::size_t n_holdout = 32;
    NetArgs net;
    TrainConfig train;  // seed is overridden by master_seed
    std::vector<int> sweep_steps = {3, 10, 200};
    int trials = 5;
    int dual_steps = 3;        // sampler-comparison table: ours at few steps
    int baseline_steps = 200;  // stochastic/deterministic baselines
    std::uint64_t master_seed = 7;
    std::filesystem::path out_dir = "out";
    int threads = 0;
};

struct ReproTableOutputs {
    std::filesystem::path steps_table;     // sweep over sampling step counts
    std::filesystem::path samplers_table;  // dual vs sde vs pf-ode
};

ReproTableOutputs cmd_repro_table(const ReproTableArgs& args);

}  // namespace dabridge::cli
