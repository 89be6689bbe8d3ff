#include "dabridge/cli_commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "dabridge/eval.hpp"
#include "dabridge/io.hpp"
#include "dabridge/rng.hpp"
#include "dabridge/sampling.hpp"

namespace dabridge::cli {

namespace {

namespace fs = std::filesystem;

void ensure_dir(const fs::path& p) { fs::create_directories(p); }

std::string double_str(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::uint64_t subseed(std::uint64_t master, std::string_view name) {
    return RngStream(master, name).key();
}

int side_of(int dim) {
    const int s = static_cast<int>(std::llround(std::sqrt(static_cast<double>(dim))));
    return (s >= 4 && s * s == dim) ? s : 0;
}

// Runs fn(0..cells-1) on up to `threads` workers. Cells must be independent
// and write only to their own slots.
void parallel_cells(std::size_t cells, int threads, const std::function<void(std::size_t)>& fn) {
    if (threads <= 1 || cells <= 1) {
        for (std::size_t i = 0; i < cells; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

struct ApproxPair {
    const Approximator* eps = nullptr;
    const Approximator* z = nullptr;
};

// Per-input approximators: shared trained checkpoints, or exact per-pair
// oracles in --oracle mode.
class ApproxSource {
public:
    ApproxSource(bool oracle, const fs::path& forward_ckpt, const fs::path& reverse_ckpt,
                 bool need_reverse, const PairedDataset& dataset) {
        if (oracle) {
            for (const PairedSample& s : dataset.samples) {
                forward_oracles_.push_back(std::make_unique<AnalyticForwardOracle>(s.x0));
                reverse_oracles_.push_back(std::make_unique<AnalyticReverseOracle>(s.x0, s.y));
            }
            return;
        }
        if (forward_ckpt.empty()) {
            throw std::invalid_argument("sample: need --forward-ckpt (or --oracle)");
        }
        eps_ = load_checkpoint(forward_ckpt);
        if (eps_->dim() != dataset.dim) {
            throw std::runtime_error("checkpoint dim " + std::to_string(eps_->dim()) +
                                     " != dataset dim " + std::to_string(dataset.dim));
        }
        if (need_reverse) {
            if (reverse_ckpt.empty()) {
                throw std::invalid_argument("sample: dual samplers need --reverse-ckpt");
            }
            z_ = load_checkpoint(reverse_ckpt);
            if (z_->dim() != dataset.dim) {
                throw std::runtime_error("reverse checkpoint dim " + std::to_string(z_->dim()) +
                                         " != dataset dim " + std::to_string(dataset.dim));
            }
        }
    }

    ApproxPair at(std::size_t input_index) const {
        if (!forward_oracles_.empty()) {
            return {forward_oracles_[input_index].get(), reverse_oracles_[input_index].get()};
        }
        return {eps_.get(), z_.get()};
    }

private:
    std::unique_ptr<Approximator> eps_;
    std::unique_ptr<Approximator> z_;
    std::vector<std::unique_ptr<Approximator>> forward_oracles_;
    std::vector<std::unique_ptr<Approximator>> reverse_oracles_;
};

SamplerRun run_sampler(SamplerKind kind, const Vec& y, const ApproxPair& nets,
                       const BridgeSchedule& schedule, std::uint64_t seed,
                       const SamplerOptions& options = {}) {
    switch (kind) {
        case SamplerKind::dual:
            return sample_dual(y, *nets.eps, *nets.z, schedule, seed, options);
        case SamplerKind::dual_ct:
            return sample_dual_ct(y, *nets.eps, *nets.z, schedule, seed, options);
        case SamplerKind::sde:
            return sample_sde(y, *nets.eps, schedule, seed, options);
        case SamplerKind::pf_ode:
            return sample_pf_ode(y, *nets.eps, schedule, options);
    }
    throw std::logic_error("unreachable sampler kind");
}

void write_trajectory_dump(const SamplerRun& run, int T, std::uint64_t seed,
                           const fs::path& base) {
    ByteWriter w;
    for (const BridgeState& s : run.trajectory) w.f64_array(s.x.data(), s.x.size());
    write_file(fs::path(base).concat(".bin"), w.bytes());
    std::ofstream meta(fs::path(base).concat(".txt"));
    meta << "sampler=" << sampler_name(run.kind) << '\n'
         << "T=" << T << '\n'
         << "seed=" << seed << '\n'
         << "dim=" << run.y.size() << '\n'
         << "states=" << run.trajectory.size() << '\n';
}

// Metric rows for one (sampler, steps) cell given outputs[trial][input].
std::vector<MetricsRow> cell_rows(const std::string& sampler, int steps,
                                  const std::vector<std::vector<Vec>>& outputs,
                                  const std::vector<Vec>& gt, int side) {
    const int trials = static_cast<int>(outputs.size());
    const std::size_t inputs = gt.size();
    double std_acc = 0.0;
    if (trials >= 2) {
        std::vector<Vec> per_input(trials);
        for (std::size_t i = 0; i < inputs; ++i) {
            for (int k = 0; k < trials; ++k) per_input[k] = outputs[k][i];
            std_acc += trial_std(per_input);
        }
        std_acc /= static_cast<double>(inputs);
    }
    std::vector<MetricsRow> rows;
    for (int k = 0; k < trials; ++k) {
        MetricsRow row;
        row.sampler = sampler;
        row.steps = steps;
        row.trial = k;
        double psnr_acc = 0.0, ssim_acc = 0.0;
        for (std::size_t i = 0; i < inputs; ++i) {
            psnr_acc += psnr_capped(outputs[k][i], gt[i], 1.0);
            if (side > 0) ssim_acc += ssim(outputs[k][i], gt[i], side);
        }
        row.psnr_db = psnr_acc / static_cast<double>(inputs);
        row.ssim = side > 0 ? ssim_acc / static_cast<double>(inputs)
                            : std::numeric_limits<double>::quiet_NaN();
        row.std_dev = std_acc;
        const MomentDistance md = moment_distance(outputs[k], gt);
        row.mean_gap = md.mean_gap;
        row.cov_gap = md.cov_gap;
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

void Manifest::add(const std::string& key, const std::string& value) {
    entries_.emplace_back(key, value);
}
void Manifest::add(const std::string& key, std::uint64_t value) {
    entries_.emplace_back(key, std::to_string(value));
}
void Manifest::add(const std::string& key, std::int64_t value) {
    entries_.emplace_back(key, std::to_string(value));
}
void Manifest::add(const std::string& key, int value) {
    entries_.emplace_back(key, std::to_string(value));
}
void Manifest::add(const std::string& key, double value) { entries_.emplace_back(key, double_str(value)); }

void Manifest::write(const fs::path& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write manifest: " + path.string());
    for (const auto& [k, v] : entries_) out << k << '=' << v << '\n';
}

int resolve_threads(int requested, std::size_t cells) {
    int n = requested;
    if (n <= 0) {
        if (const char* env = std::getenv("DABRIDGE_THREADS")) {
            n = std::atoi(env);
        }
    }
    if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
    if (n <= 0) n = 1;
    return static_cast<int>(std::min<std::size_t>(n, std::max<std::size_t>(cells, 1)));
}

std::filesystem::path cmd_gen_data(const GenDataArgs& args) {
    PairedDataset ds;
    if (args.task == "gaussian") {
        ds = gen_gaussian_pairs(args.n, args.dim, args.mu0, args.sigma0, args.offset, args.seed);
    } else if (args.task == "twomoons") {
        ds = gen_twomoons_pairs(args.n, args.noise_std, args.seed);
    } else if (args.task == "blur") {
        ds = gen_blur_pairs(args.n, args.side, args.blur_radius, args.seed);
    } else {
        throw std::invalid_argument("unknown task '" + args.task +
                                    "' (available: gaussian, twomoons, blur)");
    }

    const std::string stem = args.name.empty() ? args.task : args.name;
    const fs::path data_dir = args.out_dir / "data";
    ensure_dir(data_dir);
    const fs::path out_path = data_dir / (stem + ".dabt");
    save_dataset(ds, out_path);

    if (args.scatter_csv) {
        std::ofstream csv(data_dir / (stem + ".scatter.csv"));
        for (int d = 0; d < ds.dim; ++d) csv << "x0_" << d << ',';
        for (int d = 0; d < ds.dim; ++d) csv << "y_" << d << (d + 1 < ds.dim ? ',' : '\n');
        for (const PairedSample& s : ds.samples) {
            for (double v : s.x0) csv << format_csv_value(v) << ',';
            for (int d = 0; d < ds.dim; ++d) {
                csv << format_csv_value(s.y[d]) << (d + 1 < ds.dim ? ',' : '\n');
            }
        }
    }

    Manifest m;
    m.add("command", std::string("gen-data"));
    m.add("task", args.task);
    m.add("n", static_cast<std::uint64_t>(args.n));
    m.add("dim", ds.dim);
    if (args.task == "gaussian") {
        m.add("mu0", args.mu0);
        m.add("sigma0", args.sigma0);
        m.add("offset", args.offset);
    }
    if (args.task == "twomoons") m.add("noise_std", args.noise_std);
    if (args.task == "blur") {
        m.add("side", args.side);
        m.add("blur_radius", args.blur_radius);
    }
    m.add("seed", args.seed);
    m.add("output", out_path.string());
    m.write(data_dir / (stem + ".run.txt"));
    return out_path;
}

TrainOutputs cmd_train(const TrainArgs& args) {
    args.config.validate();
    const PairedDataset ds = load_dataset(args.dataset);
    const BridgeSchedule schedule = BridgeSchedule::make(args.config.T);

    const bool do_forward = args.which == "forward" || args.which == "both";
    const bool do_reverse = args.which == "reverse" || args.which == "both";
    if (!do_forward && !do_reverse) {
        throw std::invalid_argument("train: --which must be forward, reverse or both");
    }

    const fs::path ckpt_dir = args.out_dir / "ckpt";
    const fs::path runs_dir = args.out_dir / "runs";
    ensure_dir(ckpt_dir);
    ensure_dir(runs_dir);

    TrainOutputs outputs;
    auto train_one = [&](TrainTarget which) {
        const char* tag = which == TrainTarget::forward ? "forward" : "reverse";
        MlpConfig cfg = MlpConfig::dense(ds.dim, args.net.hidden,
                                         subseed(args.config.seed, std::string("init-") + tag),
                                         args.net.conditional);
        cfg.activation = args.net.activation;
        cfg.time_embedding = args.net.time_embedding;
        cfg.sinusoidal_k = args.net.sinusoidal_k;
        // Rebuild the widths around the (possibly non-scalar) time embedding.
        cfg.layer_widths.front() = cfg.input_dim();
        MlpApproximator net(cfg);
        const TrainResult result = train(ds, net, schedule, args.config, which);

        const fs::path ckpt = ckpt_dir / (std::string(tag) + ".dabr");
        save_checkpoint(net, ckpt);
        std::ofstream curve(runs_dir / (std::string("loss_") + tag + ".csv"));
        write_loss_curve_csv(curve, result.curve);
        if (which == TrainTarget::forward) {
            outputs.forward_ckpt = ckpt;
        } else {
            outputs.reverse_ckpt = ckpt;
        }
    };
    if (do_forward) train_one(TrainTarget::forward);
    if (do_reverse) train_one(TrainTarget::reverse);

    Manifest m;
    m.add("command", std::string("train"));
    m.add("dataset", args.dataset.string());
    m.add("which", args.which);
    m.add("batch_size", args.config.batch_size);
    m.add("steps", args.config.steps);
    m.add("learning_rate", args.config.learning_rate);
    m.add("optimizer", std::string(args.config.optimizer == OptimizerKind::sgd ? "sgd" : "adam"));
    m.add("loss_norm",
          std::string(args.config.loss_norm == LossNorm::l2_squared ? "l2_squared" : "l1"));
    m.add("seed", args.config.seed);
    m.add("T", args.config.T);
    {
        std::ostringstream widths;
        for (std::size_t i = 0; i < args.net.hidden.size(); ++i) {
            widths << (i ? "," : "") << args.net.hidden[i];
        }
        m.add("hidden", widths.str());
    }
    m.add("activation", std::string(args.net.activation == Activation::tanh ? "tanh" : "relu"));
    m.add("time_embedding", std::string(args.net.time_embedding == TimeEmbedding::scalar_append
                                            ? "scalar-append"
                                            : "sinusoidal"));
    m.add("conditional", args.net.conditional ? 1 : 0);
    m.write(runs_dir / "train.run.txt");
    return outputs;
}

std::filesystem::path cmd_sample(const SampleArgs& args) {
    const PairedDataset ds = load_dataset(args.dataset);
    const SamplerKind kind = sampler_from_name(args.sampler);
    const bool need_reverse = kind == SamplerKind::dual || kind == SamplerKind::dual_ct;
    if (args.trials < 1) throw std::invalid_argument("sample: trials must be >= 1");

    const ApproxSource nets(args.oracle, args.forward_ckpt, args.reverse_ckpt, need_reverse, ds);
    const BridgeSchedule schedule = BridgeSchedule::make(args.T);

    const std::size_t inputs =
        args.max_inputs == 0 ? ds.samples.size() : std::min(args.max_inputs, ds.samples.size());

    const fs::path run_dir = args.out_dir / "runs" / args.tag;
    ensure_dir(run_dir);

    RngStream root(args.seed, "sample-cmd");
    std::vector<std::vector<Vec>> outputs(args.trials);
    for (int trial = 0; trial < args.trials; ++trial) {
        RngStream trial_rng = root.substream(static_cast<std::uint64_t>(trial));
        outputs[trial].reserve(inputs);
        PairedDataset trial_out;
        trial_out.dim = ds.dim;
        trial_out.name = "outputs";
        for (std::size_t i = 0; i < inputs; ++i) {
            SamplerOptions opt;
            opt.record_trajectory = args.dump_trajectory;
            const std::uint64_t run_seed = trial_rng.substream(i).key();
            SamplerRun run = run_sampler(kind, ds.samples[i].y, nets.at(i), schedule, run_seed, opt);
            if (args.dump_trajectory) {
                std::ostringstream base;
                base << "trajectory_trial" << trial << "_input" << i;
                write_trajectory_dump(run, args.T, run_seed, run_dir / base.str());
            }
            trial_out.samples.push_back({run.x0_hat, ds.samples[i].x0});
            outputs[trial].push_back(std::move(run.x0_hat));
        }
        std::ostringstream name;
        name << "outputs_trial" << trial << ".dabt";
        save_dataset(trial_out, run_dir / name.str());
    }

    std::vector<Vec> gt;
    for (std::size_t i = 0; i < inputs; ++i) gt.push_back(ds.samples[i].x0);
    const auto rows = cell_rows(sampler_name(kind), args.T, outputs, gt, side_of(ds.dim));

    const fs::path csv_path = run_dir / "metrics.csv";
    std::ofstream csv(csv_path);
    write_metrics_csv(csv, rows);

    Manifest m;
    m.add("command", std::string("sample"));
    m.add("dataset", args.dataset.string());
    m.add("sampler", args.sampler);
    m.add("oracle", args.oracle ? 1 : 0);
    if (!args.oracle) {
        m.add("forward_ckpt", args.forward_ckpt.string());
        if (need_reverse) m.add("reverse_ckpt", args.reverse_ckpt.string());
    }
    m.add("T", args.T);
    m.add("trials", args.trials);
    m.add("inputs", static_cast<std::uint64_t>(inputs));
    m.add("seed", args.seed);
    m.write(run_dir / "run.txt");
    return csv_path;
}

std::filesystem::path cmd_eval(const EvalArgs& args) {
    const PairedDataset pairs = load_dataset(args.pairs);
    int side = args.side;
    if (side == 0) side = side_of(pairs.dim);

    std::vector<MetricsRow> rows;
    for (std::size_t i = 0; i < pairs.samples.size(); ++i) {
        MetricsRow row;
        row.sampler = args.label;
        row.steps = 0;
        row.trial = static_cast<int>(i);
        row.psnr_db = psnr_capped(pairs.samples[i].x0, pairs.samples[i].y, 1.0);
        row.ssim = side > 0 ? ssim(pairs.samples[i].x0, pairs.samples[i].y, side)
                            : std::numeric_limits<double>::quiet_NaN();
        rows.push_back(std::move(row));
    }

    fs::path out = args.out_csv;
    if (out.empty()) out = args.pairs.parent_path() / (args.pairs.stem().string() + ".metrics.csv");
    std::ofstream csv(out);
    write_metrics_csv(csv, rows);
    return out;
}

std::filesystem::path cmd_sweep(const SweepArgs& args) {
    const PairedDataset ds = load_dataset(args.dataset);
    const ApproxSource nets(args.oracle, args.forward_ckpt, args.reverse_ckpt, true, ds);
    const BridgeSchedule schedule = BridgeSchedule::make(args.T);

    const fs::path tables_dir = args.out_dir / "tables";
    ensure_dir(tables_dir);

    // The sweep helper runs one pair of approximators against the whole
    // holdout; per-pair oracle mode dispatches per input below instead.
    std::vector<MetricsRow> rows;
    const SweepMode mode = args.early_stop ? SweepMode::early_stop : SweepMode::rediscretize;
    const int threads = resolve_threads(args.threads, args.steps.size());
    std::vector<std::vector<MetricsRow>> cell(args.steps.size());
    parallel_cells(args.steps.size(), threads, [&](std::size_t c) {
        if (args.oracle) {
            const int s = args.steps[c];
            const BridgeSchedule local =
                mode == SweepMode::rediscretize ? BridgeSchedule::make(s) : schedule;
            RngStream root(args.seed, "sweep");
            std::vector<std::vector<Vec>> outputs(args.trials);
            for (int trial = 0; trial < args.trials; ++trial) {
                RngStream trial_rng = root.substream(static_cast<std::uint64_t>(s))
                                          .substream(static_cast<std::uint64_t>(trial));
                for (std::size_t i = 0; i < ds.samples.size(); ++i) {
                    SamplerOptions opt;
                    if (mode == SweepMode::early_stop) opt.stop_at = s;
                    const ApproxPair pair = nets.at(i);
                    outputs[trial].push_back(sample_dual(ds.samples[i].y, *pair.eps, *pair.z,
                                                         local, trial_rng.substream(i).key(), opt)
                                                 .x0_hat);
                }
            }
            std::vector<Vec> gt;
            for (const auto& sample : ds.samples) gt.push_back(sample.x0);
            cell[c] = cell_rows("dual", s, outputs, gt, side_of(ds.dim));
        } else {
            const ApproxPair pair = nets.at(0);
            cell[c] = step_count_sweep(ds, *pair.eps, *pair.z, schedule, {args.steps[c]},
                                       args.trials, args.seed, side_of(ds.dim), mode);
        }
    });
    for (auto& c : cell) rows.insert(rows.end(), c.begin(), c.end());

    const fs::path csv_path = tables_dir / "sweep.csv";
    std::ofstream csv(csv_path);
    write_metrics_csv(csv, rows);

    Manifest m;
    m.add("command", std::string("sweep"));
    m.add("dataset", args.dataset.string());
    m.add("oracle", args.oracle ? 1 : 0);
    m.add("T", args.T);
    {
        std::ostringstream steps;
        for (std::size_t i = 0; i < args.steps.size(); ++i) {
            steps << (i ? "," : "") << args.steps[i];
        }
        m.add("steps", steps.str());
    }
    m.add("trials", args.trials);
    m.add("mode", std::string(args.early_stop ? "early-stop" : "rediscretize"));
    m.add("seed", args.seed);
    m.write(tables_dir / "sweep.run.txt");
    return csv_path;
}

ReproTableOutputs cmd_repro_table(const ReproTableArgs& args) {
    const fs::path data_dir = args.out_dir / "data";
    const fs::path ckpt_dir = args.out_dir / "ckpt";
    const fs::path runs_dir = args.out_dir / "runs";
    const fs::path tables_dir = args.out_dir / "tables";
    for (const auto& d : {data_dir, ckpt_dir, runs_dir, tables_dir}) ensure_dir(d);

    // Data.
    const PairedDataset train_ds = gen_blur_pairs(args.n_train, args.side, args.blur_radius,
                                                  subseed(args.master_seed, "data-train"));
    const PairedDataset holdout = gen_blur_pairs(args.n_holdout, args.side, args.blur_radius,
                                                 subseed(args.master_seed, "data-holdout"));
    save_dataset(train_ds, data_dir / "train.dabt");
    save_dataset(holdout, data_dir / "holdout.dabt");

    // Networks.
    TrainConfig tc = args.train;
    tc.seed = args.master_seed;
    const BridgeSchedule schedule = BridgeSchedule::make(tc.T);

    auto make_net = [&](const char* tag) {
        MlpConfig cfg = MlpConfig::dense(train_ds.dim, args.net.hidden,
                                         subseed(args.master_seed, std::string("init-") + tag),
                                         args.net.conditional);
        cfg.activation = args.net.activation;
        cfg.time_embedding = args.net.time_embedding;
        cfg.sinusoidal_k = args.net.sinusoidal_k;
        cfg.layer_widths.front() = cfg.input_dim();
        return MlpApproximator(cfg);
    };
    MlpApproximator eps_net = make_net("forward");
    MlpApproximator z_net = make_net("reverse");
    {
        const TrainResult fr = train(train_ds, eps_net, schedule, tc, TrainTarget::forward);
        std::ofstream c(runs_dir / "loss_forward.csv");
        write_loss_curve_csv(c, fr.curve);
        const TrainResult rr = train(train_ds, z_net, schedule, tc, TrainTarget::reverse);
        std::ofstream c2(runs_dir / "loss_reverse.csv");
        write_loss_curve_csv(c2, rr.curve);
    }
    save_checkpoint(eps_net, ckpt_dir / "forward.dabr");
    save_checkpoint(z_net, ckpt_dir / "reverse.dabr");

    // Step-count table (dual sampler at each count, trials per count).
    std::vector<int> sweep_steps = args.sweep_steps;
    if (std::find(sweep_steps.begin(), sweep_steps.end(), tc.T) == sweep_steps.end()) {
        sweep_steps.push_back(tc.T);
    }
    std::sort(sweep_steps.begin(), sweep_steps.end());
    const int side = args.side;
    ReproTableOutputs out;
    {
        const int threads = resolve_threads(args.threads, sweep_steps.size());
        std::vector<std::vector<MetricsRow>> cells(sweep_steps.size());
        parallel_cells(sweep_steps.size(), threads, [&](std::size_t c) {
            cells[c] = step_count_sweep(holdout, eps_net, z_net, schedule, {sweep_steps[c]},
                                        args.trials, subseed(args.master_seed, "sweep"), side);
        });
        std::vector<MetricsRow> rows;
        for (auto& c : cells) rows.insert(rows.end(), c.begin(), c.end());
        out.steps_table = tables_dir / "table_steps.csv";
        std::ofstream csv(out.steps_table);
        write_metrics_csv(csv, rows);
    }

    // Sampler-comparison table: dual at few steps against the two baselines
    // at many steps, every cell sampled `trials` times per input.
    {
        struct Cell {
            SamplerKind kind;
            int steps;
        };
        const std::vector<Cell> cells = {{SamplerKind::dual, args.dual_steps},
                                         {SamplerKind::sde, args.baseline_steps},
                                         {SamplerKind::pf_ode, args.baseline_steps}};
        std::vector<Vec> gt;
        for (const auto& s : holdout.samples) gt.push_back(s.x0);

        const std::size_t n_jobs = cells.size() * static_cast<std::size_t>(args.trials);
        std::vector<std::vector<std::vector<Vec>>> outputs(cells.size());
        for (auto& per_cell : outputs) per_cell.resize(args.trials);
        const int threads = resolve_threads(args.threads, n_jobs);
        const std::uint64_t table_seed = subseed(args.master_seed, "table-samplers");
        parallel_cells(n_jobs, threads, [&](std::size_t job) {
            const std::size_t c = job / args.trials;
            const int trial = static_cast<int>(job % args.trials);
            const BridgeSchedule local = BridgeSchedule::make(cells[c].steps);
            RngStream cell_rng =
                RngStream(table_seed, sampler_name(cells[c].kind)).substream(trial);
            auto& slot = outputs[c][trial];
            slot.reserve(holdout.samples.size());
            for (std::size_t i = 0; i < holdout.samples.size(); ++i) {
                const ApproxPair pair{&eps_net, &z_net};
                slot.push_back(run_sampler(cells[c].kind, holdout.samples[i].y, pair, local,
                                           cell_rng.substream(i).key())
                                   .x0_hat);
            }
        });

        std::vector<MetricsRow> rows;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            auto cell = cell_rows(sampler_name(cells[c].kind), cells[c].steps, outputs[c], gt, side);
            rows.insert(rows.end(), cell.begin(), cell.end());
        }
        out.samplers_table = tables_dir / "table_samplers.csv";
        std::ofstream csv(out.samplers_table);
        write_metrics_csv(csv, rows);
    }

    Manifest m;
    m.add("command", std::string("repro-table"));
    m.add("side", args.side);
    m.add("blur_radius", args.blur_radius);
    m.add("n_train", static_cast<std::uint64_t>(args.n_train));
    m.add("n_holdout", static_cast<std::uint64_t>(args.n_holdout));
    m.add("train_steps", args.train.steps);
    m.add("batch_size", args.train.batch_size);
    m.add("learning_rate", args.train.learning_rate);
    m.add("T", args.train.T);
    {
        std::ostringstream steps;
        for (std::size_t i = 0; i < sweep_steps.size(); ++i) {
            steps << (i ? "," : "") << sweep_steps[i];
        }
        m.add("sweep_steps", steps.str());
    }
    m.add("trials", args.trials);
    m.add("dual_steps", args.dual_steps);
    m.add("baseline_steps", args.baseline_steps);
    m.add("master_seed", args.master_seed);
    m.write(tables_dir / "repro.run.txt");
    return out;
}

}  // namespace dabridge::cli
