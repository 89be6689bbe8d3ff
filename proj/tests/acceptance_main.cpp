// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria 5-7 run the committed reference configuration (the
// repro-table defaults), including their trainings.

#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "dabridge/cli_commands.hpp"
#include "dabridge/io.hpp"
#include "dabridge/sampling.hpp"

using namespace dabridge;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

class Criterion {
public:
    Criterion(int index, std::string name) : index_(index), name_(std::move(name)) {
        start_ = std::chrono::steady_clock::now();
    }

    void check(bool ok, const std::string& what) {
        if (!ok) {
            failed_ = true;
            details_.push_back(what);
        }
    }

    void note(const std::string& what) { notes_.push_back(what); }

    ~Criterion() {
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        std::ostringstream line;
        line << (failed_ ? "[FAIL]" : "[PASS]") << " C" << index_ << " " << name_ << " ("
             << std::fixed << std::setprecision(1) << secs << " s)";
        for (const auto& n : notes_) line << "\n       note: " << n;
        for (const auto& d : details_) line << "\n       failed: " << d;
        std::cout << line.str() << std::endl;
        if (failed_) ++g_failures;
    }

private:
    int index_;
    std::string name_;
    bool failed_ = false;
    std::vector<std::string> details_;
    std::vector<std::string> notes_;
    std::chrono::steady_clock::time_point start_;
};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

bool bit_equal(const Vec& a, const Vec& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

struct TrainedPair {
    MlpApproximator eps;
    MlpApproximator z;
};

// Reference-config training on the blur toy task (shared by criteria 5-6).
TrainedPair train_reference(const PairedDataset& train_ds, std::uint64_t seed) {
    const cli::ReproTableArgs ref;  // committed defaults
    TrainConfig tc = ref.train;
    tc.seed = seed;
    const BridgeSchedule schedule = BridgeSchedule::make(tc.T);
    auto build = [&](const char* tag) {
        MlpConfig cfg = MlpConfig::dense(train_ds.dim, ref.net.hidden,
                                         RngStream(seed, std::string("init-") + tag).key());
        return MlpApproximator(cfg);
    };
    TrainedPair pair{build("forward"), build("reverse")};
    train(train_ds, pair.eps, schedule, tc, TrainTarget::forward);
    train(train_ds, pair.z, schedule, tc, TrainTarget::reverse);
    return pair;
}

// ---------------------------------------------------------------------------

void criterion_1_bridge_law() {
    Criterion c(1, "bridge-law moments (closed form + Euler simulation)");
    const BridgeSchedule schedule = BridgeSchedule::make(1000);
    const Vec x0{2.0};
    const Vec y{4.0};
    const int n = 100000;

    // Closed-form marginal.
    {
        RngStream rng(101, "acc-marginal");
        Vec noise(1);
        for (double t : {0.1, 0.5, 0.9}) {
            double sum = 0, sq = 0;
            for (int i = 0; i < n; ++i) {
                rng.fill_gauss(noise);
                const Vec v = sample_marginal(x0, y, t, noise, schedule);
                sum += v[0];
                sq += v[0] * v[0];
            }
            const double mean = sum / n;
            const double var = sq / n - mean * mean;
            const double expect_mean = (1 - t) * x0[0] + t * y[0];
            const double expect_var = t * (1 - t);
            const double se_mean = std::sqrt(expect_var / n);
            const double se_var = expect_var * std::sqrt(2.0 / (n - 1));
            c.check(std::abs(mean - expect_mean) <= 3 * se_mean,
                    "marginal mean at t=" + fmt(t) + ": " + fmt(mean) + " vs " + fmt(expect_mean));
            c.check(std::abs(var - expect_var) <= 3 * se_var,
                    "marginal var at t=" + fmt(t) + ": " + fmt(var) + " vs " + fmt(expect_var));
        }
    }

    // Euler-Maruyama forward simulation, T = 1000, moments within 2%.
    {
        const int indices[3] = {100, 500, 900};
        double sum[3] = {0, 0, 0}, sq[3] = {0, 0, 0};
        for (int i = 0; i < n; ++i) {
            const auto path = simulate_forward_sde(x0, y, schedule, 500000 + i);
            for (int k = 0; k < 3; ++k) {
                const double v = path[indices[k]].x[0];
                sum[k] += v;
                sq[k] += v * v;
            }
        }
        for (int k = 0; k < 3; ++k) {
            const double t = indices[k] / 1000.0;
            const double mean = sum[k] / n;
            const double var = sq[k] / n - mean * mean;
            const double expect_mean = (1 - t) * x0[0] + t * y[0];
            const double expect_var = t * (1 - t);
            c.check(std::abs(mean - expect_mean) <= 0.02 * std::abs(expect_mean),
                    "euler mean at t=" + fmt(t) + ": " + fmt(mean) + " vs " + fmt(expect_mean));
            c.check(std::abs(var - expect_var) <= 0.02 * expect_var,
                    "euler var at t=" + fmt(t) + ": " + fmt(var) + " vs " + fmt(expect_var));
        }
    }
}

void criterion_2_score() {
    Criterion c(2, "score matches finite differences of the log-density");
    const BridgeSchedule schedule = BridgeSchedule::make(100);
    RngStream rng(202, "acc-score");
    const double h = 1e-4;
    for (int trial = 0; trial < 20; ++trial) {
        const double t = 0.05 + 0.9 * rng.uniform();
        const int dim = 4;
        Vec x0(dim), y(dim), x(dim);
        for (int i = 0; i < dim; ++i) {
            x0[i] = rng.gauss();
            y[i] = rng.gauss();
            x[i] = (1 - t) * x0[i] + t * y[i] + rng.gauss();
        }
        const double variance = t * (1 - t);
        auto logp = [&](const Vec& p) {
            double acc = 0;
            for (int i = 0; i < dim; ++i) {
                const double d = p[i] - ((1 - t) * x0[i] + t * y[i]);
                acc += d * d;
            }
            return -acc / (2 * variance);
        };
        const Vec analytic = bridge_score(x, x0, y, t, schedule);
        Vec fd(dim);
        for (int i = 0; i < dim; ++i) {
            Vec hi = x, lo = x;
            hi[i] += h;
            lo[i] -= h;
            fd[i] = (logp(hi) - logp(lo)) / (2 * h);
        }
        const double rel =
            l2_distance(analytic, fd) / std::max(std::sqrt(squared_norm(fd)), 1e-12);
        c.check(rel <= 1e-5, "relative error " + fmt(rel) + " at t=" + fmt(t));
    }
}

void criterion_3_gradient() {
    Criterion c(3, "network gradients match central differences");
    MlpConfig cfg;
    cfg.data_dim = 2;
    cfg.layer_widths = {3, 4, 2};  // 2-dim data + time scalar, 4 hidden, 2 out
    cfg.init_seed = 303;
    cfg.zero_init_last = false;
    MlpApproximator net(cfg);
    RngStream rng(303, "acc-grad");
    const double h = 1e-5;
    for (int trial = 0; trial < 10; ++trial) {
        Vec params(net.param_count());
        for (auto& p : params) p = 0.5 * rng.gauss();
        net.set_params(params);
        const Vec x{rng.gauss(), rng.gauss()};
        const Vec upstream{rng.gauss(), rng.gauss()};
        const int t = 1 + static_cast<int>(rng.uniform_int(0, 8));

        const Vec analytic = net.gradient(x, t, 10, nullptr, upstream);
        Vec fd(net.param_count());
        for (std::size_t i = 0; i < params.size(); ++i) {
            Vec hi = params, lo = params;
            hi[i] += h;
            lo[i] -= h;
            net.set_params(hi);
            const double fh = dot(net.evaluate(x, t, 10), upstream);
            net.set_params(lo);
            const double fl = dot(net.evaluate(x, t, 10), upstream);
            fd[i] = (fh - fl) / (2 * h);
        }
        net.set_params(params);
        const double rel =
            l2_distance(analytic, fd) / std::max(std::sqrt(squared_norm(fd)), 1e-12);
        c.check(rel <= 1e-4, "relative error " + fmt(rel) + " at point " + std::to_string(trial));
    }
}

void criterion_4_oracle_end_to_end() {
    Criterion c(4, "oracle end-to-end exactness of all samplers");
    const Vec x0{0.35, -0.6, 0.8};
    const Vec y{1.1, 0.4, -0.2};
    AnalyticForwardOracle eps(x0);
    AnalyticReverseOracle z(x0, y);

    for (int T : {3, 100}) {
        const BridgeSchedule s = BridgeSchedule::make(T);
        const double err_dual = max_abs_diff(sample_dual(y, eps, z, s, 404).x0_hat, x0);
        c.check(err_dual <= 1e-6, "dual T=" + std::to_string(T) + " error " + fmt(err_dual));
        const double err_ct = max_abs_diff(sample_dual_ct(y, eps, z, s, 404).x0_hat, x0);
        c.check(err_ct <= 1e-6, "dual-ct T=" + std::to_string(T) + " error " + fmt(err_ct));
    }

    // The probability-flow baseline converges at first order: measured on
    // the terminal integration state (the read-off through the exact
    // forward oracle is exact at any T by construction).
    const auto run100 = sample_pf_ode(y, eps, BridgeSchedule::make(100));
    const auto run1000 = sample_pf_ode(y, eps, BridgeSchedule::make(1000));
    c.check(max_abs_diff(run100.x0_hat, x0) <= 1e-6, "pf-ode T=100 read-off not exact");
    const double e100 = l2_distance(run100.x1, x0);
    const double e1000 = l2_distance(run1000.x1, x0);
    c.check(e1000 < e100, "pf-ode state error did not shrink: " + fmt(e1000) + " vs " + fmt(e100));
    c.note("pf-ode terminal-state error " + fmt(e100) + " (T=100) -> " + fmt(e1000) + " (T=1000)");
}

void criterion_5_determinism_hierarchy(const TrainedPair& nets, const PairedDataset& holdout) {
    Criterion c(5, "determinism hierarchy on the trained blur task");
    const cli::ReproTableArgs ref;
    const BridgeSchedule dual_sched = BridgeSchedule::make(ref.dual_steps);
    const BridgeSchedule base_sched = BridgeSchedule::make(ref.baseline_steps);
    const int trials = 5;

    double std_dual = 0, std_sde = 0, std_pf = 0;
    const std::size_t inputs = holdout.samples.size();
    std::vector<Vec> per_trial(trials);
    for (std::size_t i = 0; i < inputs; ++i) {
        const Vec& y = holdout.samples[i].y;
        for (int k = 0; k < trials; ++k) {
            per_trial[k] =
                sample_dual(y, nets.eps, nets.z, dual_sched, 1000 * i + k).x0_hat;
        }
        std_dual += trial_std(per_trial);
        for (int k = 0; k < trials; ++k) {
            per_trial[k] = sample_sde(y, nets.eps, base_sched, 2000 * i + k).x0_hat;
        }
        std_sde += trial_std(per_trial);
        for (int k = 0; k < trials; ++k) {
            per_trial[k] = sample_pf_ode(y, nets.eps, base_sched).x0_hat;
        }
        std_pf += trial_std(per_trial);
    }
    std_dual /= inputs;
    std_sde /= inputs;
    std_pf /= inputs;

    c.check(std_pf == 0.0, "pf-ode std not exactly zero: " + fmt(std_pf));
    c.check(std_dual <= 0.1 * std_sde,
            "std_dual=" + fmt(std_dual) + " not <= 0.1 * std_sde=" + fmt(std_sde));
    c.note("std_dual=" + fmt(std_dual) + " std_sde=" + fmt(std_sde) + " std_pf=" + fmt(std_pf));

    // All of the dual sampler's trial variation traces to the one draw made
    // at t = T: pinning it makes runs bit-identical across seeds.
    SamplerOptions fixed;
    fixed.fixed_initial_z = Vec(holdout.dim, 0.25);
    const Vec& y0 = holdout.samples[0].y;
    const SamplerRun first = sample_dual(y0, nets.eps, nets.z, dual_sched, 1, fixed);
    bool all_equal = true;
    for (std::uint64_t seed = 2; seed <= 5; ++seed) {
        const SamplerRun again = sample_dual(y0, nets.eps, nets.z, dual_sched, seed, fixed);
        all_equal = all_equal && bit_equal(first.x0_hat, again.x0_hat);
    }
    c.check(all_equal, "fixed initial draw did not give bit-identical outputs");
}

void criterion_6_faithfulness(const std::vector<TrainedPair>& seeds,
                              const PairedDataset& holdout) {
    Criterion c(6, "faithfulness ordering: dual vs pf-ode vs sde");
    const cli::ReproTableArgs ref;
    const BridgeSchedule dual_sched = BridgeSchedule::make(ref.dual_steps);
    const BridgeSchedule base_sched = BridgeSchedule::make(ref.baseline_steps);

    double psnr_dual = 0, psnr_pf = 0, psnr_sde = 0;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
        const TrainedPair& nets = seeds[s];
        double pd = 0, pp = 0, ps = 0;
        for (std::size_t i = 0; i < holdout.samples.size(); ++i) {
            const Vec& y = holdout.samples[i].y;
            const Vec& gt = holdout.samples[i].x0;
            pd += psnr_capped(sample_dual(y, nets.eps, nets.z, dual_sched, 7000 + i).x0_hat, gt,
                              1.0);
            pp += psnr_capped(sample_pf_ode(y, nets.eps, base_sched).x0_hat, gt, 1.0);
            ps += psnr_capped(sample_sde(y, nets.eps, base_sched, 8000 + i).x0_hat, gt, 1.0);
        }
        const double n = static_cast<double>(holdout.samples.size());
        psnr_dual += pd / n;
        psnr_pf += pp / n;
        psnr_sde += ps / n;
    }
    psnr_dual /= seeds.size();
    psnr_pf /= seeds.size();
    psnr_sde /= seeds.size();

    c.note("mean psnr: dual=" + fmt(psnr_dual) + " pf-ode=" + fmt(psnr_pf) +
           " sde=" + fmt(psnr_sde));
    c.check(psnr_dual >= psnr_pf, "dual did not beat pf-ode");
    c.check(psnr_dual >= psnr_sde, "dual did not beat sde");
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        rows.push_back(std::move(fields));
    }
    return rows;
}

void criterion_7_step_sweep(const fs::path& scratch) {
    Criterion c(7, "step-sweep artifact: schema, determinism, dual std bound");
    cli::ReproTableArgs args;  // committed reference configuration
    args.out_dir = scratch / "repro1";
    const auto out1 = cli::cmd_repro_table(args);
    args.out_dir = scratch / "repro2";
    const auto out2 = cli::cmd_repro_table(args);

    // Schema.
    const auto rows = read_csv(out1.steps_table);
    c.check(!rows.empty() && rows[0] ==
                std::vector<std::string>{"sampler", "steps", "trial", "psnr_db", "ssim", "std",
                                         "mean_gap", "cov_gap"},
            "unexpected header in " + out1.steps_table.string());

    // Four step counts (3, 10, 200, T=200 deduplicates to three cells when
    // T is already listed) x trials rows, all for the dual sampler.
    int data_rows = 0;
    bool std_bound = true;
    std::string worst;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        ++data_rows;
        c.check(rows[i][0] == "dual", "unexpected sampler in steps table: " + rows[i][0]);
        const double std_val = std::stod(rows[i][5]);
        if (std_val > 0.02) {
            std_bound = false;
            worst = "steps=" + rows[i][1] + " std=" + rows[i][5];
        }
    }
    c.check(data_rows > 0, "no data rows in steps table");
    c.check(std_bound, "dual std above 0.02 of output scale: " + worst);

    // Determinism under the fixed master seed.
    c.check(read_file(out1.steps_table) == read_file(out2.steps_table),
            "steps table differs between reruns");
    c.check(read_file(out1.samplers_table) == read_file(out2.samplers_table),
            "samplers table differs between reruns");
}

void criterion_8_sde_distribution() {
    Criterion c(8, "sde terminal distribution matches the source distribution");
    const double mu0 = 0.0, sigma0 = 1.0, offset = 2.0;
    const int n = 10000;
    const auto ds = gen_gaussian_pairs(n, 1, mu0, sigma0, offset, 808);
    const BridgeSchedule schedule = BridgeSchedule::make(200);

    double sum_state = 0, sq_state = 0, sum_hat = 0, sq_hat = 0;
    for (int i = 0; i < n; ++i) {
        AnalyticForwardOracle eps(ds.samples[i].x0);
        const SamplerRun run = sample_sde(ds.samples[i].y, eps, schedule, 9000 + i);
        sum_state += run.x1[0];
        sq_state += run.x1[0] * run.x1[0];
        sum_hat += run.x0_hat[0];
        sq_hat += run.x0_hat[0] * run.x0_hat[0];
    }
    const double mean_state = sum_state / n;
    const double var_state = sq_state / n - mean_state * mean_state;
    const double mean_hat = sum_hat / n;
    const double var_hat = sq_hat / n - mean_hat * mean_hat;

    c.note("terminal state: mean=" + fmt(mean_state) + " var=" + fmt(var_state) +
           "; output: mean=" + fmt(mean_hat) + " var=" + fmt(var_hat));
    c.check(std::abs(mean_state - mu0) <= 0.05 * sigma0,
            "terminal mean off: " + fmt(mean_state));
    c.check(std::abs(var_state - sigma0 * sigma0) <= 0.05 * sigma0 * sigma0,
            "terminal variance off: " + fmt(var_state));
    c.check(std::abs(mean_hat - mu0) <= 0.05 * sigma0, "output mean off: " + fmt(mean_hat));
    c.check(std::abs(var_hat - sigma0 * sigma0) <= 0.05 * sigma0 * sigma0,
            "output variance off: " + fmt(var_hat));
}

void criterion_9_formats(const fs::path& scratch) {
    Criterion c(9, "file formats round-trip bit-exactly");
    const fs::path dir = scratch / "formats";
    fs::create_directories(dir);

    // Dataset round-trip.
    const auto ds = gen_blur_pairs(16, 8, 1, 909);
    save_dataset(ds, dir / "a.dabt");
    const auto loaded = load_dataset(dir / "a.dabt");
    save_dataset(loaded, dir / "b.dabt");
    c.check(read_file(dir / "a.dabt") == read_file(dir / "b.dabt"),
            "dataset bytes changed across a round trip");

    // Checkpoint round-trip.
    MlpConfig cfg = MlpConfig::dense(4, {8, 8}, 99);
    cfg.zero_init_last = false;
    MlpApproximator net(cfg);
    save_checkpoint(net, dir / "a.dabr");
    const auto ckpt = load_checkpoint(dir / "a.dabr");
    save_checkpoint(*ckpt, dir / "b.dabr");
    c.check(read_file(dir / "a.dabr") == read_file(dir / "b.dabr"),
            "checkpoint bytes changed across a round trip");

    // Committed golden file.
    const fs::path golden = fs::path(ACCEPTANCE_GOLDEN_DIR) / "blur_n4_side8_r1_seed7.dabt";
    c.check(fs::exists(golden), "golden file missing: " + golden.string());
    if (fs::exists(golden)) {
        const auto gds = load_dataset(golden);
        c.check(gds.dim == 64 && gds.samples.size() == 4, "golden file shape unexpected");
        const auto regen = gen_blur_pairs(4, 8, 1, 7);
        save_dataset(regen, dir / "regen.dabt");
        c.check(read_file(dir / "regen.dabt") == read_file(golden),
                "regenerated bytes differ from the committed golden file");
    }
}

}  // namespace

int main() {
    const fs::path scratch =
        fs::temp_directory_path() / ("dabridge_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(scratch);
    fs::create_directories(scratch);

    try {
        criterion_1_bridge_law();
        criterion_2_score();
        criterion_3_gradient();
        criterion_4_oracle_end_to_end();

        // Shared reference-config training for criteria 5 and 6.
        const cli::ReproTableArgs ref;
        const PairedDataset train_ds = gen_blur_pairs(
            ref.n_train, ref.side, ref.blur_radius, RngStream(1, "data-train").key());
        const PairedDataset holdout = gen_blur_pairs(
            ref.n_holdout, ref.side, ref.blur_radius, RngStream(1, "data-holdout").key());
        std::vector<TrainedPair> seeds;
        for (std::uint64_t s : {1, 2, 3}) seeds.push_back(train_reference(train_ds, s));

        criterion_5_determinism_hierarchy(seeds[0], holdout);
        criterion_6_faithfulness(seeds, holdout);
        criterion_7_step_sweep(scratch);
        criterion_8_sde_distribution();
        criterion_9_formats(scratch);
    } catch (const std::exception& e) {
        std::cout << "[FAIL] acceptance suite aborted: " << e.what() << std::endl;
        ++g_failures;
    }

    std::error_code ec;
    fs::remove_all(scratch, ec);
    if (g_failures > 0) {
        std::cout << g_failures << " criterion(s) failed" << std::endl;
        return 1;
    }
    std::cout << "all criteria passed" << std::endl;
    return 0;
}
