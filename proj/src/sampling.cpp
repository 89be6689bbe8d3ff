#include "dabridge/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dabridge/rng.hpp"

namespace dabridge {

std::string sampler_name(SamplerKind kind) {
    switch (kind) {
        case SamplerKind::dual: return "dual";
        case SamplerKind::dual_ct: return "dual-ct";
        case SamplerKind::sde: return "sde";
        case SamplerKind::pf_ode: return "pf-ode";
    }
    return "?";
}

SamplerKind sampler_from_name(const std::string& name) {
    if (name == "dual") return SamplerKind::dual;
    if (name == "dual-ct") return SamplerKind::dual_ct;
    if (name == "sde") return SamplerKind::sde;
    if (name == "pf-ode") return SamplerKind::pf_ode;
    throw std::invalid_argument("unknown sampler '" + name +
                                "' (expected dual, dual-ct, sde or pf-ode)");
}

namespace {

void check_state(const Vec& x, int t_index, const char* sampler) {
    if (!all_finite(x)) {
        throw NonFiniteError(std::string(sampler) + ": non-finite state at t_index=" +
                             std::to_string(t_index));
    }
}

Vec draw_initial_z(const SamplerOptions& options, std::uint64_t seed, std::size_t dim) {
    if (options.fixed_initial_z) {
        if (options.fixed_initial_z->size() != dim) {
            throw ShapeError("fixed_initial_z dimension mismatch");
        }
        return *options.fixed_initial_z;
    }
    RngStream rng(seed, "sampler-initial-z");
    Vec z(dim);
    rng.fill_gauss(z);
    return z;
}

// x_hat at time index k rebuilt from the current estimates:
//   (1 - k/T) x0_hat + (k/T) y + B(k) z_hat, then centered by y.
Vec centered_reconstruction(const Vec& x0_hat, const Vec& y, const Vec& z_hat, int k,
                            const BridgeSchedule& schedule) {
    const double t = schedule.time_of(k);
    const double scale = schedule.noise_scale_table[k];
    Vec u(x0_hat.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        u[i] = (1.0 - t) * x0_hat[i] + t * y[i] + scale * z_hat[i] - y[i];
    }
    return u;
}

}  // namespace

SamplerRun sample_dual(const Vec& y, const Approximator& eps_net, const Approximator& z_net,
                       const BridgeSchedule& schedule, std::uint64_t rng_seed,
                       const SamplerOptions& options) {
    if (schedule.T < 3) throw std::invalid_argument("sample_dual: schedule needs T >= 3");
    if (options.stop_at < 1 || options.stop_at > schedule.T) {
        throw std::invalid_argument("sample_dual: stop_at outside [1, T]");
    }
    require_finite(y, "sample_dual y");

    SamplerRun run;
    run.kind = SamplerKind::dual;
    run.y = y;

    Vec x = y;  // state at t_index = T
    if (options.record_trajectory) run.trajectory.push_back({x, schedule.T});

    for (int t = schedule.T; t >= 1; --t) {
        ++run.steps_used;
        Vec x0_hat = x;
        {
            const Vec eps = eps_net.evaluate(x, t, schedule.T, &y);
            for (std::size_t i = 0; i < x0_hat.size(); ++i) x0_hat[i] -= eps[i];
        }
        if (t == options.stop_at || t == 1) {
            run.x1 = x;
            run.x0_hat = std::move(x0_hat);
            break;
        }

        Vec z_hat;
        if (t == schedule.T) {
            z_hat = draw_initial_z(options, rng_seed, y.size());
            run.initial_z = z_hat;
        } else {
            z_hat = z_net.evaluate(x, t, schedule.T, &y);
        }

        const Vec u_next = centered_reconstruction(x0_hat, y, z_hat, t, schedule);
        const Vec u_cur = centered_reconstruction(x0_hat, y, z_hat, t - 1, schedule);

        const double td = static_cast<double>(t);
        const double a_state = 1.0 - 1.0 / td;
        const double a_y = 1.0 / (td - 1.0);
        const double a_x0 = 1.0 / (td * (td - 1.0));
        const double a_u = td / (td - 1.0);
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = a_state * x[i] + a_y * y[i] - a_x0 * x0_hat[i] - u_next[i] + a_u * u_cur[i];
        }
        check_state(x, t - 1, "sample_dual");
        if (options.record_trajectory) run.trajectory.push_back({x, t - 1});
    }
    return run;
}

SamplerRun sample_dual_ct(const Vec& y, const Approximator& eps_net, const Approximator& z_net,
                          const BridgeSchedule& schedule, std::uint64_t rng_seed,
                          const SamplerOptions& options) {
    if (schedule.T < 3) throw std::invalid_argument("sample_dual_ct: schedule needs T >= 3");
    require_finite(y, "sample_dual_ct y");

    SamplerRun run;
    run.kind = SamplerKind::dual_ct;
    run.y = y;
    if (options.record_trajectory) run.trajectory.push_back({y, schedule.T});

    const int T = schedule.T;
    run.initial_z = draw_initial_z(options, rng_seed, y.size());

    // Explicit first step, as in the stochastic model: the iterative update
    // needs a state one index above, which does not exist at t = T.
    Vec x(y.size());
    {
        const Vec eps = eps_net.evaluate(y, T, T, &y);
        const double inv_t = 1.0 / static_cast<double>(T);
        const double inv_sqrt_t = 1.0 / std::sqrt(static_cast<double>(T));
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = y[i] - inv_t * eps[i] - inv_sqrt_t * run.initial_z[i];
        }
    }
    run.steps_used = 1;
    check_state(x, T - 1, "sample_dual_ct");
    if (options.record_trajectory) run.trajectory.push_back({x, T - 1});

    for (int t = T - 1; t >= 2; --t) {
        ++run.steps_used;
        Vec x0_hat = x;
        {
            const Vec eps = eps_net.evaluate(x, t, T, &y);
            for (std::size_t i = 0; i < x0_hat.size(); ++i) x0_hat[i] -= eps[i];
        }
        const Vec z_hat = z_net.evaluate(x, t, T, &y);
        const Vec u_next = centered_reconstruction(x0_hat, y, z_hat, t, schedule);
        const Vec u_cur = centered_reconstruction(x0_hat, y, z_hat, t - 1, schedule);

        const double td = static_cast<double>(t);
        const double a_state = 1.0 - 1.0 / td;
        const double a_y = 1.0 / td;
        const double a_u = 1.0 + 1.0 / td;
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = a_state * x[i] + a_y * y[i] - u_next[i] + a_u * u_cur[i];
        }
        check_state(x, t - 1, "sample_dual_ct");
        if (options.record_trajectory) run.trajectory.push_back({x, t - 1});
    }

    run.x1 = x;
    const Vec eps = eps_net.evaluate(x, 1, T, &y);
    run.x0_hat.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) run.x0_hat[i] = x[i] - eps[i];
    ++run.steps_used;
    return run;
}

namespace {

// Shared Euler walk of the reverse-time dynamics; score_weight 1 with noise
// for the SDE, 1/2 without noise for the probability-flow ODE. Steps t =
// T..2; the output is read at t_index = 1 through the forward net.
SamplerRun reverse_euler(const Vec& y, const Approximator& eps_net,
                         const BridgeSchedule& schedule, std::uint64_t rng_seed,
                         const SamplerOptions& options, double score_weight, bool with_noise,
                         SamplerKind kind) {
    if (schedule.T < 2) throw std::invalid_argument("reverse sampler: schedule needs T >= 2");
    require_finite(y, "reverse sampler y");

    SamplerRun run;
    run.kind = kind;
    run.y = y;
    const int T = schedule.T;
    const double dt = schedule.dt();
    const double sqrt_dt = std::sqrt(dt);
    const char* name = kind == SamplerKind::sde ? "sample_sde" : "sample_pf_ode";

    RngStream rng(rng_seed, "sampler-sde");
    Vec x = y;
    if (options.record_trajectory) run.trajectory.push_back({x, T});
    Vec z(y.size(), 0.0);

    for (int t = T; t >= 2; --t) {
        ++run.steps_used;
        const double tc = std::clamp(schedule.time_of(t), kTimeEps, 1.0 - kTimeEps);
        const double variance = marginal_variance(tc, schedule);
        Vec x0_hat = x;
        {
            const Vec eps = eps_net.evaluate(x, t, T, &y);
            for (std::size_t i = 0; i < x0_hat.size(); ++i) x0_hat[i] -= eps[i];
        }
        if (with_noise && !options.zero_noise) {
            rng.fill_gauss(z);
            if (options.record_noise) run.noise_draws.push_back(z);
        }
        const double inv_gap = 1.0 / (1.0 - tc);
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double score = -(x[i] - (1.0 - tc) * x0_hat[i] - tc * y[i]) / variance;
            double next = x[i] + ((x[i] - y[i]) * inv_gap + score_weight * score) * dt;
            if (with_noise && !options.zero_noise) next -= sqrt_dt * z[i];
            x[i] = next;
        }
        check_state(x, t - 1, name);
        if (options.record_trajectory) run.trajectory.push_back({x, t - 1});
    }

    run.x1 = x;
    const Vec eps = eps_net.evaluate(x, 1, T, &y);
    run.x0_hat.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) run.x0_hat[i] = x[i] - eps[i];
    return run;
}

}  // namespace

SamplerRun sample_sde(const Vec& y, const Approximator& eps_net, const BridgeSchedule& schedule,
                      std::uint64_t rng_seed, const SamplerOptions& options) {
    return reverse_euler(y, eps_net, schedule, rng_seed, options, 1.0, true, SamplerKind::sde);
}

SamplerRun sample_pf_ode(const Vec& y, const Approximator& eps_net,
                         const BridgeSchedule& schedule, const SamplerOptions& options) {
    return reverse_euler(y, eps_net, schedule, /*rng_seed=*/0, options, 0.5, false,
                         SamplerKind::pf_ode);
}

std::vector<MetricsRow> step_count_sweep(const PairedDataset& holdout,
                                         const Approximator& eps_net, const Approximator& z_net,
                                         const BridgeSchedule& schedule,
                                         const std::vector<int>& step_list, int trials,
                                         std::uint64_t seed, int side, SweepMode mode) {
    if (holdout.samples.empty()) throw std::invalid_argument("step_count_sweep: empty holdout");
    if (trials < 1) throw std::invalid_argument("step_count_sweep: trials must be >= 1");
    for (int s : step_list) {
        if (s < 3 || s > schedule.T) {
            throw std::invalid_argument("step_count_sweep: step count " + std::to_string(s) +
                                        " outside [3, T]");
        }
    }

    std::vector<Vec> gt;
    gt.reserve(holdout.samples.size());
    for (const auto& sample : holdout.samples) gt.push_back(sample.x0);

    RngStream root(seed, "sweep");
    std::vector<MetricsRow> rows;
    for (int s : step_list) {
        const BridgeSchedule local =
            mode == SweepMode::rediscretize ? BridgeSchedule::make(s) : schedule;

        // outputs[trial][input]
        std::vector<std::vector<Vec>> outputs(trials);
        for (int trial = 0; trial < trials; ++trial) {
            RngStream trial_rng = root.substream(static_cast<std::uint64_t>(s))
                                      .substream(static_cast<std::uint64_t>(trial));
            outputs[trial].reserve(holdout.samples.size());
            for (std::size_t i = 0; i < holdout.samples.size(); ++i) {
                SamplerOptions opt;
                if (mode == SweepMode::early_stop) opt.stop_at = s;
                const std::uint64_t run_seed = trial_rng.substream(i).key();
                outputs[trial].push_back(
                    sample_dual(holdout.samples[i].y, eps_net, z_net, local, run_seed, opt)
                        .x0_hat);
            }
        }

        // Across-trial std, averaged over inputs.
        double std_acc = 0.0;
        if (trials >= 2) {
            std::vector<Vec> per_input(trials);
            for (std::size_t i = 0; i < holdout.samples.size(); ++i) {
                for (int trial = 0; trial < trials; ++trial) per_input[trial] = outputs[trial][i];
                std_acc += trial_std(per_input);
            }
            std_acc /= static_cast<double>(holdout.samples.size());
        }

        for (int trial = 0; trial < trials; ++trial) {
            MetricsRow row;
            row.sampler = sampler_name(SamplerKind::dual);
            row.steps = s;
            row.trial = trial;
            double psnr_acc = 0.0;
            double ssim_acc = 0.0;
            for (std::size_t i = 0; i < holdout.samples.size(); ++i) {
                psnr_acc += psnr_capped(outputs[trial][i], gt[i], 1.0);
                if (side > 0) ssim_acc += ssim(outputs[trial][i], gt[i], side);
            }
            row.psnr_db = psnr_acc / static_cast<double>(holdout.samples.size());
            row.ssim = side > 0 ? ssim_acc / static_cast<double>(holdout.samples.size())
                                : std::numeric_limits<double>::quiet_NaN();
            row.std_dev = std_acc;
            const MomentDistance md = moment_distance(outputs[trial], gt);
            row.mean_gap = md.mean_gap;
            row.cov_gap = md.cov_gap;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

}  // namespace dabridge
