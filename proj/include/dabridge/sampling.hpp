#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dabridge/approximator.hpp"
#include "dabridge/bridge_math.hpp"
#include "dabridge/datasets.hpp"
#include "dabridge/eval.hpp"
#include "dabridge/vec.hpp"

namespace dabridge {

enum class SamplerKind { dual, dual_ct, sde, pf_ode };

std::string sampler_name(SamplerKind kind);
SamplerKind sampler_from_name(const std::string& name);

struct SamplerOptions {
    bool record_trajectory = false;
    bool record_noise = false;            // per-step draws (sde only)
    std::optional<Vec> fixed_initial_z;   // test hook: pins the one dual draw
    bool zero_noise = false;              // test hook: sde without injected noise
    int stop_at = 1;                      // dual early stop: return the x0 estimate
                                          // computed at this time index
};

struct SamplerRun {
    SamplerKind kind = SamplerKind::dual;
    Vec y;
    Vec x0_hat;                        // final output
    Vec x1;                            // integration state the final estimate was read from
    std::vector<BridgeState> trajectory;  // filled when record_trajectory is set
    Vec initial_z;                     // the single draw consumed by dual / dual-ct
    std::vector<Vec> noise_draws;      // filled when record_noise is set (sde)
    int steps_used = 0;
};

// Deterministic dual-approximator sampler. Walks t = T..1; per step the
// forward net gives the running x0 estimate, the reverse net replaces the
// reverse-time noise increment (a fresh draw only at t = T), and the state
// update is
//   x_{t-1} = (1 - 1/t) x_t + y/(t-1) - x0_hat/(t(t-1)) - U_{t+1} + t/(t-1) U_t
// with U values rebuilt from the closed-form marginal. The t = 1 iteration
// only reads off x0_hat = x_1 - eps(x_1, 1): its interior update would
// divide by t-1 = 0.
SamplerRun sample_dual(const Vec& y, const Approximator& eps_net, const Approximator& z_net,
                       const BridgeSchedule& schedule, std::uint64_t rng_seed,
                       const SamplerOptions& options = {});

// Variant with the update coefficients from the continuous-time derivation,
//   x_{t-1} = (1 - 1/t) x_t + y/t - U_{t+1} + (1 + 1/t) U_t,
// run for t = T-1..2 after the explicit first step
//   x_{T-1} = y - eps(y, T)/T - z/sqrt(T).
SamplerRun sample_dual_ct(const Vec& y, const Approximator& eps_net, const Approximator& z_net,
                          const BridgeSchedule& schedule, std::uint64_t rng_seed,
                          const SamplerOptions& options = {});

// Stochastic baseline: Euler steps of the reverse SDE with a fresh draw per
// step,
//   x_{t-1} = x_t + ((x_t - y)/(1 - t) + score) dt - sqrt(dt) z_t,
// score from the closed-form marginal with x0 replaced by the running
// estimate.
SamplerRun sample_sde(const Vec& y, const Approximator& eps_net, const BridgeSchedule& schedule,
                      std::uint64_t rng_seed, const SamplerOptions& options = {});

// Deterministic baseline: same drift with the score term halved and no
// noise. Consumes no randomness.
SamplerRun sample_pf_ode(const Vec& y, const Approximator& eps_net,
                         const BridgeSchedule& schedule, const SamplerOptions& options = {});

enum class SweepMode {
    rediscretize,  // run the dual sampler on a fresh s-step schedule
    early_stop,    // run the full schedule, read the estimate at t_index = s
};

// Benchmark sweep over step counts: runs the dual sampler against every
// held-out pair, trials times with distinct seeds, and reports psnr/ssim
// (means over inputs), the across-trial std, and moment gaps against the
// ground-truth set. side <= 0 disables ssim (reported as nan).
std::vector<MetricsRow> step_count_sweep(const PairedDataset& holdout,
                                         const Approximator& eps_net, const Approximator& z_net,
                                         const BridgeSchedule& schedule,
                                         const std::vector<int>& step_list, int trials,
                                         std::uint64_t seed, int side,
                                         SweepMode mode = SweepMode::rediscretize);

}  // namespace dabridge
