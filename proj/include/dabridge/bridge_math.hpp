#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "dabridge/vec.hpp"

namespace dabridge {

// Continuous-time ops reject t outside [kTimeEps, 1 - kTimeEps] where the
// drift or the score is singular; the marginal itself is well defined on
// the closed interval.
inline constexpr double kTimeEps = 1e-9;

// Time discretization of the pinned diffusion on [0, 1] plus the derived
// per-step tables. Continuous time is always t_index / T. The noise
// amplitude g defaults to 1, in which case the marginal variance is
// t(1-t) in closed form; a general g goes through fixed-grid quadrature.
struct BridgeSchedule {
    int T = 0;
    std::function<double(double)> g;        // empty => g == 1
    std::vector<double> marginal_var_table;  // variance of the marginal at t_index/T
    std::vector<double> noise_scale_table;   // sqrt of the above, index 0..T

    bool unit_g() const { return !g; }
    double dt() const { return 1.0 / static_cast<double>(T); }
    double time_of(int t_index) const { return static_cast<double>(t_index) / T; }

    static BridgeSchedule make(int steps);
    static BridgeSchedule make(int steps, std::function<double(double)> noise_std);
};

// Var[X_t | X_0, Y] = (1-t)^2 * integral_0^t g(s)^2/(1-s)^2 ds.
// Exact t(1-t) when g == 1; composite trapezoid on 4096 fixed panels
// otherwise (accurate away from the t -> 1 endpoint, where the integrand
// is singular).
double marginal_variance(double t, const BridgeSchedule& schedule);

// Per-step noise scale sqrt(t_index * (T - t_index)) / T for unit g.
// The product under the root is formed in integer arithmetic.
double discrete_noise_scale(int t_index, const BridgeSchedule& schedule);

// X_t = (1-t) x0 + t y + sqrt(Var) * noise. The noise vector is caller
// supplied: a unit Gaussian draw in training, a reconstructed estimate in
// sampling.
Vec sample_marginal(const Vec& x0, const Vec& y, double t, const Vec& noise,
                    const BridgeSchedule& schedule);

// Same, with t = t_index / T and the tabulated noise scale, so training
// and sampling agree bit for bit on the grid.
Vec sample_marginal_discrete(const Vec& x0, const Vec& y, int t_index, const Vec& noise,
                             const BridgeSchedule& schedule);

// Gradient of the log marginal density: -(x_t - (1-t) x0 - t y) / Var.
Vec bridge_score(const Vec& x_t, const Vec& x0, const Vec& y, double t,
                 const BridgeSchedule& schedule);

// Drift -(x - y)/(1 - t) of the pinned forward process; singular at t = 1.
Vec forward_drift(const Vec& x, const Vec& y, double t);

struct BridgeState {
    Vec x;
    int t_index = 0;
};

// Euler-Maruyama realization of the forward process, used to validate the
// closed-form marginal. The last step is taken at t = (T-1)/T and the
// endpoint is then pinned to y exactly.
std::vector<BridgeState> simulate_forward_sde(const Vec& x0, const Vec& y,
                                              const BridgeSchedule& schedule,
                                              std::uint64_t rng_seed);

}  // namespace dabridge
