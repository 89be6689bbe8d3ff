#include "dabridge/bridge_math.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "dabridge/rng.hpp"

namespace dabridge {

namespace {

constexpr int kQuadraturePanels = 4096;

void require_time_in_unit(double t, const char* what) {
    if (!(t >= 0.0 && t <= 1.0)) {
        throw std::domain_error(std::string(what) + ": t=" + std::to_string(t) +
                                " outside [0, 1]");
    }
}

void require_time_interior(double t, const char* what) {
    if (!(t >= kTimeEps && t <= 1.0 - kTimeEps)) {
        throw std::domain_error(std::string(what) + ": t=" + std::to_string(t) +
                                " outside [eps, 1-eps]");
    }
}

double quadrature_variance(double t, const std::function<double(double)>& g) {
    if (t <= 0.0 || t >= 1.0) return 0.0;  // pinned endpoints
    const double h = t / kQuadraturePanels;
    auto f = [&](double s) {
        const double gs = g(s);
        const double d = 1.0 - s;
        return gs * gs / (d * d);
    };
    double acc = 0.5 * (f(0.0) + f(t));
    for (int i = 1; i < kQuadraturePanels; ++i) acc += f(i * h);
    const double integral = acc * h;
    const double one_minus_t = 1.0 - t;
    return one_minus_t * one_minus_t * integral;
}

}  // namespace

BridgeSchedule BridgeSchedule::make(int steps) { return make(steps, nullptr); }

BridgeSchedule BridgeSchedule::make(int steps, std::function<double(double)> noise_std) {
    if (steps < 1) throw std::invalid_argument("BridgeSchedule: T must be >= 1");
    BridgeSchedule s;
    s.T = steps;
    s.g = std::move(noise_std);
    s.marginal_var_table.resize(steps + 1);
    s.noise_scale_table.resize(steps + 1);
    for (int t = 0; t <= steps; ++t) {
        if (s.unit_g()) {
            // t*(T-t) stays exact in 64-bit integers for any sane T.
            const std::int64_t prod =
                static_cast<std::int64_t>(t) * static_cast<std::int64_t>(steps - t);
            s.marginal_var_table[t] =
                static_cast<double>(prod) / (static_cast<double>(steps) * steps);
            s.noise_scale_table[t] = std::sqrt(static_cast<double>(prod)) / steps;
        } else {
            s.marginal_var_table[t] = quadrature_variance(s.time_of(t), s.g);
            s.noise_scale_table[t] = std::sqrt(s.marginal_var_table[t]);
        }
    }
    return s;
}

double marginal_variance(double t, const BridgeSchedule& schedule) {
    require_time_in_unit(t, "marginal_variance");
    if (schedule.unit_g()) return t * (1.0 - t);
    return quadrature_variance(t, schedule.g);
}

double discrete_noise_scale(int t_index, const BridgeSchedule& schedule) {
    if (t_index < 0 || t_index > schedule.T) {
        throw std::domain_error("discrete_noise_scale: t_index=" + std::to_string(t_index) +
                                " outside [0, T=" + std::to_string(schedule.T) + "]");
    }
    return schedule.noise_scale_table[t_index];
}

namespace {

Vec marginal_impl(const Vec& x0, const Vec& y, double t, double noise_scale, const Vec& noise) {
    require_same_dim(x0, y, "sample_marginal");
    require_same_dim(x0, noise, "sample_marginal");
    Vec out(x0.size());
    const double a = 1.0 - t;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = a * x0[i] + t * y[i] + noise_scale * noise[i];
    }
    require_finite(out, "sample_marginal");
    return out;
}

}  // namespace

Vec sample_marginal(const Vec& x0, const Vec& y, double t, const Vec& noise,
                    const BridgeSchedule& schedule) {
    require_time_in_unit(t, "sample_marginal");
    return marginal_impl(x0, y, t, std::sqrt(marginal_variance(t, schedule)), noise);
}

Vec sample_marginal_discrete(const Vec& x0, const Vec& y, int t_index, const Vec& noise,
                             const BridgeSchedule& schedule) {
    const double scale = discrete_noise_scale(t_index, schedule);
    return marginal_impl(x0, y, schedule.time_of(t_index), scale, noise);
}

Vec bridge_score(const Vec& x_t, const Vec& x0, const Vec& y, double t,
                 const BridgeSchedule& schedule) {
    require_time_interior(t, "bridge_score");
    require_same_dim(x_t, x0, "bridge_score");
    require_same_dim(x_t, y, "bridge_score");
    const double variance = marginal_variance(t, schedule);
    const double a = 1.0 - t;
    Vec out(x_t.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = -(x_t[i] - a * x0[i] - t * y[i]) / variance;
    }
    require_finite(out, "bridge_score");
    return out;
}

Vec forward_drift(const Vec& x, const Vec& y, double t) {
    if (!(t < 1.0 - kTimeEps)) {
        throw std::domain_error("forward_drift: t=" + std::to_string(t) +
                                " at or beyond the t=1 singularity");
    }
    require_same_dim(x, y, "forward_drift");
    const double inv = 1.0 / (1.0 - t);
    Vec out(x.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = -(x[i] - y[i]) * inv;
    return out;
}

std::vector<BridgeState> simulate_forward_sde(const Vec& x0, const Vec& y,
                                              const BridgeSchedule& schedule,
                                              std::uint64_t rng_seed) {
    if (schedule.T < 2) throw std::invalid_argument("simulate_forward_sde: T must be >= 2");
    require_same_dim(x0, y, "simulate_forward_sde");
    require_finite(x0, "simulate_forward_sde x0");
    require_finite(y, "simulate_forward_sde y");

    RngStream rng(rng_seed, "forward-sde");
    const double dt = schedule.dt();
    const double sqrt_dt = std::sqrt(dt);

    std::vector<BridgeState> path;
    path.reserve(schedule.T + 1);
    path.push_back({x0, 0});

    Vec x = x0;
    for (int k = 0; k < schedule.T - 1; ++k) {
        const double t = schedule.time_of(k);
        const Vec drift = forward_drift(x, y, t);
        const double g = schedule.unit_g() ? 1.0 : schedule.g(t);
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] += drift[i] * dt + g * sqrt_dt * rng.gauss();
        }
        require_finite(x, "simulate_forward_sde step");
        path.push_back({x, k + 1});
    }
    // The t = (T-1)/T step would land on the singular endpoint; the process
    // is pinned there by construction, so assign it exactly.
    path.push_back({y, schedule.T});
    return path;
}

}  // namespace dabridge
