#include "dabridge/training.hpp"

#include <chrono>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "dabridge/eval.hpp"

namespace dabridge {

void TrainConfig::validate() const {
    if (batch_size <= 0) throw std::invalid_argument("TrainConfig: batch_size must be positive");
    if (steps < 0) throw std::invalid_argument("TrainConfig: steps must be >= 0");
    if (!(learning_rate > 0.0)) {
        throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
    }
    if (T < 2) throw std::invalid_argument("TrainConfig: T must be >= 2");
}

TrainConfig parse_train_config(std::istream& in) {
    TrainConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        // trim
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t\r");
        line = line.substr(first, last - first + 1);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("train config line " + std::to_string(line_no) +
                                        ": expected key=value");
        }
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "batch_size") {
            cfg.batch_size = std::stoi(value);
        } else if (key == "steps") {
            cfg.steps = std::stoi(value);
        } else if (key == "learning_rate") {
            cfg.learning_rate = std::stod(value);
        } else if (key == "optimizer") {
            if (value == "sgd") {
                cfg.optimizer = OptimizerKind::sgd;
            } else if (value == "adam") {
                cfg.optimizer = OptimizerKind::adam;
            } else {
                throw std::invalid_argument("train config: unknown optimizer '" + value + "'");
            }
        } else if (key == "loss_norm") {
            if (value == "l2_squared") {
                cfg.loss_norm = LossNorm::l2_squared;
            } else if (value == "l1") {
                cfg.loss_norm = LossNorm::l1;
            } else {
                throw std::invalid_argument("train config: unknown loss_norm '" + value + "'");
            }
        } else if (key == "seed") {
            cfg.seed = std::stoull(value);
        } else if (key == "T") {
            cfg.T = std::stoi(value);
        } else {
            throw std::invalid_argument("train config: unknown key '" + key + "'");
        }
    }
    cfg.validate();
    return cfg;
}

void write_train_config(std::ostream& out, const TrainConfig& cfg) {
    out << "batch_size=" << cfg.batch_size << '\n';
    out << "steps=" << cfg.steps << '\n';
    out << "learning_rate=" << cfg.learning_rate << '\n';
    out << "optimizer=" << (cfg.optimizer == OptimizerKind::sgd ? "sgd" : "adam") << '\n';
    out << "loss_norm=" << (cfg.loss_norm == LossNorm::l2_squared ? "l2_squared" : "l1") << '\n';
    out << "seed=" << cfg.seed << '\n';
    out << "T=" << cfg.T << '\n';
}

namespace {

bool is_conditional(const Approximator& net) {
    const auto* mlp = dynamic_cast<const MlpApproximator*>(&net);
    return mlp != nullptr && mlp->config().conditional;
}

// Shared body of the two objectives. target = forward: residual
// x_t - x0 - net(x_t, t) against t in {1..T}; target = reverse: residual
// z - net(x_t, t) against t in {1..T-1}.
LossResult objective(std::span<const PairedSample> batch, const Approximator& net,
                     const BridgeSchedule& schedule, RngStream& rng, LossNorm norm,
                     TrainTarget target) {
    if (batch.empty()) throw std::invalid_argument("loss: empty batch");
    const int t_lo = 1;
    const int t_hi = target == TrainTarget::forward ? schedule.T : schedule.T - 1;
    if (t_hi < t_lo) throw std::invalid_argument("loss: schedule too short for objective");

    const auto* mlp = dynamic_cast<const MlpApproximator*>(&net);
    const bool conditional = is_conditional(net);
    const int dim = net.dim();
    const double inv_batch = 1.0 / static_cast<double>(batch.size());

    LossResult result;
    result.grads.assign(mlp ? mlp->param_count() : 0, 0.0);
    Vec noise(dim);
    Vec upstream(dim);
    MlpTrace trace;

    for (const PairedSample& sample : batch) {
        const int t = static_cast<int>(rng.uniform_int(t_lo, t_hi));
        rng.fill_gauss(noise);
        const Vec x_t = sample_marginal_discrete(sample.x0, sample.y, t, noise, schedule);
        const Vec* cond = conditional ? &sample.y : nullptr;

        const Vec value = mlp ? mlp->evaluate_traced(x_t, t, schedule.T, cond, trace)
                              : net.evaluate(x_t, t, schedule.T, cond);
        Vec residual(dim);
        for (int i = 0; i < dim; ++i) {
            const double target_i =
                target == TrainTarget::forward ? x_t[i] - sample.x0[i] : noise[i];
            residual[i] = target_i - value[i];
        }

        double sample_loss = 0.0;
        if (norm == LossNorm::l2_squared) {
            for (int i = 0; i < dim; ++i) {
                sample_loss += residual[i] * residual[i];
                upstream[i] = -2.0 * residual[i] * inv_batch;
            }
        } else {
            for (int i = 0; i < dim; ++i) {
                sample_loss += std::abs(residual[i]);
                upstream[i] =
                    (residual[i] > 0.0 ? -1.0 : (residual[i] < 0.0 ? 1.0 : 0.0)) * inv_batch;
            }
        }
        if (!std::isfinite(sample_loss)) {
            std::ostringstream msg;
            msg << "non-finite loss at t=" << t << " |x_t|=" << std::sqrt(squared_norm(x_t))
                << " |out|=" << std::sqrt(squared_norm(value));
            throw NonFiniteError(msg.str());
        }
        result.loss += sample_loss * inv_batch;

        if (mlp) {
            const Vec g = mlp->backward_params(trace, upstream);
            for (std::size_t i = 0; i < g.size(); ++i) result.grads[i] += g[i];
        }
    }
    return result;
}

}  // namespace

LossResult forward_loss(std::span<const PairedSample> batch, const Approximator& eps_net,
                        const BridgeSchedule& schedule, RngStream& rng, LossNorm norm) {
    return objective(batch, eps_net, schedule, rng, norm, TrainTarget::forward);
}

LossResult reverse_loss(std::span<const PairedSample> batch, const Approximator& z_net,
                        const BridgeSchedule& schedule, RngStream& rng, LossNorm norm) {
    return objective(batch, z_net, schedule, rng, norm, TrainTarget::reverse);
}

void optimizer_step(std::span<double> params, const Vec& grads, OptimizerState& state,
                    const TrainConfig& cfg) {
    if (params.size() != grads.size() || params.size() != state.m.size()) {
        throw ShapeError("optimizer_step: parameter/gradient/state size mismatch");
    }
    if (cfg.optimizer == OptimizerKind::sgd) {
        for (std::size_t i = 0; i < params.size(); ++i) {
            params[i] -= cfg.learning_rate * grads[i];
        }
        return;
    }
    constexpr double beta1 = 0.9;
    constexpr double beta2 = 0.999;
    constexpr double eps = 1e-8;
    state.step += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * grads[i];
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * grads[i] * grads[i];
        const double m_hat = state.m[i] / bc1;
        const double v_hat = state.v[i] / bc2;
        params[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + eps);
    }
}

TrainResult train(const PairedDataset& dataset, MlpApproximator& net,
                  const BridgeSchedule& schedule, const TrainConfig& cfg, TrainTarget which) {
    cfg.validate();
    if (dataset.samples.empty()) throw std::invalid_argument("train: empty dataset");
    if (dataset.dim != net.dim()) {
        throw ShapeError("train: dataset dim " + std::to_string(dataset.dim) +
                         " != model dim " + std::to_string(net.dim()));
    }

    RngStream root(cfg.seed, which == TrainTarget::forward ? "train-forward" : "train-reverse");
    RngStream batch_rng = root.substream("batch");
    RngStream loss_rng = root.substream("loss");

    OptimizerState state(net.param_count());
    std::vector<PairedSample> batch(cfg.batch_size);
    TrainResult out;
    const auto t0 = std::chrono::steady_clock::now();

    for (int step = 0; step < cfg.steps; ++step) {
        for (int b = 0; b < cfg.batch_size; ++b) {
            const auto idx = batch_rng.uniform_int(0, dataset.samples.size() - 1);
            batch[b] = dataset.samples[idx];
        }
        LossResult res;
        try {
            res = which == TrainTarget::forward
                      ? forward_loss(batch, net, schedule, loss_rng, cfg.loss_norm)
                      : reverse_loss(batch, net, schedule, loss_rng, cfg.loss_norm);
        } catch (const NonFiniteError& e) {
            throw TrainingDivergence("step " + std::to_string(step) + ": " + e.what());
        }
        if (!std::isfinite(res.loss) || res.loss > 1e6) {
            throw TrainingDivergence("step " + std::to_string(step) + ": loss diverged (" +
                                     std::to_string(res.loss) + ")");
        }
        if (step % 100 == 0) {
            const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                std::chrono::steady_clock::now() - t0)
                                .count();
            out.curve.push_back({step, res.loss, ms});
        }
        out.final_loss = res.loss;
        optimizer_step(net.mutable_params(), res.grads, state, cfg);
    }
    return out;
}

void write_loss_curve_csv(std::ostream& out, std::span<const LossPoint> curve) {
    out << "step,loss,wall_ms\n";
    for (const LossPoint& p : curve) {
        out << p.step << ',' << format_csv_value(p.loss) << ',' << p.wall_ms << '\n';
    }
}

}  // namespace dabridge
