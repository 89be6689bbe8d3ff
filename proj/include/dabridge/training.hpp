#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dabridge/approximator.hpp"
#include "dabridge/bridge_math.hpp"
#include "dabridge/datasets.hpp"
#include "dabridge/rng.hpp"
#include "dabridge/vec.hpp"

namespace dabridge {

enum class LossNorm { l2_squared, l1 };
enum class OptimizerKind { sgd, adam };
enum class TrainTarget { forward, reverse };

struct TrainConfig {
    int batch_size = 64;
    int steps = 3000;
    double learning_rate = 1e-3;
    OptimizerKind optimizer = OptimizerKind::adam;
    LossNorm loss_norm = LossNorm::l2_squared;
    std::uint64_t seed = 0;
    int T = 200;

    void validate() const;
};

// Flat key=value config file (comments start with '#').
TrainConfig parse_train_config(std::istream& in);
void write_train_config(std::ostream& out, const TrainConfig& cfg);

struct LossResult {
    double loss = 0.0;
    Vec grads;
};

struct TrainingDivergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One objective sample: t uniform on {1..T}, eps ~ N(0,I), x_t from the
// closed-form marginal; residual x_t - x0 - eps_net(x_t, t). Returns the
// batch-mean loss and, for trainable networks, the matching parameter
// gradient (empty for closed-form approximators).
LossResult forward_loss(std::span<const PairedSample> batch, const Approximator& eps_net,
                        const BridgeSchedule& schedule, RngStream& rng,
                        LossNorm norm = LossNorm::l2_squared);

// Same construction with residual z - z_net(x_t, t). t is drawn uniform on
// {1..T-1}: both endpoints have zero noise scale, where the target is
// unrecoverable.
LossResult reverse_loss(std::span<const PairedSample> batch, const Approximator& z_net,
                        const BridgeSchedule& schedule, RngStream& rng,
                        LossNorm norm = LossNorm::l2_squared);

struct OptimizerState {
    explicit OptimizerState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
    Vec m, v;
    std::int64_t step = 0;
};

// SGD or Adam (beta1=0.9, beta2=0.999, eps=1e-8, bias correction).
void optimizer_step(std::span<double> params, const Vec& grads, OptimizerState& state,
                    const TrainConfig& cfg);

struct LossPoint {
    int step = 0;
    double loss = 0.0;
    std::int64_t wall_ms = 0;
};

struct TrainResult {
    std::vector<LossPoint> curve;  // every 100 steps, starting at step 0
    double final_loss = 0.0;
};

// Runs cfg.steps optimizer steps over with-replacement minibatches.
// Deterministic given (cfg.seed, dataset order); aborts on divergence.
TrainResult train(const PairedDataset& dataset, MlpApproximator& net,
                  const BridgeSchedule& schedule, const TrainConfig& cfg, TrainTarget which);

void write_loss_curve_csv(std::ostream& out, std::span<const LossPoint> curve);

}  // namespace dabridge
