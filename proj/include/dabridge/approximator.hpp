#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "dabridge/vec.hpp"

namespace dabridge {

enum class ApproxKind : std::uint32_t { mlp = 0, analytic_forward = 1, analytic_reverse = 2 };

// Common surface of the two trainable networks and their closed-form test
// stand-ins. Continuous time is t_index / steps, so a model trained with
// one schedule can be driven on a re-discretized one. Evaluation is a pure
// function of (inputs, params): identical calls give bit-identical output.
class Approximator {
public:
    virtual ~Approximator() = default;

    virtual ApproxKind kind() const = 0;
    virtual int dim() const = 0;

    // y is only read by conditional models; pass it unconditionally.
    virtual Vec evaluate(const Vec& x_t, int t_index, int steps, const Vec* y = nullptr) const = 0;

    virtual std::span<const double> params() const { return {}; }
};

enum class Activation : std::uint32_t { tanh = 0, relu = 1 };
enum class TimeEmbedding : std::uint32_t { scalar_append = 0, sinusoidal = 1 };

struct MlpConfig {
    int data_dim = 0;
    std::vector<int> layer_widths;  // including input and output widths
    Activation activation = Activation::tanh;
    TimeEmbedding time_embedding = TimeEmbedding::scalar_append;
    int sinusoidal_k = 4;  // frequencies; embedding dim is 2k
    bool conditional = false;
    bool zero_init_last = true;
    std::uint64_t init_seed = 0;

    int time_dim() const {
        return time_embedding == TimeEmbedding::scalar_append ? 1 : 2 * sinusoidal_k;
    }
    int input_dim() const { return data_dim + time_dim() + (conditional ? data_dim : 0); }

    // Fills in the input/output widths around the given hidden sizes.
    static MlpConfig dense(int data_dim, std::vector<int> hidden, std::uint64_t init_seed,
                           bool conditional = false);
};

// Layer inputs and pre-activations captured by a forward pass; feeds the
// backward pass without recomputing.
struct MlpTrace {
    std::vector<Vec> activations;
    std::vector<Vec> pre;
};

// Plain dense network with in-repo reverse-mode gradients. Weights are
// uniform with He-style fan-in scaling; the output layer starts at zero so
// an untrained residual predictor is the identity map on x_t.
class MlpApproximator final : public Approximator {
public:
    explicit MlpApproximator(MlpConfig config);

    ApproxKind kind() const override { return ApproxKind::mlp; }
    int dim() const override { return config_.data_dim; }
    const MlpConfig& config() const { return config_; }

    Vec evaluate(const Vec& x_t, int t_index, int steps, const Vec* y = nullptr) const override;

    Vec evaluate_traced(const Vec& x_t, int t_index, int steps, const Vec* y,
                        MlpTrace& trace) const;

    // Gradient of <output, upstream> with respect to the flat parameter
    // vector, from a captured trace or from scratch.
    Vec backward_params(const MlpTrace& trace, const Vec& upstream) const;
    Vec gradient(const Vec& x_t, int t_index, int steps, const Vec* y,
                 const Vec& upstream) const;

    std::span<const double> params() const override { return params_; }
    std::span<double> mutable_params() { return params_; }
    void set_params(const Vec& p);
    std::size_t param_count() const { return params_.size(); }

private:
    Vec assemble_input(const Vec& x_t, int t_index, int steps, const Vec* y) const;
    Vec forward(const Vec& input, MlpTrace* trace) const;

    MlpConfig config_;
    Vec params_;
    std::vector<std::size_t> weight_offsets_;  // per layer: weights, then biases
    std::vector<std::size_t> bias_offsets_;
};

// Exact stand-in for the forward network on one known pair: returns
// x_t - x0, so x_t minus the prediction recovers x0 exactly.
class AnalyticForwardOracle final : public Approximator {
public:
    explicit AnalyticForwardOracle(Vec x0);

    ApproxKind kind() const override { return ApproxKind::analytic_forward; }
    int dim() const override { return static_cast<int>(x0_.size()); }
    const Vec& x0() const { return x0_; }

    Vec evaluate(const Vec& x_t, int t_index, int steps, const Vec* y = nullptr) const override;

private:
    Vec x0_;
};

// Exact stand-in for the reverse network on one known pair: inverts the
// closed-form marginal and returns the noise vector that generated x_t.
// Undefined at the endpoints where the noise scale vanishes.
class AnalyticReverseOracle final : public Approximator {
public:
    AnalyticReverseOracle(Vec x0, Vec y);

    ApproxKind kind() const override { return ApproxKind::analytic_reverse; }
    int dim() const override { return static_cast<int>(x0_.size()); }
    const Vec& x0() const { return x0_; }
    const Vec& y() const { return y_; }

    Vec evaluate(const Vec& x_t, int t_index, int steps, const Vec* y = nullptr) const override;

private:
    Vec x0_;
    Vec y_;
};

// Checkpoint file ("DABR"): magic, u32 version, u32 kind tag, a config
// block, then the flat parameter vector as little-endian 64-bit floats.
// Round-trips are bit-exact.
void save_checkpoint(const Approximator& approx, const std::filesystem::path& path);
std::unique_ptr<Approximator> load_checkpoint(const std::filesystem::path& path);

}  // namespace dabridge
