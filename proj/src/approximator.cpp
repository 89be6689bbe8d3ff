#include "dabridge/approximator.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "dabridge/io.hpp"
#include "dabridge/rng.hpp"

namespace dabridge {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

double activate(Activation a, double z) {
    return a == Activation::tanh ? std::tanh(z) : (z > 0.0 ? z : 0.0);
}

double activate_derivative(Activation a, double z) {
    if (a == Activation::tanh) {
        const double th = std::tanh(z);
        return 1.0 - th * th;
    }
    return z > 0.0 ? 1.0 : 0.0;
}

}  // namespace

MlpConfig MlpConfig::dense(int data_dim, std::vector<int> hidden, std::uint64_t init_seed,
                           bool conditional) {
    MlpConfig cfg;
    cfg.data_dim = data_dim;
    cfg.conditional = conditional;
    cfg.init_seed = init_seed;
    cfg.layer_widths.push_back(cfg.input_dim());
    for (int h : hidden) cfg.layer_widths.push_back(h);
    cfg.layer_widths.push_back(data_dim);
    return cfg;
}

MlpApproximator::MlpApproximator(MlpConfig config) : config_(std::move(config)) {
    if (config_.data_dim <= 0) throw std::invalid_argument("MlpConfig: data_dim must be positive");
    if (config_.layer_widths.size() < 2) {
        throw std::invalid_argument("MlpConfig: need at least input and output widths");
    }
    for (int w : config_.layer_widths) {
        if (w <= 0) throw std::invalid_argument("MlpConfig: widths must be positive");
    }
    if (config_.layer_widths.front() != config_.input_dim()) {
        throw std::invalid_argument("MlpConfig: first width " +
                                    std::to_string(config_.layer_widths.front()) +
                                    " != data dim + time dim (+ data dim if conditional) = " +
                                    std::to_string(config_.input_dim()));
    }
    if (config_.layer_widths.back() != config_.data_dim) {
        throw std::invalid_argument("MlpConfig: last width must equal data_dim");
    }
    if (config_.time_embedding == TimeEmbedding::sinusoidal && config_.sinusoidal_k <= 0) {
        throw std::invalid_argument("MlpConfig: sinusoidal_k must be positive");
    }

    const std::size_t layers = config_.layer_widths.size() - 1;
    std::size_t total = 0;
    weight_offsets_.resize(layers);
    bias_offsets_.resize(layers);
    for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t in = config_.layer_widths[l];
        const std::size_t out = config_.layer_widths[l + 1];
        weight_offsets_[l] = total;
        total += in * out;
        bias_offsets_[l] = total;
        total += out;
    }
    params_.assign(total, 0.0);

    RngStream rng(config_.init_seed, "mlp-init");
    for (std::size_t l = 0; l < layers; ++l) {
        if (config_.zero_init_last && l == layers - 1) break;  // stays zero
        const int fan_in = config_.layer_widths[l];
        const double bound = std::sqrt(6.0 / fan_in);
        const std::size_t count =
            static_cast<std::size_t>(fan_in) * config_.layer_widths[l + 1];
        for (std::size_t i = 0; i < count; ++i) {
            params_[weight_offsets_[l] + i] = bound * (2.0 * rng.uniform() - 1.0);
        }
        // biases stay zero
    }
}

void MlpApproximator::set_params(const Vec& p) {
    if (p.size() != params_.size()) {
        throw ShapeError("set_params: expected " + std::to_string(params_.size()) +
                         " parameters, got " + std::to_string(p.size()));
    }
    params_ = p;
}

Vec MlpApproximator::assemble_input(const Vec& x_t, int t_index, int steps, const Vec* y) const {
    if (static_cast<int>(x_t.size()) != config_.data_dim) {
        throw ShapeError("mlp evaluate: x_t has dim " + std::to_string(x_t.size()) +
                         ", model expects " + std::to_string(config_.data_dim));
    }
    if (config_.conditional) {
        if (y == nullptr) throw ShapeError("mlp evaluate: conditional model needs y");
        if (y->size() != x_t.size()) throw ShapeError("mlp evaluate: y dim mismatch");
    }
    const double t = static_cast<double>(t_index) / steps;
    Vec in;
    in.reserve(config_.input_dim());
    in.insert(in.end(), x_t.begin(), x_t.end());
    if (config_.time_embedding == TimeEmbedding::scalar_append) {
        in.push_back(t);
    } else {
        for (int j = 0; j < config_.sinusoidal_k; ++j) {
            const double w = std::ldexp(kPi, j);  // pi * 2^j
            in.push_back(std::sin(w * t));
            in.push_back(std::cos(w * t));
        }
    }
    if (config_.conditional) in.insert(in.end(), y->begin(), y->end());
    return in;
}

Vec MlpApproximator::forward(const Vec& input, MlpTrace* trace) const {
    const std::size_t layers = config_.layer_widths.size() - 1;
    Vec a = input;
    if (trace) trace->activations.push_back(a);
    for (std::size_t l = 0; l < layers; ++l) {
        const int in = config_.layer_widths[l];
        const int out = config_.layer_widths[l + 1];
        const double* w = params_.data() + weight_offsets_[l];
        const double* b = params_.data() + bias_offsets_[l];
        Vec z(out);
        for (int o = 0; o < out; ++o) {
            double acc = b[o];
            const double* row = w + static_cast<std::size_t>(o) * in;
            for (int i = 0; i < in; ++i) acc += row[i] * a[i];
            z[o] = acc;
        }
        const bool last = (l == layers - 1);
        if (!last) {
            if (trace) trace->pre.push_back(z);
            for (double& v : z) v = activate(config_.activation, v);
        }
        a = std::move(z);
        if (trace && !last) trace->activations.push_back(a);
    }
    return a;
}

Vec MlpApproximator::evaluate(const Vec& x_t, int t_index, int steps, const Vec* y) const {
    return forward(assemble_input(x_t, t_index, steps, y), nullptr);
}

Vec MlpApproximator::evaluate_traced(const Vec& x_t, int t_index, int steps, const Vec* y,
                                     MlpTrace& trace) const {
    trace.activations.clear();
    trace.pre.clear();
    return forward(assemble_input(x_t, t_index, steps, y), &trace);
}

Vec MlpApproximator::backward_params(const MlpTrace& trace, const Vec& upstream) const {
    const std::size_t layers = config_.layer_widths.size() - 1;
    if (trace.activations.size() != layers || trace.pre.size() != layers - 1) {
        throw ShapeError("mlp backward: trace does not match architecture");
    }
    if (static_cast<int>(upstream.size()) != config_.layer_widths.back()) {
        throw ShapeError("mlp backward: upstream dim " + std::to_string(upstream.size()) +
                         " != output dim " + std::to_string(config_.layer_widths.back()));
    }

    Vec grads(params_.size(), 0.0);
    Vec delta = upstream;
    for (std::size_t l = layers; l-- > 0;) {
        const int in = config_.layer_widths[l];
        const int out_w = config_.layer_widths[l + 1];
        const Vec& a = trace.activations[l];
        double* gw = grads.data() + weight_offsets_[l];
        double* gb = grads.data() + bias_offsets_[l];
        for (int o = 0; o < out_w; ++o) {
            const double d = delta[o];
            double* row = gw + static_cast<std::size_t>(o) * in;
            for (int i = 0; i < in; ++i) row[i] += d * a[i];
            gb[o] += d;
        }
        if (l == 0) break;
        const double* w = params_.data() + weight_offsets_[l];
        Vec prev(in, 0.0);
        for (int o = 0; o < out_w; ++o) {
            const double d = delta[o];
            const double* row = w + static_cast<std::size_t>(o) * in;
            for (int i = 0; i < in; ++i) prev[i] += d * row[i];
        }
        const Vec& z = trace.pre[l - 1];
        for (int i = 0; i < in; ++i) prev[i] *= activate_derivative(config_.activation, z[i]);
        delta = std::move(prev);
    }
    return grads;
}

Vec MlpApproximator::gradient(const Vec& x_t, int t_index, int steps, const Vec* y,
                              const Vec& upstream) const {
    MlpTrace trace;
    evaluate_traced(x_t, t_index, steps, y, trace);
    return backward_params(trace, upstream);
}

AnalyticForwardOracle::AnalyticForwardOracle(Vec x0) : x0_(std::move(x0)) {
    if (x0_.empty()) throw std::invalid_argument("AnalyticForwardOracle: empty x0");
}

Vec AnalyticForwardOracle::evaluate(const Vec& x_t, int /*t_index*/, int /*steps*/,
                                    const Vec* /*y*/) const {
    require_same_dim(x_t, x0_, "AnalyticForwardOracle");
    Vec out(x_t.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x_t[i] - x0_[i];
    return out;
}

AnalyticReverseOracle::AnalyticReverseOracle(Vec x0, Vec y) : x0_(std::move(x0)), y_(std::move(y)) {
    require_same_dim(x0_, y_, "AnalyticReverseOracle");
    if (x0_.empty()) throw std::invalid_argument("AnalyticReverseOracle: empty pair");
}

Vec AnalyticReverseOracle::evaluate(const Vec& x_t, int t_index, int steps,
                                    const Vec* /*y*/) const {
    if (t_index <= 0 || t_index >= steps) {
        throw std::domain_error("AnalyticReverseOracle: noise scale vanishes at t_index=" +
                                std::to_string(t_index));
    }
    require_same_dim(x_t, x0_, "AnalyticReverseOracle");
    const double t = static_cast<double>(t_index) / steps;
    const double scale =
        std::sqrt(static_cast<double>(static_cast<std::int64_t>(t_index) * (steps - t_index))) /
        steps;
    Vec out(x_t.size());
    const double a = 1.0 - t;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = (x_t[i] - a * x0_[i] - t * y_[i]) / scale;
    }
    return out;
}

namespace {

constexpr std::uint32_t kCheckpointVersion = 1;

void write_vec(ByteWriter& w, const Vec& v) { w.f64_array(v.data(), v.size()); }

Vec read_vec(ByteReader& r, std::size_t n) {
    Vec v(n);
    r.f64_array(v.data(), n);
    return v;
}

}  // namespace

void save_checkpoint(const Approximator& approx, const std::filesystem::path& path) {
    ByteWriter w;
    w.magic("DABR");
    w.u32(kCheckpointVersion);
    w.u32(static_cast<std::uint32_t>(approx.kind()));
    switch (approx.kind()) {
        case ApproxKind::mlp: {
            const auto& mlp = static_cast<const MlpApproximator&>(approx);
            const MlpConfig& c = mlp.config();
            w.u32(static_cast<std::uint32_t>(c.data_dim));
            w.u32(c.conditional ? 1 : 0);
            w.u32(static_cast<std::uint32_t>(c.activation));
            w.u32(static_cast<std::uint32_t>(c.time_embedding));
            w.u32(static_cast<std::uint32_t>(c.sinusoidal_k));
            w.u32(c.zero_init_last ? 1 : 0);
            w.u64(c.init_seed);
            w.u32(static_cast<std::uint32_t>(c.layer_widths.size()));
            for (int width : c.layer_widths) w.u32(static_cast<std::uint32_t>(width));
            w.u64(mlp.param_count());
            w.f64_array(mlp.params().data(), mlp.param_count());
            break;
        }
        case ApproxKind::analytic_forward: {
            const auto& o = static_cast<const AnalyticForwardOracle&>(approx);
            w.u32(static_cast<std::uint32_t>(o.dim()));
            write_vec(w, o.x0());
            break;
        }
        case ApproxKind::analytic_reverse: {
            const auto& o = static_cast<const AnalyticReverseOracle&>(approx);
            w.u32(static_cast<std::uint32_t>(o.dim()));
            write_vec(w, o.x0());
            write_vec(w, o.y());
            break;
        }
    }
    write_file(path, w.bytes());
}

namespace {

std::unique_ptr<Approximator> load_from_reader(ByteReader& r) {
    r.expect_magic("DABR", "checkpoint");
    const std::uint32_t version = r.u32();
    if (version != kCheckpointVersion) {
        throw FormatError("unsupported checkpoint version " + std::to_string(version),
                          r.offset() - 4);
    }
    const std::uint32_t kind = r.u32();
    switch (static_cast<ApproxKind>(kind)) {
        case ApproxKind::mlp: {
            MlpConfig c;
            c.data_dim = static_cast<int>(r.u32());
            c.conditional = r.u32() != 0;
            c.activation = static_cast<Activation>(r.u32());
            c.time_embedding = static_cast<TimeEmbedding>(r.u32());
            c.sinusoidal_k = static_cast<int>(r.u32());
            c.zero_init_last = r.u32() != 0;
            c.init_seed = r.u64();
            const std::uint32_t n_widths = r.u32();
            c.layer_widths.resize(n_widths);
            for (auto& width : c.layer_widths) width = static_cast<int>(r.u32());
            const std::uint64_t n_params = r.u64();
            auto mlp = std::make_unique<MlpApproximator>(c);
            if (n_params != mlp->param_count()) {
                throw FormatError("checkpoint parameter count " + std::to_string(n_params) +
                                      " does not match architecture (" +
                                      std::to_string(mlp->param_count()) + ")",
                                  r.offset() - 8);
            }
            Vec p(n_params);
            r.f64_array(p.data(), n_params);
            mlp->set_params(p);
            r.expect_end("checkpoint");
            return mlp;
        }
        case ApproxKind::analytic_forward: {
            const std::uint32_t dim = r.u32();
            Vec x0 = read_vec(r, dim);
            r.expect_end("checkpoint");
            return std::make_unique<AnalyticForwardOracle>(std::move(x0));
        }
        case ApproxKind::analytic_reverse: {
            const std::uint32_t dim = r.u32();
            Vec x0 = read_vec(r, dim);
            Vec y = read_vec(r, dim);
            r.expect_end("checkpoint");
            return std::make_unique<AnalyticReverseOracle>(std::move(x0), std::move(y));
        }
        default:
            throw FormatError("unknown checkpoint kind tag " + std::to_string(kind),
                              r.offset() - 4);
    }
}

}  // namespace

std::unique_ptr<Approximator> load_checkpoint(const std::filesystem::path& path) {
    ByteReader r(read_file(path));
    return load_from_reader(r);
}

}  // namespace dabridge
