#include "dabridge/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dabridge/io.hpp"
#include "dabridge/rng.hpp"

namespace dabridge {

PairedDataset gen_gaussian_pairs(std::size_t n, int dim, double mu0, double sigma0, double offset,
                                 std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("gen_gaussian_pairs: need n >= 1");
    if (dim <= 0) throw std::invalid_argument("gen_gaussian_pairs: dim must be positive");
    if (!(sigma0 > 0.0)) throw std::invalid_argument("gen_gaussian_pairs: sigma0 must be > 0");

    RngStream rng(seed, "gaussian-pairs");
    PairedDataset ds;
    ds.dim = dim;
    ds.name = "gaussian";
    ds.generator_seed = seed;
    ds.samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        PairedSample s;
        s.x0.resize(dim);
        s.y.resize(dim);
        for (int d = 0; d < dim; ++d) {
            s.x0[d] = mu0 + sigma0 * rng.gauss();
            s.y[d] = s.x0[d] + offset;
        }
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

Vec twomoons_apply_map(const Vec& x0) {
    return {kTwoMoonsMap[0] * x0[0] + kTwoMoonsMap[1] * x0[1],
            kTwoMoonsMap[2] * x0[0] + kTwoMoonsMap[3] * x0[1]};
}

Vec twomoons_invert_map(const Vec& y) {
    const double det = kTwoMoonsMap[0] * kTwoMoonsMap[3] - kTwoMoonsMap[1] * kTwoMoonsMap[2];
    return {(kTwoMoonsMap[3] * y[0] - kTwoMoonsMap[1] * y[1]) / det,
            (-kTwoMoonsMap[2] * y[0] + kTwoMoonsMap[0] * y[1]) / det};
}

PairedDataset gen_twomoons_pairs(std::size_t n, double noise_std, std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("gen_twomoons_pairs: need n >= 1");
    if (noise_std < 0.0) throw std::invalid_argument("gen_twomoons_pairs: noise_std must be >= 0");

    constexpr double kPi = 3.14159265358979323846264338327950288;
    RngStream rng(seed, "twomoons-pairs");
    PairedDataset ds;
    ds.dim = 2;
    ds.name = "twomoons";
    ds.generator_seed = seed;
    ds.samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double phi = kPi * rng.uniform();
        Vec x0(2);
        if (i % 2 == 0) {
            x0 = {std::cos(phi), std::sin(phi)};
        } else {
            // Second arc: unit circle around (1, 0.5), lower half.
            x0 = {1.0 - std::cos(phi), 0.5 - std::sin(phi)};
        }
        if (noise_std > 0.0) {
            x0[0] += noise_std * rng.gauss();
            x0[1] += noise_std * rng.gauss();
        }
        ds.samples.push_back({x0, twomoons_apply_map(x0)});
    }
    return ds;
}

Vec box_blur(const Vec& image, int side, int radius) {
    if (side <= 0) throw std::invalid_argument("box_blur: side must be positive");
    if (radius < 0) throw std::invalid_argument("box_blur: radius must be >= 0");
    if (image.size() != static_cast<std::size_t>(side) * side) {
        throw ShapeError("box_blur: image size does not match side*side");
    }
    if (radius == 0) return image;

    auto clamp_idx = [side](int i) { return std::clamp(i, 0, side - 1); };
    const double norm = 1.0 / ((2 * radius + 1) * (2 * radius + 1));
    Vec out(image.size());
    for (int r = 0; r < side; ++r) {
        for (int c = 0; c < side; ++c) {
            double acc = 0.0;
            for (int dr = -radius; dr <= radius; ++dr) {
                const int rr = clamp_idx(r + dr);
                for (int dc = -radius; dc <= radius; ++dc) {
                    acc += image[static_cast<std::size_t>(rr) * side + clamp_idx(c + dc)];
                }
            }
            out[static_cast<std::size_t>(r) * side + c] = acc * norm;
        }
    }
    return out;
}

PairedDataset gen_blur_pairs(std::size_t n, int side, int blur_radius, std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("gen_blur_pairs: need n >= 1");
    if (side < 4 || side > 32) throw std::invalid_argument("gen_blur_pairs: side must be in [4, 32]");
    if (blur_radius < 0) throw std::invalid_argument("gen_blur_pairs: blur_radius must be >= 0");

    RngStream rng(seed, "blur-pairs");
    PairedDataset ds;
    ds.dim = side * side;
    ds.name = "blur";
    ds.generator_seed = seed;
    ds.samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Vec x0(static_cast<std::size_t>(side) * side, rng.uniform());  // background rectangle
        const int rects = static_cast<int>(rng.uniform_int(2, 4));
        for (int k = 1; k < rects; ++k) {
            const int r0 = static_cast<int>(rng.uniform_int(0, side - 1));
            const int r1 = static_cast<int>(rng.uniform_int(0, side - 1));
            const int c0 = static_cast<int>(rng.uniform_int(0, side - 1));
            const int c1 = static_cast<int>(rng.uniform_int(0, side - 1));
            const double value = rng.uniform();
            for (int r = std::min(r0, r1); r <= std::max(r0, r1); ++r) {
                for (int c = std::min(c0, c1); c <= std::max(c0, c1); ++c) {
                    x0[static_cast<std::size_t>(r) * side + c] = value;
                }
            }
        }
        ds.samples.push_back({x0, box_blur(x0, side, blur_radius)});
    }
    return ds;
}

namespace {
constexpr std::uint32_t kDatasetVersion = 1;
}

void save_dataset(const PairedDataset& dataset, const std::filesystem::path& path) {
    if (dataset.samples.empty()) throw std::invalid_argument("save_dataset: empty dataset");
    ByteWriter w;
    w.magic("DABT");
    w.u32(kDatasetVersion);
    w.u32(static_cast<std::uint32_t>(dataset.samples.size()));
    w.u32(static_cast<std::uint32_t>(dataset.dim));
    for (const PairedSample& s : dataset.samples) {
        w.f64_array(s.x0.data(), s.x0.size());
        w.f64_array(s.y.data(), s.y.size());
    }
    write_file(path, w.bytes());
}

PairedDataset load_dataset(const std::filesystem::path& path) {
    ByteReader r(read_file(path));
    r.expect_magic("DABT", "dataset");
    const std::uint32_t version = r.u32();
    if (version != kDatasetVersion) {
        throw FormatError("unsupported dataset version " + std::to_string(version),
                          r.offset() - 4);
    }
    const std::uint32_t count = r.u32();
    const std::uint32_t dim = r.u32();
    if (count == 0) throw FormatError("dataset has zero samples", r.offset() - 8);
    if (dim == 0) throw FormatError("dataset has zero dimension", r.offset() - 4);
    PairedDataset ds;
    ds.dim = static_cast<int>(dim);
    ds.samples.resize(count);
    for (auto& s : ds.samples) {
        s.x0.resize(dim);
        s.y.resize(dim);
        r.f64_array(s.x0.data(), dim);
        r.f64_array(s.y.data(), dim);
    }
    r.expect_end("dataset");
    return ds;
}

}  // namespace dabridge
