#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dabridge/vec.hpp"

namespace dabridge {

struct PairedSample {
    Vec x0;  // source-domain ground truth
    Vec y;   // conditioning input
};

// All generators are pure functions of their arguments: regenerating with
// the same (name, seed, count) reproduces the same bytes.
struct PairedDataset {
    std::vector<PairedSample> samples;
    int dim = 0;
    std::string name;
    std::uint64_t generator_seed = 0;

    std::size_t size() const { return samples.size(); }
};

// x0 ~ N(mu0, sigma0^2 I), y = x0 + offset. The deterministic pairing keeps
// the population-optimal predictors available in closed form.
PairedDataset gen_gaussian_pairs(std::size_t n, int dim, double mu0, double sigma0, double offset,
                                 std::uint64_t seed);

// Two interleaved half circles in 2-D; y is a fixed invertible linear
// contraction of x0 toward the origin.
PairedDataset gen_twomoons_pairs(std::size_t n, double noise_std, std::uint64_t seed);

// The contraction applied by gen_twomoons_pairs and its exact inverse.
inline constexpr std::array<double, 4> kTwoMoonsMap = {0.55, 0.10, -0.10, 0.55};  // row-major 2x2
Vec twomoons_apply_map(const Vec& x0);
Vec twomoons_invert_map(const Vec& y);

// Random piecewise-constant grayscale patches (2-4 axis-aligned rectangles,
// values in [0,1]); y is the box blur of x0. Row-major side*side vectors.
PairedDataset gen_blur_pairs(std::size_t n, int side, int blur_radius, std::uint64_t seed);

// Box blur with replicated-edge padding; window is (2r+1)^2.
Vec box_blur(const Vec& image, int side, int radius);

// Tensor file ("DABT"): magic, u32 version=1, u32 count, u32 dim, then
// count * 2 * dim little-endian 64-bit floats, x0 row then y row per
// sample. Byte-exact across platforms.
void save_dataset(const PairedDataset& dataset, const std::filesystem::path& path);
PairedDataset load_dataset(const std::filesystem::path& path);

}  // namespace dabridge
