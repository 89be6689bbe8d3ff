#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace dabridge {

// Counter-based pseudo-random stream: output i is a pure function of
// (key, i), where the key is derived from a user seed and a stream name.
// Every stochastic operation in this project takes one of these (or a seed
// it builds one from), so runs are reproducible from a single knob and
// independent substreams never share state. Not cryptographic.
//
// Normal variates come from Box-Muller on the counter stream; the C++
// standard library distributions are avoided because their output is
// implementation-defined.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::string_view name);

    std::uint64_t next_u64();

    // Uniform on [0, 1).
    double uniform();

    // Uniform on {lo, ..., hi} inclusive (unbiased via rejection).
    std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi);

    // Standard normal.
    double gauss();
    void fill_gauss(std::span<double> out);

    // Independent child stream; does not advance this stream.
    RngStream substream(std::string_view name) const;
    RngStream substream(std::uint64_t index) const;

    std::uint64_t key() const { return key_; }

private:
    explicit RngStream(std::uint64_t key) : key_(key) {}

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

namespace detail {
std::uint64_t mix64(std::uint64_t x);
std::uint64_t hash_name(std::string_view name);
}  // namespace detail

}  // namespace dabridge
