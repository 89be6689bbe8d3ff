#include "dabridge/rng.hpp"

#include <cmath>

namespace dabridge {

namespace detail {

// SplitMix64 finalizer (Steele, Lea, Flood 2014 / Stafford mix 13).
std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// FNV-1a over the name bytes.
std::uint64_t hash_name(std::string_view name) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : name) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace detail

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::uint64_t derive_key(std::uint64_t parent, std::uint64_t salt) {
    return detail::mix64(parent ^ detail::mix64(salt ^ 0xa0761d6478bd642fULL));
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::string_view name)
    : key_(derive_key(detail::mix64(seed), detail::hash_name(name))) {}

std::uint64_t RngStream::next_u64() { return detail::mix64(key_ ^ detail::mix64(counter_++)); }

double RngStream::uniform() {
    // 53 mantissa bits -> [0, 1).
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::uniform_int(std::uint64_t lo, std::uint64_t hi) {
    const std::uint64_t span = hi - lo + 1;  // hi >= lo assumed; span==0 means full range
    if (span == 0) return next_u64();
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t v;
    do {
        v = next_u64();
    } while (v >= limit);
    return lo + v % span;
}

double RngStream::gauss() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // u1 in (0, 1] so log() is finite.
    const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(kTwoPi * u2);
    has_spare_ = true;
    return r * std::cos(kTwoPi * u2);
}

void RngStream::fill_gauss(std::span<double> out) {
    for (double& x : out) x = gauss();
}

RngStream RngStream::substream(std::string_view name) const {
    return RngStream(derive_key(key_, detail::hash_name(name)));
}

RngStream RngStream::substream(std::uint64_t index) const {
    return RngStream(derive_key(key_, 0x517cc1b727220a95ULL + index));
}

}  // namespace dabridge
