#include <doctest.h>

#include <cmath>
#include <vector>

#include "dabridge/rng.hpp"

using namespace dabridge;

TEST_SUITE("rng") {

TEST_CASE("same seed and name reproduce the stream") {
    RngStream a(42, "test");
    RngStream b(42, "test");
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different names give different streams") {
    RngStream a(42, "alpha");
    RngStream b(42, "beta");
    int differing = 0;
    for (int i = 0; i < 16; ++i) {
        if (a.next_u64() != b.next_u64()) ++differing;
    }
    CHECK(differing > 0);
}

TEST_CASE("substreams are independent of parent consumption") {
    RngStream parent(7, "root");
    RngStream child_before = parent.substream("child");
    for (int i = 0; i < 100; ++i) parent.next_u64();
    RngStream child_after = parent.substream("child");
    for (int i = 0; i < 100; ++i) CHECK(child_before.next_u64() == child_after.next_u64());
}

TEST_CASE("uniform stays in [0,1) and covers the range") {
    RngStream rng(123, "uniform");
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    CHECK(lo < 0.01);
    CHECK(hi > 0.99);
}

TEST_CASE("uniform_int honors bounds") {
    RngStream rng(5, "ints");
    std::vector<int> counts(5, 0);
    for (int i = 0; i < 5000; ++i) {
        const auto v = rng.uniform_int(3, 7);
        REQUIRE(v >= 3);
        REQUIRE(v <= 7);
        counts[v - 3]++;
    }
    for (int c : counts) CHECK(c > 700);  // ~1000 expected per bucket
}

TEST_CASE("gauss has unit moments") {
    RngStream rng(99, "gauss");
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.gauss();
        sum += z;
        sum2 += z * z;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(std::abs(mean) < 5.0 / std::sqrt(static_cast<double>(n)));
    CHECK(std::abs(var - 1.0) < 6.0 * std::sqrt(2.0 / n));
}

}  // TEST_SUITE
