#include <doctest.h>

#include <cmath>
#include <fstream>

#include "dabridge/datasets.hpp"
#include "dabridge/io.hpp"
#include "test_util.hpp"

using namespace dabridge;

namespace {

std::vector<std::uint8_t> dataset_bytes(const PairedDataset& ds) {
    test::TempDir dir("bytes");
    const auto p = dir.path() / "ds.dabt";
    save_dataset(ds, p);
    return read_file(p);
}

}  // namespace

TEST_SUITE("datasets") {

TEST_CASE("gaussian pairs: pairing, moments, determinism") {
    const auto ds = gen_gaussian_pairs(10000, 1, 0.0, 1.0, 0.0, 3);
    CHECK(ds.dim == 1);
    REQUIRE(ds.samples.size() == 10000);
    double sum = 0.0;
    for (const auto& s : ds.samples) {
        CHECK(s.y == s.x0);  // offset 0: identity task
        sum += s.x0[0];
    }
    CHECK(std::abs(sum / 10000.0) < 3.0 / std::sqrt(10000.0));

    const auto again = gen_gaussian_pairs(10000, 1, 0.0, 1.0, 0.0, 3);
    CHECK(dataset_bytes(ds) == dataset_bytes(again));

    const auto shifted = gen_gaussian_pairs(4, 2, 0.0, 1.0, 2.0, 3);
    for (const auto& s : shifted.samples) {
        CHECK(s.y[0] == s.x0[0] + 2.0);
        CHECK(s.y[1] == s.x0[1] + 2.0);
    }

    CHECK_THROWS_AS(gen_gaussian_pairs(4, 1, 0.0, 0.0, 0.0, 3), std::invalid_argument);
}

TEST_CASE("two moons: arcs, invertible pairing, separation") {
    const auto ds = gen_twomoons_pairs(2000, 0.0, 11);
    REQUIRE(ds.samples.size() == 2000);
    double centroid_even = 0.0, centroid_odd = 0.0;
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        const Vec& p = ds.samples[i].x0;
        // radius about the arc center is exactly 1 without noise
        double r;
        if (i % 2 == 0) {
            r = std::sqrt(p[0] * p[0] + p[1] * p[1]);
            centroid_even += p[1];
        } else {
            const double dx = p[0] - 1.0, dy = p[1] - 0.5;
            r = std::sqrt(dx * dx + dy * dy);
            centroid_odd += p[1];
        }
        CHECK(std::abs(r - 1.0) <= 1e-12);
        // exact inverse of the pairing map
        const Vec back = twomoons_invert_map(ds.samples[i].y);
        CHECK(max_abs_diff(back, p) <= 1e-12);
    }
    // the two arcs sit apart vertically
    CHECK(centroid_even / 1000.0 > 0.4);
    CHECK(centroid_odd / 1000.0 < 0.1);
}

TEST_CASE("two moons scatter export") {
    test::TempDir dir("scatter");
    const auto ds = gen_twomoons_pairs(100, 0.05, 5);
    std::ofstream csv(dir.path() / "moons.csv");
    csv << "x0_0,x0_1,y_0,y_1\n";
    for (const auto& s : ds.samples) {
        csv << s.x0[0] << ',' << s.x0[1] << ',' << s.y[0] << ',' << s.y[1] << '\n';
    }
    csv.close();
    CHECK(std::filesystem::file_size(dir.path() / "moons.csv") > 0);
}

TEST_CASE("box blur: identity, range, mean preservation at radius 1") {
    const auto ds = gen_blur_pairs(64, 8, 1, 21);
    CHECK(ds.dim == 64);
    for (const auto& s : ds.samples) {
        double mx = 0.0, my = 0.0;
        for (int i = 0; i < 64; ++i) {
            CHECK(s.x0[i] >= 0.0);
            CHECK(s.x0[i] <= 1.0);
            CHECK(s.y[i] >= 0.0);
            CHECK(s.y[i] <= 1.0);
            mx += s.x0[i];
            my += s.y[i];
        }
        // radius-1 blur with replicated edges: every pixel is counted
        // (2r+1)^2 times overall, so the mean is preserved exactly.
        CHECK(std::abs(mx - my) / 64.0 <= 1e-12);
    }

    const auto identity = gen_blur_pairs(8, 8, 0, 21);
    for (const auto& s : identity.samples) CHECK(s.y == s.x0);

    CHECK_THROWS_AS(gen_blur_pairs(4, 3, 1, 21), std::invalid_argument);
    CHECK_THROWS_AS(gen_blur_pairs(4, 33, 1, 21), std::invalid_argument);
}

TEST_CASE("box blur is linear") {
    test::TempDir dir("lin");
    const int side = 8;
    const auto a_ds = gen_blur_pairs(1, side, 2, 31);
    const auto b_ds = gen_blur_pairs(1, side, 2, 32);
    const Vec& a = a_ds.samples[0].x0;
    const Vec& b = b_ds.samples[0].x0;
    Vec combo(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) combo[i] = 0.7 * a[i] - 0.2 * b[i];
    const Vec blurred_combo = box_blur(combo, side, 2);
    const Vec ba = box_blur(a, side, 2);
    const Vec bb = box_blur(b, side, 2);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(std::abs(blurred_combo[i] - (0.7 * ba[i] - 0.2 * bb[i])) <= 1e-12);
    }
}

TEST_CASE("tensor file round-trips byte for byte") {
    test::TempDir dir("dabt");
    const auto ds = gen_blur_pairs(16, 8, 1, 41);
    const auto p1 = dir.path() / "a.dabt";
    save_dataset(ds, p1);
    const auto loaded = load_dataset(p1);
    CHECK(loaded.dim == ds.dim);
    REQUIRE(loaded.samples.size() == ds.samples.size());
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        CHECK(loaded.samples[i].x0 == ds.samples[i].x0);
        CHECK(loaded.samples[i].y == ds.samples[i].y);
    }
    const auto p2 = dir.path() / "b.dabt";
    save_dataset(loaded, p2);
    CHECK(read_file(p1) == read_file(p2));
}

TEST_CASE("truncated or corrupt tensor files name the byte offset") {
    test::TempDir dir("dabt-bad");
    const auto ds = gen_gaussian_pairs(4, 2, 0.0, 1.0, 1.0, 2);
    const auto p = dir.path() / "ds.dabt";
    save_dataset(ds, p);

    auto bytes = read_file(p);
    bytes.resize(bytes.size() - 3);
    write_file(dir.path() / "trunc.dabt", bytes);
    try {
        load_dataset(dir.path() / "trunc.dabt");
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(e.byte_offset > 0);
        CHECK(std::string(e.what()).find("offset") != std::string::npos);
    }

    bytes = read_file(p);
    bytes[1] = 'X';
    write_file(dir.path() / "magic.dabt", bytes);
    CHECK_THROWS_AS(load_dataset(dir.path() / "magic.dabt"), FormatError);
}

TEST_CASE("golden tensor file loads identically across builds") {
    const std::filesystem::path golden =
        std::filesystem::path(DABRIDGE_GOLDEN_DIR) / "blur_n4_side8_r1_seed7.dabt";
    REQUIRE(std::filesystem::exists(golden));
    const auto ds = load_dataset(golden);
    CHECK(ds.dim == 64);
    REQUIRE(ds.samples.size() == 4);
    // values frozen when the fixture was committed
    CHECK(ds.samples[0].x0[0] == 0.5829121136340224);
    CHECK(ds.samples[3].y[63] == 0.60073601428685797);
    // regeneration reproduces the committed bytes
    const auto regen = gen_blur_pairs(4, 8, 1, 7);
    CHECK(dataset_bytes(regen) == read_file(golden));
}

}  // TEST_SUITE
