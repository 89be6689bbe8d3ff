#include <doctest.h>

#include <cmath>
#include <cstring>
#include <sstream>

#include "dabridge/training.hpp"
#include "test_util.hpp"

using namespace dabridge;

namespace {

PairedDataset single_pair_dataset(const Vec& x0, const Vec& y) {
    PairedDataset ds;
    ds.dim = static_cast<int>(x0.size());
    ds.name = "single";
    ds.samples.push_back({x0, y});
    return ds;
}

}  // namespace

TEST_SUITE("training") {

TEST_CASE("forward loss vanishes at the exact oracle") {
    const BridgeSchedule s = BridgeSchedule::make(8);
    const Vec x0{0.25, -1.0};
    const Vec y{1.0, 0.5};
    const auto ds = single_pair_dataset(x0, y);
    AnalyticForwardOracle oracle(x0);
    RngStream rng(3, "loss");
    const auto res = forward_loss(std::span(ds.samples), oracle, s, rng);
    CHECK(res.loss == 0.0);
    CHECK(res.grads.empty());
}

TEST_CASE("reverse loss vanishes at the exact oracle") {
    const BridgeSchedule s = BridgeSchedule::make(8);
    const Vec x0{0.25, -1.0};
    const Vec y{1.0, 0.5};
    std::vector<PairedSample> batch(16, PairedSample{x0, y});
    AnalyticReverseOracle oracle(x0, y);
    RngStream rng(5, "loss");
    const auto res = reverse_loss(batch, oracle, s, rng);
    CHECK(res.loss <= 1e-24);
}

TEST_CASE("endpoint algebra: the marginal at t = T is y regardless of noise") {
    const BridgeSchedule s = BridgeSchedule::make(8);
    const Vec x0{0.0, 0.0};
    const Vec y{2.0, -3.0};
    const Vec big_noise{1e9, -1e9};
    CHECK(sample_marginal_discrete(x0, y, 8, big_noise, s) == y);
    // so the forward target at t = T is exactly y - x0
}

TEST_CASE("zero net reverse loss is about the data dimension") {
    const BridgeSchedule s = BridgeSchedule::make(16);
    const int dim = 4;
    const auto stub = test::zero_net(dim);
    std::vector<PairedSample> batch(2000, PairedSample{Vec(dim, 0.3), Vec(dim, 0.9)});
    RngStream rng(9, "loss");
    const auto res = reverse_loss(batch, stub, s, rng);
    // per-sample loss is ||z||^2 with z standard normal: mean d, var 2d
    const double se = std::sqrt(2.0 * dim / 2000.0);
    CHECK(std::abs(res.loss - dim) < 5 * se);
}

TEST_CASE("perturbed oracle has strictly larger expected loss") {
    const BridgeSchedule s = BridgeSchedule::make(8);
    const Vec x0{0.25, -1.0};
    const Vec y{1.0, 0.5};
    std::vector<PairedSample> batch(10000, PairedSample{x0, y});

    AnalyticForwardOracle oracle(x0);
    const Vec delta{0.05, -0.08};
    test::StubApproximator perturbed(2, [&](const Vec& x_t, int t, int T) {
        Vec out = oracle.evaluate(x_t, t, T);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += delta[i];
        return out;
    });
    RngStream rng_a(11, "loss");
    RngStream rng_b(11, "loss");
    const double loss_oracle = forward_loss(batch, oracle, s, rng_a).loss;
    const double loss_perturbed = forward_loss(batch, perturbed, s, rng_b).loss;
    const double margin = squared_norm(delta);  // expected gap, exact here
    CHECK(loss_perturbed > loss_oracle + 0.99 * margin);
}

TEST_CASE("optimizer steps") {
    TrainConfig cfg;
    cfg.learning_rate = 0.1;
    cfg.optimizer = OptimizerKind::sgd;

    Vec params{1.0};
    OptimizerState state(1);
    optimizer_step(params, {2.0}, state, cfg);
    CHECK(params[0] == doctest::Approx(0.8).epsilon(1e-15));

    // zero gradients leave parameters alone (both optimizers)
    optimizer_step(params, {0.0}, state, cfg);
    CHECK(params[0] == doctest::Approx(0.8).epsilon(1e-15));
    cfg.optimizer = OptimizerKind::adam;
    OptimizerState adam_state(1);
    Vec p2{0.5};
    optimizer_step(p2, {0.0}, adam_state, cfg);
    CHECK(p2[0] == 0.5);

    // first Adam step has magnitude ~ lr regardless of gradient scale
    cfg.learning_rate = 1e-3;
    for (double c : {1e-3, 1.0, 1e3}) {
        OptimizerState st(1);
        Vec p{0.0};
        optimizer_step(p, {c}, st, cfg);
        CHECK(std::abs(p[0]) == doctest::Approx(cfg.learning_rate).epsilon(1e-4));
        CHECK(p[0] < 0.0);  // moves against the gradient
    }
}

TEST_CASE("training is deterministic and steps=0 is a no-op") {
    const auto ds = gen_gaussian_pairs(64, 2, 0.0, 1.0, 1.0, 17);
    TrainConfig cfg;
    cfg.batch_size = 8;
    cfg.steps = 50;
    cfg.T = 8;
    cfg.seed = 99;
    const BridgeSchedule s = BridgeSchedule::make(cfg.T);

    auto make = [&] {
        MlpConfig mc = MlpConfig::dense(2, {8}, 5);
        return MlpApproximator(mc);
    };

    MlpApproximator a = make();
    MlpApproximator b = make();
    train(ds, a, s, cfg, TrainTarget::forward);
    train(ds, b, s, cfg, TrainTarget::forward);
    CHECK(std::memcmp(a.params().data(), b.params().data(),
                      sizeof(double) * a.param_count()) == 0);

    MlpApproximator c = make();
    const Vec before(c.params().begin(), c.params().end());
    TrainConfig none = cfg;
    none.steps = 0;
    train(ds, c, s, none, TrainTarget::forward);
    CHECK(std::memcmp(before.data(), c.params().data(), sizeof(double) * before.size()) == 0);
}

TEST_CASE("forward and reverse trainings are independent of ordering") {
    const auto ds = gen_gaussian_pairs(64, 2, 0.0, 1.0, 1.0, 23);
    TrainConfig cfg;
    cfg.batch_size = 8;
    cfg.steps = 40;
    cfg.T = 8;
    cfg.seed = 7;
    const BridgeSchedule s = BridgeSchedule::make(cfg.T);
    auto make = [&](std::uint64_t seed) {
        return MlpApproximator(MlpConfig::dense(2, {8}, seed));
    };

    // forward then reverse
    MlpApproximator f1 = make(1), r1 = make(2);
    train(ds, f1, s, cfg, TrainTarget::forward);
    train(ds, r1, s, cfg, TrainTarget::reverse);
    // reverse then forward
    MlpApproximator f2 = make(1), r2 = make(2);
    train(ds, r2, s, cfg, TrainTarget::reverse);
    train(ds, f2, s, cfg, TrainTarget::forward);

    CHECK(std::memcmp(f1.params().data(), f2.params().data(),
                      sizeof(double) * f1.param_count()) == 0);
    CHECK(std::memcmp(r1.params().data(), r2.params().data(),
                      sizeof(double) * r1.param_count()) == 0);
}

TEST_CASE("divergence aborts with the step index") {
    const auto ds = gen_blur_pairs(32, 8, 1, 3);
    TrainConfig cfg;
    cfg.batch_size = 8;
    cfg.steps = 50;
    cfg.T = 8;
    cfg.learning_rate = 1e6;  // deliberately absurd
    const BridgeSchedule s = BridgeSchedule::make(cfg.T);
    MlpApproximator net(MlpConfig::dense(64, {32}, 1));
    CHECK_THROWS_AS(train(ds, net, s, cfg, TrainTarget::forward), TrainingDivergence);
}

TEST_CASE("1-D Gaussian task reaches the closed-form Bayes loss") {
    // x0 ~ N(0,1), y = x0 + 2. Then x_t = x0 + 2 t + sqrt(G) eps, so the
    // posterior mean of x0 given x_t is (x_t - 2t)/(1 + G) and the optimal
    // residual predictor is x_t minus that.
    const int T = 16;
    const BridgeSchedule s = BridgeSchedule::make(T);
    const auto ds = gen_gaussian_pairs(4096, 1, 0.0, 1.0, 2.0, 29);

    TrainConfig cfg;
    cfg.batch_size = 256;
    cfg.steps = 5000;
    cfg.learning_rate = 1e-3;
    cfg.T = T;
    cfg.seed = 31;
    MlpApproximator net(MlpConfig::dense(1, {16, 16}, 4));
    train(ds, net, s, cfg, TrainTarget::forward);

    test::StubApproximator bayes(1, [&](const Vec& x_t, int t, int steps) {
        const double tc = static_cast<double>(t) / steps;
        const double variance = tc * (1.0 - tc);
        const double posterior_mean = (x_t[0] - 2.0 * tc) / (1.0 + variance);
        return Vec{x_t[0] - posterior_mean};
    });

    // shared evaluation set
    const auto eval_ds = gen_gaussian_pairs(20000, 1, 0.0, 1.0, 2.0, 57);
    RngStream rng_net(71, "eval");
    RngStream rng_bayes(71, "eval");
    const double net_loss = forward_loss(std::span(eval_ds.samples), net, s, rng_net).loss;
    const double bayes_loss = forward_loss(std::span(eval_ds.samples), bayes, s, rng_bayes).loss;
    CHECK(net_loss == doctest::Approx(bayes_loss).epsilon(0.10));
}

TEST_CASE("blur task halves the starting loss within 2000 steps") {
    const auto ds = gen_blur_pairs(128, 8, 1, 43);
    TrainConfig cfg;
    cfg.batch_size = 32;
    cfg.steps = 2000;
    cfg.T = 32;
    cfg.seed = 13;
    const BridgeSchedule s = BridgeSchedule::make(cfg.T);
    MlpApproximator net(MlpConfig::dense(64, {64}, 21));
    const TrainResult result = train(ds, net, s, cfg, TrainTarget::forward);
    REQUIRE(result.curve.size() >= 2);
    CHECK(result.curve.front().step == 0);
    CHECK(result.final_loss < 0.5 * result.curve.front().loss);
}

TEST_CASE("train config file round-trip and validation") {
    TrainConfig cfg;
    cfg.batch_size = 32;
    cfg.steps = 123;
    cfg.learning_rate = 0.005;
    cfg.optimizer = OptimizerKind::sgd;
    cfg.loss_norm = LossNorm::l1;
    cfg.seed = 99;
    cfg.T = 77;

    std::ostringstream out;
    write_train_config(out, cfg);
    std::istringstream in(out.str());
    const TrainConfig parsed = parse_train_config(in);
    CHECK(parsed.batch_size == cfg.batch_size);
    CHECK(parsed.steps == cfg.steps);
    CHECK(parsed.learning_rate == cfg.learning_rate);
    CHECK(parsed.optimizer == cfg.optimizer);
    CHECK(parsed.loss_norm == cfg.loss_norm);
    CHECK(parsed.seed == cfg.seed);
    CHECK(parsed.T == cfg.T);

    std::istringstream bad("bogus_key=1\n");
    CHECK_THROWS_AS(parse_train_config(bad), std::invalid_argument);
    std::istringstream comments("# comment only\n  \nsteps=5\n");
    CHECK(parse_train_config(comments).steps == 5);
}

}  // TEST_SUITE
