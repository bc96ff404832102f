#include <doctest.h>

#include <cmath>
#include <vector>

#include "dsoup/checkpoint.hpp"
#include "dsoup/errors.hpp"
#include "dsoup/network.hpp"
#include "dsoup/oracles.hpp"
#include "dsoup/schedule.hpp"
#include "dsoup/shard.hpp"
#include "dsoup/train.hpp"

using namespace dsoup;

namespace {

// closed forms written out independently of NoiseSchedule
double gamma_ref(double t) { return std::exp(-0.5 * (0.1 * t + 9.95 * t * t)); }
double sigma_ref(double t) { return std::sqrt(-std::expm1(-(0.1 * t + 9.95 * t * t))); }

ArchDescriptor tiny_arch(std::vector<int> hidden = {8}, int vocab = 0) {
    ArchDescriptor a;
    a.hidden = std::move(hidden);
    a.time_embed_dim = 4;
    a.label_vocab = vocab;
    return a;
}

Shard unit_shard(std::size_t n = 256, std::uint64_t seed = 7) {
    return make_shard(AnalyticDistribution::gaussian({1.0, 0.0}, Mat2::identity()), n, seed);
}

}  // namespace

TEST_SUITE_BEGIN("diffusion");

TEST_CASE("schedule matches its closed form across [0,1]") {
    NoiseSchedule s;
    for (double t : {0.0, kTimeFloor, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0}) {
        auto [g, sg] = s.eval(t);
        CHECK(g == doctest::Approx(gamma_ref(t)).epsilon(1e-14));
        CHECK(sg == doctest::Approx(sigma_ref(t)).epsilon(1e-14));
        CHECK(g * g + sg * sg == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(s.beta(0.0) == doctest::Approx(0.1));
    CHECK(s.beta(1.0) == doctest::Approx(20.0));
    CHECK(s.beta(0.5) == doctest::Approx(10.05));
}

TEST_CASE("pinned schedule anchors") {
    NoiseSchedule s;
    auto [g1, s1] = s.eval(1.0);
    CHECK(std::abs(g1 - 0.006571586494929619) < 1e-12);
    CHECK(std::abs(s1 - 0.9999784068923386) < 1e-12);
    auto [gh, sh] = s.eval(0.5);
    CHECK(std::abs(gh - 0.2811828807967524) < 1e-12);
    // near the floor the signal is still almost intact
    auto [gf, sf] = s.eval(kTimeFloor);
    CHECK(gf > 0.9999);
    CHECK(sf == doctest::Approx(0.010485).epsilon(1e-3));
}

TEST_CASE("schedule rejects out-of-range times and bad betas") {
    NoiseSchedule s;
    CHECK_THROWS_AS((void)s.eval(-0.01), ValidationError);
    CHECK_THROWS_AS((void)s.eval(1.01), ValidationError);
    CHECK_THROWS_AS(NoiseSchedule(-1.0, 20.0), ValidationError);
    CHECK_THROWS_AS(NoiseSchedule(5.0, 2.0), ValidationError);
}

TEST_CASE("parameter count matches a hand count") {
    // input 2+4=6 -> 8 (48 w + 8 b) -> 2 (16 w + 2 b) = 74
    CHECK(tiny_arch().param_count() == 74);
    // plus a 3 x 4 label table
    CHECK(tiny_arch({8}, 3).param_count() == 86);
    ArchDescriptor big;  // defaults: [128,128], embed 32
    const std::size_t in = 2 + 32;
    CHECK(big.param_count() == in * 128 + 128 + 128 * 128 + 128 + 128 * 2 + 2);
}

TEST_CASE("architecture validation") {
    ArchDescriptor a = tiny_arch();
    a.time_embed_dim = 3;  // must be even
    CHECK_THROWS_AS(a.validate(), ValidationError);
    a = tiny_arch();
    a.hidden = {0};
    CHECK_THROWS_AS(a.validate(), ValidationError);
    a = tiny_arch();
    a.activation = "relu6";
    CHECK_THROWS_AS(a.validate(), ValidationError);
    CHECK_NOTHROW(tiny_arch().validate());
}

TEST_CASE("zero weights give zero output") {
    Network net(tiny_arch());
    std::vector<double> w(net.param_count(), 0.0);
    auto ws = net.make_workspace();
    Vec2 out = net.forward(w, {0.7, -1.3}, 0.5, std::nullopt, ws);
    CHECK(out.x == 0.0);
    CHECK(out.y == 0.0);
}

TEST_CASE("forward is deterministic and time-sensitive") {
    Checkpoint cp = fresh_checkpoint(tiny_arch(), NoiseSchedule(), 42);
    const Vec2 x{0.3, 0.4};
    Vec2 a = eps_forward(cp, x, 0.3);
    Vec2 b = eps_forward(cp, x, 0.3);
    Vec2 c = eps_forward(cp, x, 0.7);
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("fresh checkpoints are seeded reproducibly and self-ancestral") {
    Checkpoint a = fresh_checkpoint(tiny_arch(), NoiseSchedule(), 1);
    Checkpoint b = fresh_checkpoint(tiny_arch(), NoiseSchedule(), 1);
    Checkpoint c = fresh_checkpoint(tiny_arch(), NoiseSchedule(), 2);
    CHECK(a.weights == b.weights);
    CHECK(a.weights != c.weights);
    CHECK(a.ancestor_hash == a.content_hash());
    // biases and (absent) embeddings zero: last two weights are the output bias
    CHECK(a.weights[a.weights.size() - 1] == 0.0);
    CHECK(a.weights[a.weights.size() - 2] == 0.0);
}

TEST_CASE("label embeddings shift the prediction only for conditional nets") {
    Checkpoint cp = fresh_checkpoint(tiny_arch({8}, 2), NoiseSchedule(), 3);
    // zero-init table: labels are indistinguishable until trained
    CHECK(eps_forward(cp, {0.1, 0.2}, 0.4, 0) == eps_forward(cp, {0.1, 0.2}, 0.4, 1));
    CHECK_THROWS_AS((void)eps_forward(cp, {0, 0}, 0.4, 2), ValidationError);
    Checkpoint uncond = fresh_checkpoint(tiny_arch(), NoiseSchedule(), 3);
    CHECK_THROWS_AS((void)eps_forward(uncond, {0, 0}, 0.4, 0), ValidationError);
}

TEST_CASE("backward matches central finite differences") {
    Network net(tiny_arch({8, 6}));
    std::vector<double> w(net.param_count());
    CounterRng rng(99);
    for (double& v : w) v = rng.uniform(-0.5, 0.5);
    auto ws = net.make_workspace();

    const Vec2 x{0.8, -0.6};
    const double t = 0.37;
    const Vec2 cot{0.9, -1.7};

    std::vector<double> grad(w.size(), 0.0);
    net.forward_backward(w, x, t, std::nullopt, cot, grad, ws);

    const double h = 1e-6;
    CounterRng pick(7);
    for (int k = 0; k < 10; ++k) {
        const std::size_t i = pick.index(w.size());
        const double keep = w[i];
        w[i] = keep + h;
        Vec2 up = net.forward(w, x, t, std::nullopt, ws);
        w[i] = keep - h;
        Vec2 dn = net.forward(w, x, t, std::nullopt, ws);
        w[i] = keep;
        const double fd = (dot(cot, up) - dot(cot, dn)) / (2.0 * h);
        CHECK(grad[i] == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("directional derivative matches the full gradient") {
    Network net(tiny_arch());
    std::vector<double> w(net.param_count());
    CounterRng rng(123);
    for (double& v : w) v = rng.uniform(-0.5, 0.5);
    std::vector<double> dir(w.size());
    for (double& v : dir) v = rng.uniform(-1.0, 1.0);
    auto ws = net.make_workspace();
    const Vec2 x{-0.2, 0.5};
    const Vec2 cot{1.0, 2.0};

    std::vector<double> grad(w.size(), 0.0);
    net.forward_backward(w, x, 0.6, std::nullopt, cot, grad, ws);
    double analytic = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) analytic += grad[i] * dir[i];

    const double h = 1e-6;
    std::vector<double> wp = w, wm = w;
    for (std::size_t i = 0; i < w.size(); ++i) {
        wp[i] += h * dir[i];
        wm[i] -= h * dir[i];
    }
    Vec2 up = net.forward(wp, x, 0.6, std::nullopt, ws);
    Vec2 dn = net.forward(wm, x, 0.6, std::nullopt, ws);
    const double fd = (dot(cot, up) - dot(cot, dn)) / (2.0 * h);
    CHECK(analytic == doctest::Approx(fd).epsilon(1e-5));
}

TEST_CASE("training reduces the loss and is bit-deterministic") {
    Shard s = unit_shard();
    TrainConfig cfg{400, 32, 1e-2, 5};
    auto r1 = train_from_scratch(tiny_arch({16}), NoiseSchedule(), s, cfg);
    auto r2 = train_from_scratch(tiny_arch({16}), NoiseSchedule(), s, cfg);
    CHECK(r1.checkpoint.content_hash() == r2.checkpoint.content_hash());
    CHECK(r1.loss_history == r2.loss_history);

    double head = 0, tail = 0;
    for (int i = 0; i < 50; ++i) head += r1.loss_history[i];
    for (int i = 350; i < 400; ++i) tail += r1.loss_history[i];
    CHECK(tail < head);
}

TEST_CASE("zero learning rate is a fixed point") {
    Checkpoint init = fresh_checkpoint(tiny_arch(), NoiseSchedule(), 8);
    auto res = finetune(init, unit_shard(), TrainConfig{10, 16, 0.0, 1});
    CHECK(res.checkpoint.weights == init.weights);
    CHECK(res.checkpoint.ancestor_hash == init.content_hash());
}

TEST_CASE("finetune records its ancestor, scratch is its own") {
    Shard s = unit_shard();
    auto pre = train_from_scratch(tiny_arch(), NoiseSchedule(), s, TrainConfig{20, 16, 1e-3, 1});
    CHECK(pre.checkpoint.ancestor_hash == pre.checkpoint.content_hash());
    auto ft = finetune(pre.checkpoint, s, TrainConfig{20, 16, 1e-3, 2});
    CHECK(ft.checkpoint.ancestor_hash == pre.checkpoint.content_hash());
    CHECK(ft.checkpoint.content_hash() != pre.checkpoint.content_hash());
}

TEST_CASE("bad configs are rejected") {
    Checkpoint init = fresh_checkpoint(tiny_arch(), NoiseSchedule(), 0);
    Shard s = unit_shard(16);
    CHECK_THROWS_AS((void)finetune(init, s, TrainConfig{0, 16, 1e-3, 0}), ValidationError);
    CHECK_THROWS_AS((void)finetune(init, s, TrainConfig{10, 0, 1e-3, 0}), ValidationError);
    CHECK_THROWS_AS((void)finetune(init, s, TrainConfig{10, 16, -1.0, 0}), ValidationError);
    Shard empty;
    empty.id = "empty";
    CHECK_THROWS_AS((void)finetune(init, empty, TrainConfig{10, 16, 1e-3, 0}), ValidationError);
}

TEST_CASE("divergence raises a training error naming a step") {
    Checkpoint init = fresh_checkpoint(tiny_arch({16}), NoiseSchedule(), 4);
    try {
        (void)finetune(init, unit_shard(), TrainConfig{200, 8, 1e8, 0});
        FAIL("expected TrainingError");
    } catch (const TrainingError& e) {
        CHECK(e.step() >= 0);
        CHECK(std::string(e.what()).find("step") != std::string::npos);
    }
}

TEST_CASE("labels train only when both sides are labeled") {
    auto dist = AnalyticDistribution::gaussian({0.0, 0.0}, Mat2::identity());
    Shard labeled = make_shard(dist, 64, 3, 1, "lab");
    ArchDescriptor arch = tiny_arch({8}, 2);
    const std::size_t table = std::size_t(arch.label_vocab) * arch.time_embed_dim;

    Checkpoint init = fresh_checkpoint(arch, NoiseSchedule(), 6);
    auto ft = finetune(init, labeled, TrainConfig{30, 16, 1e-2, 1});
    bool row1_moved = false, row0_moved = false;
    for (int j = 0; j < arch.time_embed_dim; ++j) {
        row0_moved |= ft.checkpoint.weights[j] != 0.0;
        row1_moved |= ft.checkpoint.weights[arch.time_embed_dim + j] != 0.0;
    }
    CHECK(row1_moved);       // the label that occurs gets gradient
    CHECK_FALSE(row0_moved);  // the absent label does not

    Shard unlabeled = labeled;
    unlabeled.labels.reset();
    auto ft2 = finetune(init, unlabeled, TrainConfig{30, 16, 1e-2, 1});
    for (std::size_t j = 0; j < table; ++j) CHECK(ft2.checkpoint.weights[j] == 0.0);
}

TEST_CASE("trained denoiser approaches the analytic optimum") {
    // Monte-Carlo denoising loss under the same draws, model vs the exact
    // conditional expectation eps*(x_t, t) = -sigma * score(x_t, t).
    auto dist = AnalyticDistribution::gaussian({1.0, 0.0}, Mat2::identity());
    Shard s = make_shard(dist, 4096, 21);
    ArchDescriptor arch = tiny_arch({32, 32});
    arch.time_embed_dim = 8;
    auto res = train_from_scratch(arch, NoiseSchedule(), s, TrainConfig{8000, 64, 5e-3, 9});

    NoiseSchedule sched;
    Network net(res.checkpoint.arch);
    auto ws = net.make_workspace();
    CounterRng rng(555);
    double model_loss = 0.0, oracle_loss = 0.0;
    const int m = 4000;
    for (int i = 0; i < m; ++i) {
        const Vec2& x0 = s.points[rng.index(s.points.size())];
        double t = kTimeFloor + (1.0 - kTimeFloor) * rng.uniform01();
        auto [e0, e1] = rng.normal_pair();
        auto [g, sg] = sched.eval(t);
        Vec2 xt{g * x0.x + sg * e0, g * x0.y + sg * e1};

        Vec2 eh = net.forward(res.checkpoint.weights, xt, t, std::nullopt, ws);
        model_loss += (eh.x - e0) * (eh.x - e0) + (eh.y - e1) * (eh.y - e1);

        // exact posterior mean of eps given x_t for the *empirical* data
        // distribution is intractable; the generator's marginal is the right
        // target at this sample size
        auto marg = marginal_at(dist, t, sched);
        Vec2 sc = analytic_score(marg, xt);
        Vec2 estar{-sg * sc.x, -sg * sc.y};
        oracle_loss += (estar.x - e0) * (estar.x - e0) + (estar.y - e1) * (estar.y - e1);
    }
    model_loss /= m;
    oracle_loss /= m;
    CHECK(model_loss < oracle_loss * 1.10);  // within 10% of the optimum
    CHECK(model_loss > oracle_loss * 0.80);  // and not impossibly below it
}

TEST_SUITE_END();
