#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "dsoup/errors.hpp"
#include "dsoup/evaluation.hpp"
#include "dsoup/souping.hpp"
#include "dsoup/train.hpp"

using namespace dsoup;

TEST_SUITE_BEGIN("evaluation");

TEST_CASE("moments error on a hand-computable set") {
    // mean (0,0); 1/n covariance [[1,1],[1,1]] vs I -> off-diagonal error sqrt(2)
    std::vector<Vec2> pts{{1.0, 1.0}, {-1.0, -1.0}};
    auto err = moments_error(pts, Gaussian{{0.0, 0.0}, Mat2::identity()});
    CHECK(err.mean_err.x == 0.0);
    CHECK(err.mean_err.y == 0.0);
    CHECK(err.cov_err == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("fitting then scoring the same samples is exact") {
    CounterRng rng(5);
    std::vector<Vec2> pts;
    for (int i = 0; i < 500; ++i) {
        auto [a, b] = rng.normal_pair();
        pts.push_back({a * 2.0 + 1.0, b - 3.0});
    }
    Gaussian fit = fit_gaussian(pts);
    auto err = moments_error(pts, fit);
    CHECK(err.mean_err.x < 1e-12);
    CHECK(err.mean_err.y < 1e-12);
    CHECK(err.cov_err < 1e-12);
}

TEST_CASE("moments error requires at least two samples") {
    CHECK_THROWS_AS((void)moments_error({{0, 0}}, Gaussian{}), ValidationError);
    CHECK_THROWS_AS((void)fit_gaussian({}), ValidationError);
}

TEST_CASE("energy distance axioms on small sets") {
    std::vector<Vec2> a{{0, 0}, {1, 0}, {0, 1}};
    std::vector<Vec2> b{{5, 5}, {6, 5}, {5, 6}};
    CHECK(energy_distance(a, a) == 0.0);
    CHECK(energy_distance(b, b) == 0.0);
    CHECK(energy_distance(a, b) == energy_distance(b, a));
    CHECK(energy_distance(a, b) > 0.0);
    // two-point closed form: E = 2*|x-y| - 0 - 0
    std::vector<Vec2> x{{0.0, 0.0}};
    std::vector<Vec2> y{{3.0, 4.0}};
    CHECK(energy_distance(x, y) == doctest::Approx(10.0).epsilon(1e-14));
}

TEST_CASE("energy distance separates shifted clouds monotonically") {
    auto dist = AnalyticDistribution::gaussian({0, 0}, Mat2::identity());
    auto base = make_shard(dist, 600, 1).points;
    double prev = 0.0;
    for (double shift : {0.0, 0.5, 1.0, 2.0}) {
        auto moved = base;
        for (auto& p : moved) p.x += shift;
        const double d = energy_distance(base, moved, 42);
        CHECK(d >= prev);
        prev = d;
    }
}

TEST_CASE("subsampled energy distance keeps the exact identities") {
    auto dist = AnalyticDistribution::gaussian({0, 0}, Mat2::identity());
    auto big = make_shard(dist, 6000, 2).points;  // over the 4096 cap
    auto big2 = make_shard(dist, 6000, 3).points;
    CHECK(energy_distance(big, big, 7) == 0.0);           // identical multisets
    CHECK(energy_distance(big, big2, 7) == energy_distance(big2, big, 7));
    CHECK(energy_distance(big, big2, 7) < 0.05);          // same distribution
    // and it approximates the uncapped value
    const double capped = energy_distance(big, big2, 7);
    const double full = energy_distance(big, big2, 7, 6000);
    CHECK(std::abs(capped - full) < 0.02);
}

TEST_CASE("energy distance against an analytic expectation") {
    // E||A - B|| for A ~ N(0,I), B ~ N((d,0),I): ||A-B|| is the norm of
    // N((d,0), 2I); E||A-A'|| = E of norm of N(0, 2I) = sqrt(pi/2) * ... use
    // the Rice mean via sqrt(2) * gamma(3/2)/gamma(1) scaling: for N(0, 2I),
    // E||z|| = sqrt(2) * sqrt(pi)/sqrt(2) = sqrt(pi). Monte-Carlo agreement
    // within a few percent suffices here.
    auto a = make_shard(AnalyticDistribution::gaussian({0, 0}, Mat2::identity()), 4000, 5).points;
    auto b =
        make_shard(AnalyticDistribution::gaussian({3, 0}, Mat2::identity()), 4000, 6).points;
    // closed form for the cross term: E||N((3,0), 2I)|| has no elementary
    // form; sanity-bound instead: 2*3 - 2*sqrt(pi) < D < 2*(3+2) - 2*sqrt(pi)
    const double d = energy_distance(a, b, 1);
    CHECK(d > 2.0 * 3.0 - 2.0 * std::sqrt(3.14159265358979) - 0.2);
    CHECK(d < 2.0 * 5.0);
}

TEST_CASE("nearest-neighbour distances on a crafted pair") {
    std::vector<Vec2> train{{0, 0}, {10, 0}};
    std::vector<Vec2> gen{{3, 4}, {10, 1}, {0, 0}};
    auto rep = nn_distance_distribution(gen, train);
    REQUIRE(rep.distances.size() == 3);
    CHECK(rep.distances[0] == doctest::Approx(5.0));
    CHECK(rep.distances[1] == doctest::Approx(1.0));
    CHECK(rep.distances[2] == 0.0);
    CHECK(rep.median == doctest::Approx(1.0));
}

TEST_CASE("nn quantiles interpolate linearly") {
    std::vector<Vec2> train{{0, 0}};
    std::vector<Vec2> gen;
    for (int i = 1; i <= 100; ++i) gen.push_back({double(i), 0.0});  // distances 1..100
    auto rep = nn_distance_distribution(gen, train);
    CHECK(rep.median == doctest::Approx(50.5));       // midpoint of 50, 51
    CHECK(rep.p05 == doctest::Approx(5.95));          // 0.05 * 99 + 1
    CHECK_THROWS_AS((void)nn_distance_distribution(gen, {}), ValidationError);
    CHECK_THROWS_AS((void)nn_distance_distribution({}, train), ValidationError);
}

TEST_CASE("mode fractions count nearest centers, ties to the lower index") {
    std::vector<Vec2> centers{{-2, 0}, {2, 0}};
    std::vector<Vec2> samples{{-2.1, 0}, {-1.0, 0}, {1.5, 0}, {0.0, 0.0}};  // tie at origin
    auto f = mode_fractions(samples, centers);
    REQUIRE(f.size() == 2);
    CHECK(f[0] == doctest::Approx(0.75));
    CHECK(f[1] == doctest::Approx(0.25));
    CHECK_THROWS_AS((void)mode_fractions(samples, {}), ValidationError);
    CHECK_THROWS_AS((void)mode_fractions({}, centers), ValidationError);
}

TEST_CASE("probe sets are reproducible with uniform times") {
    auto a = make_probe_set(200, 3);
    auto b = make_probe_set(200, 3);
    auto c = make_probe_set(200, 4);
    REQUIRE(a.size() == 200);
    bool all_equal = true;
    for (std::size_t i = 0; i < a.size(); ++i) {
        all_equal &= a[i].x == b[i].x && a[i].t == b[i].t;
        CHECK(a[i].t >= kTimeFloor);
        CHECK(a[i].t <= 1.0);
        CHECK_FALSE(a[i].label.has_value());
    }
    CHECK(all_equal);
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) differs |= a[i].x != c[i].x;
    CHECK(differs);
}

TEST_CASE("linearization gap vanishes for duplicates and lone models") {
    ArchDescriptor arch;
    arch.hidden = {8};
    arch.time_embed_dim = 4;
    Checkpoint cp = fresh_checkpoint(arch, NoiseSchedule(), 1);
    auto probes = make_probe_set(64, 9);
    CHECK(linearization_gap({cp, cp}, {0.5, 0.5}, probes) == 0.0);
    CHECK(linearization_gap({cp}, {1.0}, probes) == 0.0);
}

TEST_CASE("linearization gap grows with the spread of the constituents") {
    ArchDescriptor arch;
    arch.hidden = {8};
    arch.time_embed_dim = 4;
    Checkpoint base = fresh_checkpoint(arch, NoiseSchedule(), 2);
    auto probes = make_probe_set(128, 11);

    auto perturbed = [&](double scale) {
        Checkpoint cp = base;
        CounterRng rng(77);
        for (double& w : cp.weights) w += scale * rng.uniform(-1.0, 1.0);
        cp.ancestor_hash = base.ancestor_hash;
        return cp;
    };
    const double g1 = linearization_gap({base, perturbed(0.3)}, {0.5, 0.5}, probes);
    const double g2 = linearization_gap({base, perturbed(0.1)}, {0.5, 0.5}, probes);
    const double g3 = linearization_gap({base, perturbed(0.03)}, {0.5, 0.5}, probes);
    CHECK(g1 > g2);
    CHECK(g2 > g3);
    CHECK(g3 > 0.0);
}

TEST_CASE("eval report serialization carries its config") {
    EvalReport rep;
    rep.metric = "energy";
    rep.value = 1.25;
    rep.input_hashes = {"abc", "def"};
    rep.seed = 7;
    rep.config = {{"n", 100}};
    auto j = rep.to_json();
    CHECK(j.at("metric") == "energy");
    CHECK(j.at("value") == 1.25);
    CHECK(j.at("inputs").size() == 2);
    CHECK(j.at("seed") == 7);
    CHECK(j.at("config").at("n") == 100);
}

TEST_SUITE_END();
