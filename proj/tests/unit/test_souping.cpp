#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "dsoup/errors.hpp"
#include "dsoup/souping.hpp"

using namespace dsoup;

namespace {

ArchDescriptor tiny_arch() {
    ArchDescriptor a;
    a.hidden = {4};
    a.time_embed_dim = 4;
    return a;
}

// hand-built checkpoints sharing one ancestor; weights set directly so soup
// algebra can be checked against pencil-and-paper results
std::vector<Checkpoint> family(int n, std::uint64_t seed = 1) {
    Checkpoint base = fresh_checkpoint(tiny_arch(), NoiseSchedule(), seed);
    std::vector<Checkpoint> out(std::size_t(n), base);
    CounterRng rng(derive_stream(seed, "family"));
    for (int i = 1; i < n; ++i)
        for (double& w : out[std::size_t(i)].weights) w += rng.uniform(-0.1, 0.1);
    for (auto& cp : out) cp.ancestor_hash = base.content_hash();
    return out;
}

double max_rel_err(const std::vector<double>& a, const std::vector<double>& b) {
    REQUIRE(a.size() == b.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::abs(a[i] - b[i]) / (std::abs(b[i]) + 1e-300));
    return worst;
}

// metric that needs no sampling: negative distance of the weight vector to a
// fixed target, so the optimal subset is computable by enumeration
MetricFn weight_target_metric(std::vector<double> target) {
    return [target = std::move(target)](const Checkpoint& cp) {
        double d = 0.0;
        for (std::size_t i = 0; i < cp.weights.size(); ++i) {
            const double r = cp.weights[i] - target[i];
            d += r * r;
        }
        return -std::sqrt(d);
    };
}

Checkpoint uniform_of(const std::vector<Checkpoint>& cps, const std::vector<int>& idx) {
    std::vector<Checkpoint> sel;
    for (int i : idx) sel.push_back(cps[std::size_t(i)]);
    return soup(sel, std::vector<double>(sel.size(), 1.0 / double(sel.size()))).first;
}

}  // namespace

TEST_SUITE_BEGIN("souping");

TEST_CASE("souping a model with itself returns it bit-identically") {
    auto fam = family(1);
    auto [cp, recipe] = soup({fam[0], fam[0]}, {0.5, 0.5});
    CHECK(cp.weights == fam[0].weights);
    CHECK(cp.content_hash() == fam[0].content_hash());
    // duplicates coalesce into one entry with the summed coefficient
    REQUIRE(recipe.entries.size() == 1);
    CHECK(recipe.entries[0].k == 1.0);
}

TEST_CASE("unequal coefficients on duplicates still coalesce") {
    auto fam = family(2);
    auto [cp, recipe] = soup({fam[0], fam[1], fam[0]}, {0.25, 0.5, 0.25});
    REQUIRE(recipe.entries.size() == 2);
    CHECK(recipe.entries[0].hash == fam[0].content_hash());
    CHECK(recipe.entries[0].k == 0.5);
    CHECK(recipe.entries[1].k == 0.5);
}

TEST_CASE("two-model average matches direct arithmetic") {
    auto fam = family(2);
    auto [cp, recipe] = soup(fam, {0.5, 0.5});
    for (std::size_t i = 0; i < cp.weights.size(); ++i)
        CHECK(cp.weights[i] ==
              doctest::Approx(0.5 * fam[0].weights[i] + 0.5 * fam[1].weights[i]).epsilon(1e-15));
    CHECK(recipe.ancestor == fam[0].ancestor_hash);
    CHECK(cp.ancestor_hash == fam[0].ancestor_hash);
}

TEST_CASE("single-entry soup selects that model exactly") {
    auto fam = family(2);
    auto [cp, recipe] = soup({fam[1]}, {1.0});
    CHECK(cp.weights == fam[1].weights);
    CHECK(recipe.entries.size() == 1);
}

TEST_CASE("coefficients are renormalized when nearly one, rejected when not") {
    auto fam = family(2);
    auto ok = soup(fam, {0.5 + 2e-10, 0.5});  // off by 2e-10, inside the gate
    double sum = 0.0;
    for (const auto& e : ok.second.entries) sum += e.k;
    CHECK(std::abs(sum - 1.0) <= 1e-12);
    CHECK_THROWS_AS((void)soup(fam, {0.6, 0.5}), ValidationError);
    CHECK_THROWS_AS((void)soup(fam, {1.5, -0.5}), ValidationError);
    CHECK_THROWS_AS((void)soup(fam, {1.0, 0.0}), ValidationError);
    CHECK_THROWS_AS((void)soup({}, {}), ValidationError);
    CHECK_THROWS_AS((void)soup(fam, {1.0}), ValidationError);
}

TEST_CASE("arch and ancestor mismatches are distinct errors") {
    auto fam = family(2);
    Checkpoint other = fam[1];
    other.arch.hidden = {4, 4};
    other.weights.resize(other.arch.param_count(), 0.0);
    CHECK_THROWS_AS((void)soup({fam[0], other}, {0.5, 0.5}), ArchMismatchError);

    Checkpoint stranger = fresh_checkpoint(tiny_arch(), NoiseSchedule(), 777);
    CHECK_THROWS_AS((void)soup({fam[0], stranger}, {0.5, 0.5}), AncestorMismatchError);
}

TEST_CASE("souped weights stay inside the componentwise envelope") {
    auto fam = family(4);
    auto [cp, _] = soup(fam, {0.1, 0.2, 0.3, 0.4});
    for (std::size_t i = 0; i < cp.weights.size(); ++i) {
        double lo = fam[0].weights[i], hi = lo;
        for (const auto& m : fam) {
            lo = std::min(lo, m.weights[i]);
            hi = std::max(hi, m.weights[i]);
        }
        CHECK(cp.weights[i] >= lo - 1e-15);
        CHECK(cp.weights[i] <= hi + 1e-15);
    }
}

TEST_CASE("soup is permutation-invariant to within summation noise") {
    auto fam = family(6, 9);
    std::vector<double> k{0.05, 0.1, 0.15, 0.2, 0.24, 0.26};
    auto base = soup(fam, k).first;
    std::vector<int> order(6);
    std::iota(order.begin(), order.end(), 0);
    for (int trial = 0; trial < 5; ++trial) {
        std::next_permutation(order.begin(), order.end());
        std::vector<Checkpoint> cps;
        std::vector<double> kk;
        for (int i : order) {
            cps.push_back(fam[std::size_t(i)]);
            kk.push_back(k[std::size_t(i)]);
        }
        CHECK(max_rel_err(soup(cps, kk).first.weights, base.weights) < 1e-13);
    }
}

TEST_CASE("two-model unlearn recovers the other constituent") {
    auto fam = family(2);
    auto [souped, recipe] = soup(fam, {0.5, 0.5});
    auto [back, rest] = unlearn(souped, recipe, fam[1].content_hash(), fam[1]);
    CHECK(max_rel_err(back.weights, fam[0].weights) < 1e-12);
    REQUIRE(rest.entries.size() == 1);
    CHECK(rest.entries[0].hash == fam[0].content_hash());
    CHECK(rest.entries[0].k == 1.0);
}

TEST_CASE("nine-model leave-one-out equals the fresh eight-model soup") {
    auto fam = family(9, 4);
    std::vector<double> k(9, 1.0 / 9.0);
    auto [souped, recipe] = soup(fam, k);
    for (int drop = 0; drop < 9; ++drop) {
        auto [after, rest] = unlearn(souped, recipe, fam[std::size_t(drop)].content_hash(),
                                     fam[std::size_t(drop)]);
        std::vector<Checkpoint> remaining;
        for (int i = 0; i < 9; ++i)
            if (i != drop) remaining.push_back(fam[std::size_t(i)]);
        auto fresh = soup(remaining, std::vector<double>(8, 0.125)).first;
        CHECK(max_rel_err(after.weights, fresh.weights) < 1e-12);
        double sum = 0.0;
        for (const auto& e : rest.entries) sum += e.k;
        CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
}

TEST_CASE("unlearn then re-add restores the original soup") {
    auto fam = family(3, 6);
    auto [souped, recipe] = soup(fam, {0.2, 0.3, 0.5});
    auto [without, rest] = unlearn(souped, recipe, fam[1].content_hash(), fam[1]);
    // re-add with the original coefficient: 0.7 * rest + 0.3 * removed
    std::vector<Checkpoint> readd{without, fam[1]};
    auto restored = soup(readd, {0.7, 0.3}).first;
    CHECK(max_rel_err(restored.weights, souped.weights) < 1e-12);
    (void)rest;
}

TEST_CASE("unlearn rejects unknown hashes, sole entries, and forged weights") {
    auto fam = family(2);
    auto [souped, recipe] = soup(fam, {0.5, 0.5});
    CHECK_THROWS_AS((void)unlearn(souped, recipe, "deadbeef", fam[1]), NotFoundError);
    CHECK_THROWS_AS((void)unlearn(souped, recipe, fam[0].content_hash(), fam[1]),
                    ValidationError);  // supplied weights don't match the hash
    auto [single, single_recipe] = soup({fam[0]}, {1.0});
    CHECK_THROWS_AS(
        (void)unlearn(single, single_recipe, fam[0].content_hash(), fam[0]),
        ValidationError);
}

TEST_CASE("greedy with one candidate returns it at full weight") {
    auto fam = family(1);
    auto res = greedy_soup(fam, weight_target_metric(fam[0].weights));
    CHECK(res.checkpoint.content_hash() == fam[0].content_hash());
    REQUIRE(res.recipe.entries.size() == 1);
    CHECK(res.recipe.entries[0].k == 1.0);
}

TEST_CASE("identical candidates collapse to one under strict improvement") {
    auto fam = family(1);
    std::vector<Checkpoint> dup{fam[0], fam[0], fam[0]};
    auto res = greedy_soup(dup, weight_target_metric(fam[0].weights));
    CHECK(res.recipe.entries.size() == 1);
    // the trace records the rejections
    int rejected = 0;
    for (const auto& step : res.trace)
        if (step.at("decision") == "rejected") ++rejected;
    CHECK(rejected == 2);
}

TEST_CASE("greedy dominates every individual and agrees with brute force") {
    auto fam = family(3, 11);
    // target = average of models 0 and 1, so {0,1} is the unique best subset
    std::vector<double> target(fam[0].weights.size());
    for (std::size_t i = 0; i < target.size(); ++i)
        target[i] = 0.5 * (fam[0].weights[i] + fam[1].weights[i]);
    auto metric = weight_target_metric(target);

    auto res = greedy_soup(fam, metric);
    double best_individual = -1e300;
    for (const auto& cp : fam) best_individual = std::max(best_individual, metric(cp));
    CHECK(res.metric >= best_individual);

    // enumerate all 7 nonempty uniform subsets
    double best_subset = -1e300;
    std::vector<int> best_idx;
    for (int mask = 1; mask < 8; ++mask) {
        std::vector<int> idx;
        for (int i = 0; i < 3; ++i)
            if (mask & (1 << i)) idx.push_back(i);
        const double v = metric(uniform_of(fam, idx));
        if (v > best_subset) {
            best_subset = v;
            best_idx = idx;
        }
    }
    CHECK(best_idx == std::vector<int>{0, 1});
    CHECK(res.metric == doctest::Approx(best_subset));  // greedy finds it here
}

TEST_CASE("reverse greedy prunes the adversarial member") {
    auto fam = family(3, 13);
    // make model 2 a far outlier relative to the target
    for (double& w : fam[2].weights) w += 5.0;
    std::vector<double> target(fam[0].weights.size());
    for (std::size_t i = 0; i < target.size(); ++i)
        target[i] = 0.5 * (fam[0].weights[i] + fam[1].weights[i]);
    auto metric = weight_target_metric(target);

    auto res = reverse_greedy_soup(fam, metric);
    auto uniform_all = uniform_of(fam, {0, 1, 2});
    CHECK(res.metric >= metric(uniform_all));
    CHECK(res.recipe.entries.size() == 2);
    for (const auto& e : res.recipe.entries) CHECK(e.hash != fam[2].content_hash());
}

TEST_CASE("reverse greedy keeps everything when members are identical") {
    auto fam = family(1);
    std::vector<Checkpoint> dup{fam[0], fam[0]};
    auto res = reverse_greedy_soup(dup, weight_target_metric(fam[0].weights));
    // duplicates are one distinct model; nothing can be removed
    CHECK(res.checkpoint.content_hash() == fam[0].content_hash());
    CHECK(res.recipe.entries.size() == 1);
}

TEST_CASE("greedy rejects an empty candidate list") {
    CHECK_THROWS_AS((void)greedy_soup({}, weight_target_metric({})), ValidationError);
    CHECK_THROWS_AS((void)reverse_greedy_soup({}, weight_target_metric({})), ValidationError);
}

TEST_CASE("greedy trace is a faithful decision log") {
    auto fam = family(3, 17);
    auto res = greedy_soup(fam, weight_target_metric(fam[0].weights));
    REQUIRE(res.trace.is_array());
    CHECK(res.trace.size() == 3);
    CHECK(res.trace[0].at("decision") == "seed");
    for (const auto& step : res.trace) {
        CHECK(step.contains("hash"));
        CHECK(step.contains("individual"));
    }
}

TEST_SUITE_END();
