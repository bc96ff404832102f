#include "dsoup/evaluation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "dsoup/errors.hpp"
#include "dsoup/rng.hpp"
#include "dsoup/souping.hpp"

namespace dsoup {

nlohmann::json EvalReport::to_json() const {
    return {{"metric", metric},
            {"value", value},
            {"inputs", input_hashes},
            {"seed", seed},
            {"config", config}};
}

MomentsError moments_error(const std::vector<Vec2>& samples, const Gaussian& target) {
    if (samples.size() < 2) throw ValidationError("moments: need at least 2 samples");
    Gaussian fit = fit_gaussian(samples);
    MomentsError e;
    e.mean_err = {std::abs(fit.mean.x - target.mean.x), std::abs(fit.mean.y - target.mean.y)};
    e.cov_err = (fit.cov - target.cov).frobenius();
    return e;
}

Gaussian fit_gaussian(const std::vector<Vec2>& samples) {
    if (samples.empty()) throw ValidationError("fit: no samples");
    const double inv_n = 1.0 / double(samples.size());
    KahanSum mx, my;
    for (const auto& p : samples) {
        mx.add(p.x);
        my.add(p.y);
    }
    Gaussian g;
    g.mean = {mx.value() * inv_n, my.value() * inv_n};
    KahanSum cxx, cxy, cyy;
    for (const auto& p : samples) {
        double dx = p.x - g.mean.x, dy = p.y - g.mean.y;
        cxx.add(dx * dx);
        cxy.add(dx * dy);
        cyy.add(dy * dy);
    }
    g.cov = {cxx.value() * inv_n, cxy.value() * inv_n, cxy.value() * inv_n, cyy.value() * inv_n};
    return g;
}

namespace {

std::uint64_t points_fingerprint(const std::vector<Vec2>& pts) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    auto mix = [&](double v) {
        std::uint64_t u = std::bit_cast<std::uint64_t>(v);
        for (int i = 0; i < 8; ++i) {
            h ^= (u >> (8 * i)) & 0xFF;
            h *= 0x100000001B3ull;
        }
    };
    for (const auto& p : pts) {
        mix(p.x);
        mix(p.y);
    }
    return h;
}

std::vector<Vec2> subsample(const std::vector<Vec2>& pts, std::size_t target, std::uint64_t seed) {
    if (pts.size() <= target) return pts;
    // stream keyed on content so a==b keeps picking identical subsets
    CounterRng rng(derive_stream(derive_stream(seed, points_fingerprint(pts)), pts.size()));
    std::vector<std::size_t> idx(pts.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (std::size_t i = 0; i < target; ++i) {
        std::size_t j = i + std::size_t(rng.index(idx.size() - i));
        std::swap(idx[i], idx[j]);
    }
    std::vector<Vec2> out(target);
    for (std::size_t i = 0; i < target; ++i) out[i] = pts[idx[i]];
    return out;
}

double mean_pair_distance(const std::vector<Vec2>& u, const std::vector<Vec2>& v) {
    KahanSum s;
    for (const auto& a : u)
        for (const auto& b : v) {
            double dx = a.x - b.x, dy = a.y - b.y;
            s.add(std::sqrt(dx * dx + dy * dy));
        }
    return s.value() / (double(u.size()) * double(v.size()));
}

}  // namespace

double energy_distance(const std::vector<Vec2>& a, const std::vector<Vec2>& b, std::uint64_t seed,
                       std::size_t max_points) {
    if (a.empty() || b.empty()) throw ValidationError("energy distance: empty sample set");
    std::vector<Vec2> u = subsample(a, max_points, seed);
    std::vector<Vec2> v = subsample(b, max_points, seed);
    double ab = mean_pair_distance(u, v);
    double aa = mean_pair_distance(u, u);
    double bb = mean_pair_distance(v, v);
    return std::max(2.0 * ab - aa - bb, 0.0);
}

namespace {

double quantile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw ValidationError("quantile of empty set");
    if (sorted.size() == 1) return sorted[0];
    double h = p * double(sorted.size() - 1);
    std::size_t lo = std::size_t(h);
    if (lo + 1 >= sorted.size()) return sorted.back();
    double frac = h - double(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

NnReport nn_distance_distribution(const std::vector<Vec2>& generated,
                                  const std::vector<Vec2>& train) {
    if (generated.empty() || train.empty())
        throw ValidationError("nn distances: empty sample set");
    NnReport rep;
    rep.distances.reserve(generated.size());
    for (const auto& g : generated) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& t : train) {
            double dx = g.x - t.x, dy = g.y - t.y;
            best = std::min(best, dx * dx + dy * dy);
        }
        rep.distances.push_back(std::sqrt(best));
    }
    std::vector<double> sorted = rep.distances;
    std::sort(sorted.begin(), sorted.end());
    rep.median = quantile_sorted(sorted, 0.5);
    rep.p05 = quantile_sorted(sorted, 0.05);
    return rep;
}

std::vector<double> mode_fractions(const std::vector<Vec2>& samples,
                                   const std::vector<Vec2>& centers) {
    if (centers.size() < 2) throw ValidationError("mode fractions: need >= 2 centers");
    if (samples.empty()) throw ValidationError("mode fractions: no samples");
    std::vector<std::size_t> counts(centers.size(), 0);
    for (const auto& s : samples) {
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < centers.size(); ++c) {
            double dx = s.x - centers[c].x, dy = s.y - centers[c].y;
            double d = dx * dx + dy * dy;
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        ++counts[best];
    }
    std::vector<double> out(centers.size());
    for (std::size_t c = 0; c < centers.size(); ++c)
        out[c] = double(counts[c]) / double(samples.size());
    return out;
}

std::vector<ProbePoint> make_probe_set(int n, std::uint64_t seed) {
    if (n < 1) throw ValidationError("probe set: n must be >= 1");
    CounterRng rng(derive_stream(seed, stream_tag("probe")));
    std::vector<ProbePoint> out;
    out.reserve(std::size_t(n));
    for (int i = 0; i < n; ++i) {
        auto [x, y] = rng.normal_pair();
        double t = kTimeFloor + (1.0 - kTimeFloor) * rng.uniform01();
        out.push_back({{x, y}, t, std::nullopt});
    }
    return out;
}

double linearization_gap(const std::vector<Checkpoint>& checkpoints,
                         const std::vector<double>& coeffs,
                         const std::vector<ProbePoint>& probes) {
    if (probes.empty()) throw ValidationError("linearization gap: empty probe set");
    auto [souped, recipe] = soup(checkpoints, coeffs);

    // representative checkpoint per coalesced recipe entry
    std::vector<const Checkpoint*> reps;
    std::vector<double> ks;
    for (const auto& e : recipe.entries) {
        for (const auto& cp : checkpoints) {
            if (cp.content_hash() == e.hash) {
                reps.push_back(&cp);
                ks.push_back(e.k);
                break;
            }
        }
    }

    Network net(souped.arch);
    auto ws = net.make_workspace();
    KahanSum total;
    for (const auto& pr : probes) {
        Vec2 es = net.forward(souped.weights, pr.x, pr.t, pr.label, ws);
        Vec2 ens{0.0, 0.0};
        for (std::size_t m = 0; m < reps.size(); ++m) {
            Vec2 e = net.forward(reps[m]->weights, pr.x, pr.t, pr.label, ws);
            ens.x += ks[m] * e.x;
            ens.y += ks[m] * e.y;
        }
        double dx = es.x - ens.x, dy = es.y - ens.y;
        double num = std::sqrt(dx * dx + dy * dy);
        double den = std::sqrt(ens.x * ens.x + ens.y * ens.y) + 1e-12;
        total.add(num / den);
    }
    return total.value() / double(probes.size());
}

}  // namespace dsoup
