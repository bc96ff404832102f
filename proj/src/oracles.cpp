#include "dsoup/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dsoup/errors.hpp"

namespace dsoup {

void GridSpec::validate() const {
    if (!(lower.x < upper.x) || !(lower.y < upper.y))
        throw ValidationError("grid: lower must be strictly below upper");
    if (resolution < 16) throw ValidationError("grid: resolution must be >= 16");
}

nlohmann::json GridSpec::to_json() const {
    return {{"lower", {lower.x, lower.y}},
            {"upper", {upper.x, upper.y}},
            {"resolution", resolution}};
}

GridSpec GridSpec::from_json(const nlohmann::json& j) {
    GridSpec g;
    try {
        g.lower = {j.at("lower").at(0).get<double>(), j.at("lower").at(1).get<double>()};
        g.upper = {j.at("upper").at(0).get<double>(), j.at("upper").at(1).get<double>()};
        g.resolution = j.at("resolution").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("grid json: ") + e.what());
    }
    g.validate();
    return g;
}

nlohmann::json NafReport::to_json() const {
    return {{"epsilon", epsilon},
            {"divergence", divergence},
            {"p", p_descriptor},
            {"safe", safe_descriptor},
            {"grid", grid.to_json()},
            {"mass_covered", {{"p", mass_p}, {"q", mass_q}}}};
}

AnalyticDistribution marginal_at(const AnalyticDistribution& dist, double t,
                                 const NoiseSchedule& s) {
    auto [gamma, sigma] = s.eval(t);
    double g2 = gamma * gamma, s2 = sigma * sigma;
    std::vector<MixtureComponent> comps;
    for (const auto& c : dist.components()) {
        Gaussian g;
        g.mean = {gamma * c.gaussian.mean.x, gamma * c.gaussian.mean.y};
        g.cov = c.gaussian.cov * g2 + Mat2::diag(s2, s2);
        comps.push_back({c.weight, g});
    }
    return AnalyticDistribution::mixture(comps);
}

Vec2 gaussian_score(const Gaussian& g, const Vec2& x) {
    Mat2 prec = g.cov.inverse();
    Vec2 d{x.x - g.mean.x, x.y - g.mean.y};
    Vec2 v = prec * d;
    return {-v.x, -v.y};
}

Vec2 mixture_score(const std::vector<Gaussian>& components, const std::vector<double>& lambdas,
                   const Vec2& x) {
    if (components.empty()) throw ValidationError("mixture score: no components");
    if (components.size() != lambdas.size())
        throw ValidationError("mixture score: component/weight count mismatch");
    KahanSum total;
    for (double l : lambdas) {
        if (!(l >= 0.0) || !std::isfinite(l))
            throw ValidationError("mixture score: weights must be >= 0 and finite");
        total.add(l);
    }
    if (std::abs(total.value() - 1.0) > 1e-9)
        throw ValidationError("mixture score: weights must sum to 1");

    // responsibilities via log-sum-exp so deep tails stay well-defined
    std::vector<double> lw(components.size(), -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < components.size(); ++i)
        if (lambdas[i] > 0.0) lw[i] = std::log(lambdas[i]) + components[i].log_density(x);
    double m = *std::max_element(lw.begin(), lw.end());
    if (!std::isfinite(m)) throw NumericalError("mixture score: all densities vanished");
    double z = 0.0;
    for (double v : lw) z += std::exp(v - m);

    Vec2 out{0.0, 0.0};
    for (std::size_t i = 0; i < components.size(); ++i) {
        if (lambdas[i] <= 0.0) continue;
        double r = std::exp(lw[i] - m) / z;
        Vec2 sc = gaussian_score(components[i], x);
        out.x += r * sc.x;
        out.y += r * sc.y;
    }
    return out;
}

Vec2 analytic_score(const AnalyticDistribution& dist, const Vec2& x) {
    if (dist.kind() == AnalyticDistribution::Kind::Gaussian)
        return gaussian_score(dist.components().front().gaussian, x);
    std::vector<Gaussian> gs;
    std::vector<double> ls;
    for (const auto& c : dist.components()) {
        gs.push_back(c.gaussian);
        ls.push_back(c.weight);
    }
    return mixture_score(gs, ls, x);
}

Gaussian geometric_mean_gaussians(const std::vector<Gaussian>& gs) {
    if (gs.empty()) throw ValidationError("geometric mean: no inputs");
    double inv_n = 1.0 / double(gs.size());
    Mat2 prec{0, 0, 0, 0};
    Vec2 pm{0.0, 0.0};
    for (const auto& g : gs) {
        Mat2 pi = g.cov.inverse();
        prec = prec + pi * inv_n;
        Vec2 v = pi * g.mean;
        pm.x += inv_n * v.x;
        pm.y += inv_n * v.y;
    }
    Gaussian out;
    out.cov = prec.inverse();
    out.mean = out.cov * pm;
    return out;
}

Vec2 geometric_mean_score(const std::vector<AnalyticDistribution>& dists, double t,
                          const NoiseSchedule& s, const Vec2& x) {
    if (dists.empty()) throw ValidationError("geometric mean score: no distributions");
    double inv_n = 1.0 / double(dists.size());
    Vec2 out{0.0, 0.0};
    for (const auto& d : dists) {
        Vec2 sc = analytic_score(marginal_at(d, t, s), x);
        out.x += inv_n * sc.x;
        out.y += inv_n * sc.y;
    }
    return out;
}

Vec2 arithmetic_mean_score(const std::vector<AnalyticDistribution>& dists,
                           const std::vector<double>& lambdas, double t, const NoiseSchedule& s,
                           const Vec2& x) {
    if (dists.empty()) throw ValidationError("arithmetic mean score: no distributions");
    if (dists.size() != lambdas.size())
        throw ValidationError("arithmetic mean score: distribution/weight count mismatch");
    // flatten: the lambda-mixture of mixtures is one big mixture of Gaussians
    std::vector<Gaussian> gs;
    std::vector<double> ls;
    for (std::size_t i = 0; i < dists.size(); ++i) {
        AnalyticDistribution m = marginal_at(dists[i], t, s);
        for (const auto& c : m.components()) {
            gs.push_back(c.gaussian);
            ls.push_back(lambdas[i] * c.weight);
        }
    }
    return mixture_score(gs, ls, x);
}

namespace {

void grow_to_4sigma(const AnalyticDistribution& d, Vec2& lo, Vec2& hi) {
    for (const auto& c : d.components()) {
        double r = 4.0 * std::sqrt(c.gaussian.cov.max_eigenvalue_sym());
        lo.x = std::min(lo.x, c.gaussian.mean.x - r);
        lo.y = std::min(lo.y, c.gaussian.mean.y - r);
        hi.x = std::max(hi.x, c.gaussian.mean.x + r);
        hi.y = std::max(hi.y, c.gaussian.mean.y + r);
    }
}

}  // namespace

GridSpec default_grid(const AnalyticDistribution& p, const AnalyticDistribution& q) {
    GridSpec g;
    grow_to_4sigma(p, g.lower, g.upper);
    grow_to_4sigma(q, g.lower, g.upper);
    return g;
}

NafReport kl_grid(const AnalyticDistribution& p, const AnalyticDistribution& q,
                  const GridSpec& grid) {
    grid.validate();
    const int n = grid.resolution;
    const double hx = (grid.upper.x - grid.lower.x) / (n - 1);
    const double hy = (grid.upper.y - grid.lower.y) / (n - 1);

    KahanSum kl, mass_p, mass_q;
    for (int i = 0; i < n; ++i) {
        double wx = (i == 0 || i == n - 1) ? 0.5 : 1.0;
        double x = grid.lower.x + i * hx;
        for (int j = 0; j < n; ++j) {
            double wy = (j == 0 || j == n - 1) ? 0.5 : 1.0;
            double y = grid.lower.y + j * hy;
            double w = wx * wy * hx * hy;
            double lp = p.log_density({x, y});
            double lq = q.log_density({x, y});
            double pd = std::exp(lp);
            mass_p.add(w * pd);
            mass_q.add(w * std::exp(lq));
            if (pd > 0.0) kl.add(w * pd * (lp - lq));
        }
    }

    NafReport rep;
    rep.grid = grid;
    rep.mass_p = mass_p.value();
    rep.mass_q = mass_q.value();
    rep.p_descriptor = p.to_json();
    rep.safe_descriptor = q.to_json();
    if (rep.mass_p < 0.999)
        throw CoverageError("grid covers only " + std::to_string(rep.mass_p) +
                            " of the candidate density's mass");
    if (rep.mass_q < 0.999)
        throw CoverageError("grid covers only " + std::to_string(rep.mass_q) +
                            " of the safe density's mass");
    rep.epsilon = std::max(kl.value(), 0.0);
    return rep;
}

}  // namespace dsoup
