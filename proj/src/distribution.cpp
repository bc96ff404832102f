#include "dsoup/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "dsoup/errors.hpp"

namespace dsoup {

namespace {
constexpr double kTwoPi = 2.0 * 3.14159265358979323846;
constexpr double kMinEigenvalue = 1e-9;
constexpr double kWeightTol = 1e-12;
}  // namespace

void validate_covariance(const Mat2& cov) {
    if (!std::isfinite(cov.a) || !std::isfinite(cov.b) || !std::isfinite(cov.c) ||
        !std::isfinite(cov.d)) {
        throw ValidationError("covariance has non-finite entries");
    }
    if (!cov.symmetric()) {
        throw ValidationError("covariance is not symmetric");
    }
    if (cov.min_eigenvalue_sym() <= kMinEigenvalue) {
        throw ValidationError("covariance is not positive definite (min eigenvalue <= 1e-9)");
    }
}

double Gaussian::log_density(const Vec2& x) const {
    const Mat2 prec = cov.inverse();
    const Vec2 d = x - mean;
    const double quad = dot(d, prec * d);
    return -std::log(kTwoPi) - 0.5 * std::log(cov.det()) - 0.5 * quad;
}

Vec2 Gaussian::sample(CounterRng& rng) const {
    const Mat2 L = cov.cholesky_lower();
    const auto [z0, z1] = rng.normal_pair();
    return {mean.x + L.a * z0, mean.y + L.c * z0 + L.d * z1};
}

AnalyticDistribution::AnalyticDistribution(Kind kind, std::vector<MixtureComponent> components)
    : kind_(kind), components_(std::move(components)) {}

AnalyticDistribution AnalyticDistribution::gaussian(const Vec2& mean, const Mat2& cov) {
    validate_covariance(cov);
    if (!is_finite(mean)) throw ValidationError("mean has non-finite entries");
    return AnalyticDistribution(Kind::Gaussian, {{1.0, {mean, cov}}});
}

AnalyticDistribution AnalyticDistribution::mixture(std::vector<MixtureComponent> components) {
    if (components.empty()) throw ValidationError("mixture needs at least one component");
    KahanSum wsum;
    for (const auto& comp : components) {
        if (!(comp.weight > 0.0) || !std::isfinite(comp.weight)) {
            throw ValidationError("mixture weights must be positive");
        }
        if (!is_finite(comp.gaussian.mean)) throw ValidationError("mean has non-finite entries");
        validate_covariance(comp.gaussian.cov);
        wsum.add(comp.weight);
    }
    if (std::abs(wsum.value() - 1.0) > kWeightTol) {
        throw ValidationError("mixture weights must sum to 1 (within 1e-12)");
    }
    const Kind kind = components.size() == 1 ? Kind::Gaussian : Kind::Mixture;
    return AnalyticDistribution(kind, std::move(components));
}

double AnalyticDistribution::log_density(const Vec2& x) const {
    double max_l = -std::numeric_limits<double>::infinity();
    std::vector<double> ls(components_.size());
    for (std::size_t i = 0; i < components_.size(); ++i) {
        ls[i] = std::log(components_[i].weight) + components_[i].gaussian.log_density(x);
        max_l = std::max(max_l, ls[i]);
    }
    if (!std::isfinite(max_l)) return max_l;
    double acc = 0.0;
    for (double l : ls) acc += std::exp(l - max_l);
    return max_l + std::log(acc);
}

Vec2 AnalyticDistribution::sample(CounterRng& rng) const {
    std::size_t pick = 0;
    if (components_.size() > 1) {
        const double u = rng.uniform01();
        double cdf = 0.0;
        for (std::size_t i = 0; i < components_.size(); ++i) {
            cdf += components_[i].weight;
            if (u < cdf || i + 1 == components_.size()) {
                pick = i;
                break;
            }
        }
    }
    return components_[pick].gaussian.sample(rng);
}

Vec2 AnalyticDistribution::mean() const {
    Vec2 m{0.0, 0.0};
    for (const auto& comp : components_) m += comp.weight * comp.gaussian.mean;
    return m;
}

Mat2 AnalyticDistribution::covariance() const {
    // E[xx^T] - mu mu^T with E[xx^T] = sum_i w_i (Sigma_i + mu_i mu_i^T)
    const Vec2 m = mean();
    Mat2 second{};
    for (const auto& comp : components_) {
        const Vec2& mu = comp.gaussian.mean;
        const Mat2& S = comp.gaussian.cov;
        second = second + comp.weight * Mat2{S.a + mu.x * mu.x, S.b + mu.x * mu.y,
                                             S.c + mu.y * mu.x, S.d + mu.y * mu.y};
    }
    return second - Mat2{m.x * m.x, m.x * m.y, m.y * m.x, m.y * m.y};
}

nlohmann::json AnalyticDistribution::to_json() const {
    nlohmann::json comps = nlohmann::json::array();
    for (const auto& comp : components_) {
        comps.push_back({
            {"weight", comp.weight},
            {"mean", {comp.gaussian.mean.x, comp.gaussian.mean.y}},
            {"cov",
             {{comp.gaussian.cov.a, comp.gaussian.cov.b}, {comp.gaussian.cov.c, comp.gaussian.cov.d}}},
        });
    }
    return {{"kind", kind_ == Kind::Gaussian ? "gaussian" : "mixture"}, {"components", comps}};
}

AnalyticDistribution AnalyticDistribution::from_json(const nlohmann::json& j) {
    try {
        const std::string kind = j.at("kind").get<std::string>();
        if (kind != "gaussian" && kind != "mixture") {
            throw ValidationError("unknown distribution kind: " + kind);
        }
        std::vector<MixtureComponent> comps;
        for (const auto& c : j.at("components")) {
            MixtureComponent comp;
            comp.weight = c.at("weight").get<double>();
            const auto& m = c.at("mean");
            comp.gaussian.mean = {m.at(0).get<double>(), m.at(1).get<double>()};
            const auto& cv = c.at("cov");
            comp.gaussian.cov = {cv.at(0).at(0).get<double>(), cv.at(0).at(1).get<double>(),
                                 cv.at(1).at(0).get<double>(), cv.at(1).at(1).get<double>()};
            comps.push_back(comp);
        }
        if (kind == "gaussian" && comps.size() != 1) {
            throw ValidationError("kind 'gaussian' requires exactly one component");
        }
        return mixture(std::move(comps));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("bad distribution JSON: ") + e.what());
    }
}

bool AnalyticDistribution::operator==(const AnalyticDistribution& o) const {
    if (kind_ != o.kind_ || components_.size() != o.components_.size()) return false;
    for (std::size_t i = 0; i < components_.size(); ++i) {
        if (components_[i].weight != o.components_[i].weight ||
            components_[i].gaussian.mean != o.components_[i].gaussian.mean ||
            components_[i].gaussian.cov != o.components_[i].gaussian.cov) {
            return false;
        }
    }
    return true;
}

}  // namespace dsoup
