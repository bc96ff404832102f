#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dsoup/linalg.hpp"
#include "dsoup/rng.hpp"

namespace dsoup {

struct Gaussian {
    Vec2 mean;
    Mat2 cov = Mat2::identity();

    double log_density(const Vec2& x) const;
    Vec2 sample(CounterRng& rng) const;  // mean + L*z, L the lower Cholesky factor
};

struct MixtureComponent {
    double weight = 1.0;
    Gaussian gaussian;
};

/// Gaussian or Gaussian-mixture with closed-form density; the ground-truth
/// generator recorded on every shard so downstream claims stay checkable.
class AnalyticDistribution {
public:
    enum class Kind { Gaussian, Mixture };

    static AnalyticDistribution gaussian(const Vec2& mean, const Mat2& cov);
    static AnalyticDistribution mixture(std::vector<MixtureComponent> components);

    Kind kind() const { return kind_; }
    const std::vector<MixtureComponent>& components() const { return components_; }

    double log_density(const Vec2& x) const;  // log-sum-exp over components
    Vec2 sample(CounterRng& rng) const;

    /// Analytic first and second moments of the full mixture.
    Vec2 mean() const;
    Mat2 covariance() const;

    nlohmann::json to_json() const;
    static AnalyticDistribution from_json(const nlohmann::json& j);

    bool operator==(const AnalyticDistribution& o) const;

private:
    AnalyticDistribution(Kind kind, std::vector<MixtureComponent> components);

    Kind kind_;
    std::vector<MixtureComponent> components_;
};

/// Throws ValidationError unless cov is symmetric (1e-9) with min eigenvalue > 1e-9.
void validate_covariance(const Mat2& cov);

}  // namespace dsoup
