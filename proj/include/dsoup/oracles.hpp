#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsoup/distribution.hpp"
#include "dsoup/linalg.hpp"
#include "dsoup/schedule.hpp"

namespace dsoup {

/// Uniform integration domain for grid divergences.
struct GridSpec {
    Vec2 lower{-8.0, -8.0};
    Vec2 upper{8.0, 8.0};
    int resolution = 512;  // points per axis

    void validate() const;
    nlohmann::json to_json() const;
    static GridSpec from_json(const nlohmann::json& j);
};

/// Result of a divergence-against-safe-model check: epsilon is the divergence
/// in nats, with the grid and the fraction of each density's mass it captured.
struct NafReport {
    double epsilon = 0.0;
    std::string divergence = "kl";
    nlohmann::json p_descriptor;
    nlohmann::json safe_descriptor;
    GridSpec grid;
    double mass_p = 0.0;
    double mass_q = 0.0;

    nlohmann::json to_json() const;
};

/// Diffuse a distribution to time t: each component (mu, cov) becomes
/// (gamma mu, gamma^2 cov + sigma^2 I); mixture weights are unchanged.
AnalyticDistribution marginal_at(const AnalyticDistribution& dist, double t,
                                 const NoiseSchedule& s);

/// -cov^{-1} (x - mu)
Vec2 gaussian_score(const Gaussian& g, const Vec2& x);

/// Score of sum_i lambda_i N_i at x: responsibility-weighted Gaussian scores,
/// with responsibilities computed via log-sum-exp. lambdas must be >= 0 and
/// sum to 1 within 1e-9.
Vec2 mixture_score(const std::vector<Gaussian>& components, const std::vector<double>& lambdas,
                   const Vec2& x);

/// Score of any analytic distribution at x.
Vec2 analytic_score(const AnalyticDistribution& dist, const Vec2& x);

/// Normalized geometric mean of Gaussians is Gaussian: precision is the mean
/// of precisions, mean is the precision-weighted mean of means.
Gaussian geometric_mean_gaussians(const std::vector<Gaussian>& gs);

/// Average of the per-distribution marginal scores at time t — the analytic
/// counterpart of a uniform soup's predicted score.
Vec2 geometric_mean_score(const std::vector<AnalyticDistribution>& dists, double t,
                          const NoiseSchedule& s, const Vec2& x);

/// Responsibility-weighted combination of per-distribution marginal scores at
/// time t — the exact score of the lambda-weighted data union.
Vec2 arithmetic_mean_score(const std::vector<AnalyticDistribution>& dists,
                           const std::vector<double>& lambdas, double t, const NoiseSchedule& s,
                           const Vec2& x);

/// Default domain: [-8,8]^2 at 512/axis, expanded if either distribution's
/// 4-sigma box sticks out.
GridSpec default_grid(const AnalyticDistribution& p, const AnalyticDistribution& q);

/// Trapezoidal KL(p || q) over the grid. Both densities must leave >= 99.9%
/// of their mass inside the grid, otherwise a coverage error names the
/// deficient one.
NafReport kl_grid(const AnalyticDistribution& p, const AnalyticDistribution& q,
                  const GridSpec& grid);

}  // namespace dsoup
