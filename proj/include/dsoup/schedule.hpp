#pragma once

#include <utility>

#include <nlohmann/json_fwd.hpp>

namespace dsoup {

/// Lower time cutoff shared by training-time t sampling and the sampler's
/// terminal time; keeps sigma bounded away from 0.
inline constexpr double kTimeFloor = 1e-3;

/// Variance-preserving schedule with beta linear in t:
///   beta(t)  = beta_min + (beta_max - beta_min) t
///   gamma(t) = exp(-(beta_min t + (beta_max - beta_min) t^2 / 2) / 2)
///   sigma(t) = sqrt(1 - gamma(t)^2)
struct NoiseSchedule {
    double beta_min = 0.1;
    double beta_max = 20.0;

    NoiseSchedule() = default;
    NoiseSchedule(double bmin, double bmax);

    double beta(double t) const;
    /// (gamma, sigma) at t; throws ValidationError outside [0,1].
    std::pair<double, double> eval(double t) const;

    bool operator==(const NoiseSchedule& o) const = default;

    nlohmann::json to_json() const;
    static NoiseSchedule from_json(const nlohmann::json& j);
};

}  // namespace dsoup
