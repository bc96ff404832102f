#include "dsoup/schedule.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "dsoup/errors.hpp"

namespace dsoup {

NoiseSchedule::NoiseSchedule(double bmin, double bmax) : beta_min(bmin), beta_max(bmax) {
    if (!(beta_min > 0.0) || !(beta_min < beta_max)) {
        throw ValidationError("noise schedule requires 0 < beta_min < beta_max");
    }
}

double NoiseSchedule::beta(double t) const { return beta_min + (beta_max - beta_min) * t; }

std::pair<double, double> NoiseSchedule::eval(double t) const {
    if (!(t >= 0.0 && t <= 1.0)) throw ValidationError("schedule time must lie in [0,1]");
    const double integral = beta_min * t + 0.5 * (beta_max - beta_min) * t * t;
    const double gamma = std::exp(-0.5 * integral);
    // computed as -expm1 of the log to keep sigma exact near t=0
    const double sigma = std::sqrt(-std::expm1(-integral));
    return {gamma, sigma};
}

nlohmann::json NoiseSchedule::to_json() const {
    return {{"beta_min", beta_min}, {"beta_max", beta_max}, {"form", "linear"}};
}

NoiseSchedule NoiseSchedule::from_json(const nlohmann::json& j) {
    try {
        if (j.at("form").get<std::string>() != "linear") {
            throw ValidationError("unsupported schedule form");
        }
        return NoiseSchedule(j.at("beta_min").get<double>(), j.at("beta_max").get<double>());
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("bad schedule JSON: ") + e.what());
    }
}

}  // namespace dsoup
