#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "dsoup/checkpoint.hpp"
#include "dsoup/linalg.hpp"
#include "dsoup/schedule.hpp"

namespace dsoup {

using ScoreFn = std::function<Vec2(const Vec2&, double)>;

/// Euler–Maruyama integration of the reverse VP-SDE from t=1 down to the time
/// floor on a uniform grid:
///   x += dt * (beta(t)/2 * x + beta(t) * score(x, t)) + sqrt(beta(t) dt) * xi
/// The last step omits the noise. Chain i draws from its own stream derived
/// from (seed, i), so results do not depend on thread count.
std::vector<Vec2> sample_score(const ScoreFn& score, const NoiseSchedule& schedule, int n,
                               int steps, std::uint64_t seed, int threads = 1);

/// Same integrator with score(x,t) = -eps_hat(x,t) / sigma(t).
std::vector<Vec2> sample_checkpoint(const Checkpoint& cp, std::optional<int> label, int n,
                                    int steps, std::uint64_t seed, int threads = 1);

/// Output-ensemble sampling: every model runs at every step and their noise
/// predictions are averaged with the given coefficients before the score
/// conversion. The expensive paragon that souping approximates.
std::vector<Vec2> sample_ensemble(const std::vector<Checkpoint>& cps,
                                  const std::vector<double>& coeffs, std::optional<int> label,
                                  int n, int steps, std::uint64_t seed, int threads = 1);

}  // namespace dsoup
