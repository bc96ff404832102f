#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsoup/checkpoint.hpp"
#include "dsoup/distribution.hpp"
#include "dsoup/linalg.hpp"
#include "dsoup/shard.hpp"

namespace dsoup {

struct EvalReport {
    std::string metric;
    double value = 0.0;
    std::vector<std::string> input_hashes;
    std::uint64_t seed = 0;
    nlohmann::json config = nlohmann::json::object();

    nlohmann::json to_json() const;
};

struct MomentsError {
    Vec2 mean_err;   // componentwise absolute difference
    double cov_err;  // Frobenius norm of covariance difference
};

/// Empirical mean and 1/n covariance against the target's moments. n >= 2.
MomentsError moments_error(const std::vector<Vec2>& samples, const Gaussian& target);

/// Gaussian with the sample mean and 1/n sample covariance (the fit that
/// makes moments_error of the same samples exactly zero).
Gaussian fit_gaussian(const std::vector<Vec2>& samples);

/// Energy distance 2 E||A-B|| - E||A-A'|| - E||B-B'|| over all pairs
/// (V-statistics). Sets larger than max_points are first reduced by a seeded
/// subsample; the subsample stream also hashes the set's bytes, so the result
/// stays exactly symmetric and exactly zero for identical multisets.
double energy_distance(const std::vector<Vec2>& a, const std::vector<Vec2>& b,
                       std::uint64_t seed = 0, std::size_t max_points = 4096);

struct NnReport {
    std::vector<double> distances;  // per generated point, to nearest train point
    double median = 0.0;
    double p05 = 0.0;  // 5th percentile
};

/// Euclidean nearest-neighbour distance from each generated point to the
/// training set; low values flag memorization.
NnReport nn_distance_distribution(const std::vector<Vec2>& generated,
                                  const std::vector<Vec2>& train);

/// Nearest-center assignment counts, normalized. Ties go to the lower index.
std::vector<double> mode_fractions(const std::vector<Vec2>& samples,
                                   const std::vector<Vec2>& centers);

struct ProbePoint {
    Vec2 x;
    double t = 0.5;
    std::optional<int> label;
};

/// x ~ N(0,I), t uniform on [time floor, 1], unlabeled.
std::vector<ProbePoint> make_probe_set(int n, std::uint64_t seed);

/// Mean over probes of ||eps_soup - sum k_i eps_i|| / (||sum k_i eps_i|| +
/// 1e-12): how far weight averaging strays from output ensembling. Duplicate
/// checkpoints coalesce exactly as in soup, so identical inputs give 0.
double linearization_gap(const std::vector<Checkpoint>& checkpoints,
                         const std::vector<double>& coeffs,
                         const std::vector<ProbePoint>& probes);

}  // namespace dsoup
