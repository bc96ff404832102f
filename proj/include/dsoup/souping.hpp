#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsoup/checkpoint.hpp"
#include "dsoup/shard.hpp"

namespace dsoup {

struct SoupEntry {
    std::string hash;
    double k = 0.0;
};

/// Affine recipe over checkpoints finetuned from one ancestor. Entries are
/// ordered, hashes distinct, k_i > 0 and summing to 1 within 1e-12.
struct SoupRecipe {
    std::string ancestor;
    std::vector<SoupEntry> entries;

    void validate() const;
    nlohmann::json to_json() const;
    static SoupRecipe from_json(const nlohmann::json& j);
};

/// weights = sum k_i w_i with compensated summation. Duplicate checkpoints
/// (same content hash) are coalesced by summing their coefficients, so
/// soup([w, w], [.5, .5]) returns w bit-identically. Coefficients may sum to
/// 1 within 1e-9 and are renormalized exactly before use.
std::pair<Checkpoint, SoupRecipe> soup(const std::vector<Checkpoint>& checkpoints,
                                       const std::vector<double>& coeffs);

/// Inverse update: new weights = (w_soup - k_i w_i) / (1 - k_i); the entry is
/// dropped and the remaining coefficients renormalized by 1/(1 - k_i).
std::pair<Checkpoint, SoupRecipe> unlearn(const Checkpoint& souped, const SoupRecipe& recipe,
                                          const std::string& remove_hash,
                                          const Checkpoint& removed);

/// Higher-is-better scalar quality of a checkpoint; must be deterministic.
using MetricFn = std::function<double(const Checkpoint&)>;

struct MetricConfig {
    int n = 2048;       // samples drawn from the model
    int steps = 200;    // integrator steps
    std::uint64_t seed = 0;
    std::optional<int> label;
    int threads = 1;
};

/// Default metric: negative energy distance between model samples and the
/// validation shard. Fixed seeds make it a pure function of the weights.
MetricFn negative_energy_metric(const Shard& val, const MetricConfig& cfg);

struct GreedyResult {
    Checkpoint checkpoint;
    SoupRecipe recipe;
    double metric = 0.0;      // metric of the returned soup
    nlohmann::json trace;     // per-candidate decisions
};

/// Rank by individual metric (descending, ties by hash ascending), seed with
/// the best, then keep each next candidate iff the uniform soup of kept u
/// {candidate} strictly improves the metric. Single pass.
GreedyResult greedy_soup(const std::vector<Checkpoint>& checkpoints, const MetricFn& metric);

/// Start from the uniform soup of all, visit candidates in ascending order of
/// individual metric, and remove one iff removal strictly improves the metric
/// of the uniform soup of the rest. Never removes the last entry.
GreedyResult reverse_greedy_soup(const std::vector<Checkpoint>& checkpoints,
                                 const MetricFn& metric);

}  // namespace dsoup
