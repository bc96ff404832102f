#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dsoup/distribution.hpp"

namespace dsoup {

/// A labeled set of 2-D points together with the exact distribution that
/// generated them, so every empirical result can be checked in closed form.
struct Shard {
    std::string id;
    std::vector<Vec2> points;
    std::optional<std::vector<int>> labels;  // same length as points when present
    AnalyticDistribution generator = AnalyticDistribution::gaussian({0, 0}, Mat2::identity());
    std::uint64_t seed = 0;
    std::vector<std::string> provenance;  // constituent shard ids (self id for atoms)

    std::size_t size() const { return points.size(); }
};

/// n i.i.d. draws from dist. Identical (dist, n, seed) gives identical bytes.
Shard make_shard(const AnalyticDistribution& dist, std::size_t n, std::uint64_t seed,
                 std::optional<int> label = std::nullopt, std::string id = "shard");

/// Disjoint partition with sizes (floor(fraction*n), remainder); points keep
/// their original relative order inside each half.
std::pair<Shard, Shard> split_shard(const Shard& shard, double fraction, std::uint64_t seed);

/// Concatenation; the generator becomes the size-weighted mixture of the
/// inputs' generators and the provenance list records the constituents.
Shard union_shards(const std::vector<Shard>& shards);

/// CSV with header `x0,x1[,label]` plus a sidecar JSON (same path with a
/// .json extension) holding {id, seed, generator, provenance}.
void save_shard(const Shard& shard, const std::filesystem::path& csv_path,
                const std::string& command_echo = "");
Shard load_shard(const std::filesystem::path& csv_path);

std::filesystem::path shard_sidecar_path(const std::filesystem::path& csv_path);

/// Bare `x0,x1` CSV for generated sample sets; no sidecar. The loader also
/// accepts shard CSVs and ignores their label column.
void save_points_csv(const std::vector<Vec2>& points, const std::filesystem::path& path);
std::vector<Vec2> load_points_csv(const std::filesystem::path& path);

}  // namespace dsoup
