#pragma once

#include <bit>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsoup/linalg.hpp"
#include "dsoup/network.hpp"
#include "dsoup/schedule.hpp"

namespace dsoup {

inline void le_double_bytes(double v, unsigned char out[8]) {
    std::uint64_t u = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out[i] = static_cast<unsigned char>((u >> (8 * i)) & 0xFF);
}

inline double double_from_le(const unsigned char in[8]) {
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u |= std::uint64_t(in[i]) << (8 * i);
    return std::bit_cast<double>(u);
}

/// A trained (or fresh) noise-prediction model. Identity is content-addressed:
/// the hash covers architecture, schedule and weights, but not provenance or
/// ancestry, so a checkpoint can be its own ancestor.
struct Checkpoint {
    ArchDescriptor arch;
    NoiseSchedule schedule;
    std::vector<double> weights;
    std::string ancestor_hash;   // hash of the shared initialization this descends from
    nlohmann::json provenance = nlohmann::json::object();

    std::string content_hash() const;
};

/// Glorot-initialized checkpoint; it is its own ancestor.
Checkpoint fresh_checkpoint(const ArchDescriptor& arch, const NoiseSchedule& schedule,
                            std::uint64_t seed);

/// One-off prediction. Builds network geometry per call; use Network directly
/// in hot loops.
Vec2 eps_forward(const Checkpoint& cp, const Vec2& x, double t,
                 std::optional<int> label = std::nullopt);

/// score(x, t) = -eps_hat / sigma(t).
Vec2 score_from_eps(const Vec2& eps, double sigma);

}  // namespace dsoup
