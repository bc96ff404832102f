#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "dsoup/checkpoint.hpp"

namespace dsoup {

/// Write the DSOUP1 container (magic, LE header length, canonical JSON header,
/// LE double payload) through a temp file + atomic rename. Returns the
/// SHA-256 of the finished file; identical checkpoints produce identical
/// bytes.
std::string save_checkpoint(const Checkpoint& cp, const std::filesystem::path& path);

/// Read and verify a DSOUP1 file: magic and header must parse, the payload
/// hash must match, and the weight count must match the architecture.
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Atomic canonical-JSON writers for the small sidecar artifacts.
void save_json(const nlohmann::json& j, const std::filesystem::path& path);
nlohmann::json load_json(const std::filesystem::path& path);

}  // namespace dsoup
