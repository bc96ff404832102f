#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

namespace dsoup::cli {

/// Minimal TOML reader covering what experiment configs need: `[table]` and
/// `[[array-of-tables]]` headers (dotted paths descend into the newest array
/// element), bare dotted keys, strings, integers, floats, booleans, and
/// (possibly nested, possibly multi-line) arrays. No inline tables, dates, or
/// quoted keys. Returns the equivalent JSON document.
nlohmann::json parse_toml_lite(const std::string& text);
nlohmann::json parse_toml_lite_file(const std::filesystem::path& path);

}  // namespace dsoup::cli
