#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

namespace dsoup::cli {

/// Parse argv and run one subcommand. Returns the process exit code:
/// 0 success, 1 validation/usage error, 2 numerical error, 3 I/O error.
/// Never throws; diagnostics go to stderr.
int dispatch(int argc, const char* const* argv);

/// Full pipeline behind `run-experiment`: generate shards, pretrain on their
/// union, finetune per shard, build the requested soups, sample and evaluate.
/// Returns the manifest that was also written to <out_dir>/manifest.json.
nlohmann::json run_experiment(const nlohmann::json& config,
                              const std::filesystem::path& out_dir, int threads);

}  // namespace dsoup::cli
