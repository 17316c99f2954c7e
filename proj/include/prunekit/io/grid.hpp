// Copyright 2026 The prunekit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "prunekit/pipeline/pipeline.hpp"

namespace prunekit::io {

/// A base config plus a list of values per dotted key, e.g.
/// {"base": {...}, "overrides": {"training.weight_decay": [1e-4, 5e-4]},
///  "seeds": [0, 1]}. Cells are the cross product of the override lists,
/// in key order with the last key varying fastest.
struct GridSpec {
  nlohmann::json base;
  std::vector<std::pair<std::string, std::vector<nlohmann::json>>> overrides;
  std::vector<std::uint64_t> seeds{0};
};

GridSpec parse_grid(std::string_view text);
GridSpec load_grid(const std::filesystem::path& path);

struct GridCell {
  pipeline::ExperimentConfig config;
  std::string hash;
  /// "key=value" pairs of this cell, comma separated; the config name when empty.
  std::string label;
};

/// Every cell, validated. Throws ConfigError naming the cell on failure.
std::vector<GridCell> expand_grid(const GridSpec& grid);

struct PhaseEpochs {
  std::string phase;
  double epochs = 0;
  friend bool operator==(const PhaseEpochs&, const PhaseEpochs&) = default;
};

/// One cell aggregated over its seeds.
struct ResultRow {
  std::string config_hash;
  std::string label;
  std::vector<std::uint64_t> seeds;  // seeds that completed
  double mean_accuracy = 0;
  /// Sample standard deviation; present only with at least two seeds.
  std::optional<double> std_accuracy;
  double speedup = 1;  // mean over seeds
  double sparsity = 0;  // mean achieved sparsity
  double target_sparsity = 0;
  double total_epochs = 0;
  double retrain_epochs = 0;
  std::vector<PhaseEpochs> phases;
  std::vector<std::string> failures;  // "seed N: message"
  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

struct CellRun {
  std::size_t cell = 0;
  std::uint64_t seed = 0;
  std::optional<pipeline::RunResult> result;
  std::string error;
};

struct GridResult {
  std::vector<GridCell> cells;
  std::vector<ResultRow> rows;  // one per cell with at least one completed seed
  std::size_t best = 0;         // index into rows
  std::vector<CellRun> runs;    // cell-major, seed-minor
};

/// Aggregates completed runs of one cell.
ResultRow aggregate(const GridCell& cell, const std::vector<const CellRun*>& runs);

/// Runs every cell and seed on up to `workers` threads. Failed runs are
/// recorded and the grid continues; throws Error when no run completes.
/// With `out_dir`, each run writes its files under out_dir/<hash>/seed_<n>.
GridResult run_grid(const GridSpec& grid, std::size_t workers,
                    const std::optional<std::filesystem::path>& out_dir = std::nullopt);

}  // namespace prunekit::io
