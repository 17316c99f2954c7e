// Copyright 2026 The prunekit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>

#include "json.hpp"
#include "prunekit/pipeline/pipeline.hpp"

namespace prunekit::io {

nlohmann::json to_json(const pipeline::TraceRecord& r);
nlohmann::json to_json(const pipeline::PruneEvent& e);
nlohmann::json to_json(const pipeline::PhaseAccount& p);
nlohmann::json to_json(const metrics::FlopsReport& f);

/// One JSON object per line, tagged by "type": record, prune or phase.
void write_trace_jsonl(std::ostream& out, const pipeline::Trace& trace);

/// "step,lr" rows with 0-based steps.
void write_lr_csv(std::ostream& out, std::span<const double> lrs, std::size_t first_step = 0);

/// Summary of a finished run: accuracy, sparsity, FLOPs, prune events.
nlohmann::json result_json(const pipeline::ExperimentConfig& cfg, const pipeline::RunResult& result);

/// Writes config.json, result.json, trace.jsonl, lr.csv and mask.csv into `dir`.
void write_run(const std::filesystem::path& dir, const pipeline::ExperimentConfig& cfg,
               const pipeline::RunResult& result);

/// Environment variable naming the default output directory.
inline constexpr const char* kOutDirEnv = "PRUNEKIT_OUT_DIR";

/// `flag` if given, else $PRUNEKIT_OUT_DIR, else "prunekit_out".
std::filesystem::path output_dir(const std::optional<std::string>& flag);

}  // namespace prunekit::io
