// Copyright 2026 The prunekit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "prunekit/io/grid.hpp"

namespace prunekit::io {

enum class ReportFormat { csv, json, plotdata };

std::optional<ReportFormat> parse_format(std::string_view name);

nlohmann::json to_json(const ResultRow& row);
ResultRow row_from_json(const nlohmann::json& j);
/// Reads rows written in the json format (one object per line).
std::vector<ResultRow> read_rows_jsonl(std::istream& in);

struct EnvelopePoint {
  double budget = 0;  // retrain epochs
  double accuracy = 0;
  friend bool operator==(const EnvelopePoint&, const EnvelopePoint&) = default;
};

/// Sorted by budget (stable), accuracy replaced by its running maximum.
std::vector<EnvelopePoint> envelope(std::vector<EnvelopePoint> points);

/// csv: one line per row with a header; columns config_hash, label, seeds,
///      accuracy, accuracy_std, speedup, sparsity, target_sparsity,
///      total_epochs, retrain_epochs.
/// json: one object per line.
/// plotdata: "kind,series,x,y" lines; kind "envelope" has one series per
///      target sparsity (x = retrain epochs), kind "accuracy_vs_sparsity"
///      one series per retrain budget.
/// Throws InputError on empty input.
void emit_report(std::ostream& out, std::span<const ResultRow> rows, ReportFormat format);

/// "kind,series,x,y" schedule curve rows under series `name`.
void emit_schedule_plotdata(std::ostream& out, std::string_view name, std::span<const double> lrs);

}  // namespace prunekit::io
