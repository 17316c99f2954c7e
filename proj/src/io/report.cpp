// Copyright 2026 The prunekit Authors
// SPDX-License-Identifier: Apache-2.0

#include "prunekit/io/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <istream>
#include <map>
#include <ostream>
#include <string>

#include "prunekit/core/error.hpp"

namespace prunekit::io {

using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

/// Quotes a CSV cell when it holds a separator or quote.
std::string cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string seeds_text(const std::vector<std::uint64_t>& seeds) {
  std::string out;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(seeds[i]);
  }
  return out;
}

}  // namespace

std::optional<ReportFormat> parse_format(std::string_view name) {
  if (name == "csv") return ReportFormat::csv;
  if (name == "json") return ReportFormat::json;
  if (name == "plotdata") return ReportFormat::plotdata;
  return std::nullopt;
}

json to_json(const ResultRow& row) {
  json phases = json::array();
  for (const auto& p : row.phases) phases.push_back(json{{"phase", p.phase}, {"epochs", p.epochs}});
  json j{{"config_hash", row.config_hash},
         {"label", row.label},
         {"seeds", row.seeds},
         {"accuracy", row.mean_accuracy},
         {"speedup", std::isfinite(row.speedup) ? json(row.speedup) : json(nullptr)},
         {"sparsity", row.sparsity},
         {"target_sparsity", row.target_sparsity},
         {"total_epochs", row.total_epochs},
         {"retrain_epochs", row.retrain_epochs},
         {"phases", phases},
         {"failures", row.failures}};
  j["accuracy_std"] = row.std_accuracy ? json(*row.std_accuracy) : json(nullptr);
  return j;
}

ResultRow row_from_json(const json& j) {
  try {
    ResultRow row;
    row.config_hash = j.at("config_hash").get<std::string>();
    row.label = j.at("label").get<std::string>();
    row.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    row.mean_accuracy = j.at("accuracy").get<double>();
    if (!j.at("accuracy_std").is_null()) row.std_accuracy = j.at("accuracy_std").get<double>();
    row.speedup = j.at("speedup").is_null() ? std::numeric_limits<double>::infinity() : j.at("speedup").get<double>();
    row.sparsity = j.at("sparsity").get<double>();
    row.target_sparsity = j.at("target_sparsity").get<double>();
    row.total_epochs = j.at("total_epochs").get<double>();
    row.retrain_epochs = j.at("retrain_epochs").get<double>();
    for (const auto& p : j.at("phases")) row.phases.push_back({p.at("phase").get<std::string>(), p.at("epochs").get<double>()});
    row.failures = j.at("failures").get<std::vector<std::string>>();
    return row;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed result row: ") + e.what());
  }
}

std::vector<ResultRow> read_rows_jsonl(std::istream& in) {
  std::vector<ResultRow> rows;
  std::string line;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    if (!line.empty()) {
      try {
        rows.push_back(row_from_json(json::parse(line)));
      } catch (const json::parse_error& e) {
        throw FormatError(std::string("result rows: ") + e.what(), offset + (e.byte > 0 ? e.byte - 1 : 0));
      }
    }
    offset += line.size() + 1;
  }
  return rows;
}

std::vector<EnvelopePoint> envelope(std::vector<EnvelopePoint> points) {
  std::stable_sort(points.begin(), points.end(),
                   [](const EnvelopePoint& a, const EnvelopePoint& b) { return a.budget < b.budget; });
  for (std::size_t i = 1; i < points.size(); ++i) {
    points[i].accuracy = std::max(points[i].accuracy, points[i - 1].accuracy);
  }
  return points;
}

void emit_report(std::ostream& out, std::span<const ResultRow> rows, ReportFormat format) {
  if (rows.empty()) throw InputError("no result rows to report");
  switch (format) {
    case ReportFormat::csv:
      out << "config_hash,label,seeds,accuracy,accuracy_std,speedup,sparsity,target_sparsity,total_epochs,"
             "retrain_epochs\n";
      for (const auto& r : rows) {
        out << r.config_hash << ',' << cell(r.label) << ',' << seeds_text(r.seeds) << ',' << num(r.mean_accuracy)
            << ',' << (r.std_accuracy ? num(*r.std_accuracy) : "") << ',' << num(r.speedup) << ','
            << num(r.sparsity) << ',' << num(r.target_sparsity) << ',' << num(r.total_epochs) << ','
            << num(r.retrain_epochs) << '\n';
      }
      return;
    case ReportFormat::json:
      for (const auto& r : rows) out << to_json(r).dump() << '\n';
      return;
    case ReportFormat::plotdata: {
      out << "kind,series,x,y\n";
      std::map<double, std::vector<EnvelopePoint>> by_target;
      std::map<double, std::vector<std::pair<double, double>>> by_budget;
      for (const auto& r : rows) {
        by_target[r.target_sparsity].push_back({r.retrain_epochs, r.mean_accuracy});
        by_budget[r.retrain_epochs].push_back({r.sparsity, r.mean_accuracy});
      }
      for (const auto& [target, pts] : by_target) {
        for (const auto& p : envelope(pts)) {
          out << "envelope,sparsity=" << num(target) << ',' << num(p.budget) << ',' << num(p.accuracy) << '\n';
        }
      }
      for (auto& [budget, pts] : by_budget) {
        std::stable_sort(pts.begin(), pts.end());
        for (const auto& [x, y] : pts) {
          out << "accuracy_vs_sparsity,retrain_epochs=" << num(budget) << ',' << num(x) << ',' << num(y) << '\n';
        }
      }
      return;
    }
  }
}

void emit_schedule_plotdata(std::ostream& out, std::string_view name, std::span<const double> lrs) {
  out << "kind,series,x,y\n";
  for (std::size_t t = 0; t < lrs.size(); ++t) {
    out << "schedule," << name << ',' << t << ',' << num(lrs[t]) << '\n';
  }
}

}  // namespace prunekit::io
