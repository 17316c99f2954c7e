// Copyright 2026 The prunekit Authors
// SPDX-License-Identifier: Apache-2.0

#include "prunekit/io/grid.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <thread>

#include "prunekit/core/error.hpp"
#include "prunekit/io/config_io.hpp"
#include "prunekit/io/trace_io.hpp"

namespace prunekit::io {

using nlohmann::json;

namespace {

json::json_pointer pointer_for(const std::string& dotted) {
  std::string p;
  std::stringstream ss(dotted);
  std::string part;
  while (std::getline(ss, part, '.')) {
    if (part.empty()) throw ConfigError("overrides: empty segment in key '" + dotted + "'");
    p += "/" + part;
  }
  return json::json_pointer(p);
}

std::string key_for(const DatasetSpec& spec) {
  pipeline::ExperimentConfig probe;
  probe.data = spec;
  return config_to_json(probe)["data"].dump();
}

}  // namespace

GridSpec parse_grid(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("grid is not valid JSON: ") + e.what(), e.byte > 0 ? e.byte - 1 : 0);
  }
  if (!doc.is_object()) throw ConfigError("<root>: expected an object");
  GridSpec g;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (it.key() != "base" && it.key() != "overrides" && it.key() != "seeds") {
      throw ConfigError(it.key() + ": unknown key");
    }
  }
  if (!doc.contains("base") || !doc["base"].is_object()) throw ConfigError("base: expected an object");
  g.base = doc["base"];
  if (doc.contains("overrides")) {
    // re-read in file order; json sorts object keys
    const auto ov = nlohmann::ordered_json::parse(text)["overrides"];
    if (!ov.is_object()) throw ConfigError("overrides: expected an object");
    for (auto it = ov.begin(); it != ov.end(); ++it) {
      if (!it->is_array() || it->empty()) {
        throw ConfigError("overrides." + it.key() + ": expected a nonempty array");
      }
      std::vector<json> values;
      for (const auto& v : *it) values.push_back(json::parse(v.dump()));
      g.overrides.emplace_back(it.key(), std::move(values));
    }
  }
  if (doc.contains("seeds")) {
    const json& s = doc["seeds"];
    if (!s.is_array() || s.empty()) throw ConfigError("seeds: expected a nonempty array");
    g.seeds.clear();
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!s[i].is_number_unsigned()) throw ConfigError("seeds[" + std::to_string(i) + "]: expected a seed");
      g.seeds.push_back(s[i].get<std::uint64_t>());
    }
  }
  return g;
}

GridSpec load_grid(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open grid " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_grid(ss.str());
}

std::vector<GridCell> expand_grid(const GridSpec& grid) {
  std::vector<std::size_t> pos(grid.overrides.size(), 0);
  std::vector<GridCell> cells;
  while (true) {
    json doc = grid.base;
    std::string label;
    for (std::size_t k = 0; k < grid.overrides.size(); ++k) {
      const auto& [key, values] = grid.overrides[k];
      try {
        doc[pointer_for(key)] = values[pos[k]];
      } catch (const json::exception& e) {
        throw ConfigError("overrides." + key + ": cannot apply (" + e.what() + ")");
      }
      if (!label.empty()) label += ",";
      label += key + "=" + values[pos[k]].dump();
    }
    GridCell cell;
    try {
      cell.config = config_from_json(doc);
    } catch (const ConfigError& e) {
      throw ConfigError("grid cell " + std::to_string(cells.size()) + (label.empty() ? "" : " (" + label + ")") +
                        ": " + e.what());
    }
    cell.hash = config_hash(cell.config);
    cell.label = label.empty() ? cell.config.name : label;
    cells.push_back(std::move(cell));

    std::size_t k = grid.overrides.size();
    while (k > 0) {
      --k;
      if (++pos[k] < grid.overrides[k].second.size()) break;
      pos[k] = 0;
      if (k == 0) return cells;
    }
    if (grid.overrides.empty()) return cells;
  }
}

ResultRow aggregate(const GridCell& cell, const std::vector<const CellRun*>& runs) {
  ResultRow row;
  row.config_hash = cell.hash;
  row.label = cell.label;
  const auto& cfg = cell.config;
  switch (cfg.pipeline) {
    case pipeline::PipelineKind::dense: row.target_sparsity = 0; break;
    case pipeline::PipelineKind::gmp: row.target_sparsity = cfg.pruning.gmp.final_sparsity; break;
    default: row.target_sparsity = cfg.pruning.sparsity;
  }
  row.retrain_epochs = static_cast<double>(pipeline::cycle_count(cfg) * cfg.retrain.epochs);
  std::vector<double> acc;
  double speedup = 0, sparsity = 0;
  for (const CellRun* r : runs) {
    if (!r->result) {
      row.failures.push_back("seed " + std::to_string(r->seed) + ": " + r->error);
      continue;
    }
    row.seeds.push_back(r->seed);
    acc.push_back(r->result->accuracy);
    speedup += r->result->flops.speedup;
    sparsity += r->result->mask.sparsity();
    if (row.phases.empty()) {
      for (const auto& p : r->result->trace.phases) {
        auto it = std::find_if(row.phases.begin(), row.phases.end(),
                               [&](const PhaseEpochs& e) { return e.phase == p.phase; });
        if (it == row.phases.end()) {
          row.phases.push_back({p.phase, p.epochs});
        } else {
          it->epochs += p.epochs;
        }
        row.total_epochs += p.epochs;
      }
    }
  }
  if (acc.empty()) return row;
  const auto n = static_cast<double>(acc.size());
  double sum = 0;
  for (double a : acc) sum += a;
  row.mean_accuracy = sum / n;
  row.speedup = speedup / n;
  row.sparsity = sparsity / n;
  if (acc.size() >= 2) {
    double ss = 0;
    for (double a : acc) ss += (a - row.mean_accuracy) * (a - row.mean_accuracy);
    row.std_accuracy = std::sqrt(ss / (n - 1.0));
  }
  return row;
}

GridResult run_grid(const GridSpec& grid, std::size_t workers, const std::optional<std::filesystem::path>& out_dir) {
  GridResult out;
  out.cells = expand_grid(grid);

  // datasets are loaded once and shared read-only between runs
  std::map<std::string, std::shared_ptr<const Split>> data;
  std::vector<std::shared_ptr<const Split>> cell_data;
  for (const auto& cell : out.cells) {
    const std::string key = key_for(cell.config.data);
    auto it = data.find(key);
    if (it == data.end()) it = data.emplace(key, std::make_shared<const Split>(load_dataset(cell.config.data))).first;
    cell_data.push_back(it->second);
  }

  for (std::size_t c = 0; c < out.cells.size(); ++c) {
    for (auto seed : grid.seeds) out.runs.push_back(CellRun{c, seed, std::nullopt, {}});
  }
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < out.runs.size(); i = next++) {
      CellRun& run = out.runs[i];
      pipeline::ExperimentConfig cfg = out.cells[run.cell].config;
      cfg.seed = run.seed;
      try {
        run.result = pipeline::run_experiment(cfg, *cell_data[run.cell]);
        if (out_dir) {
          write_run(*out_dir / out.cells[run.cell].hash / ("seed_" + std::to_string(run.seed)), cfg, *run.result);
        }
      } catch (const std::exception& e) {
        run.result.reset();
        run.error = e.what();
      }
    }
  };
  const std::size_t n_threads = std::clamp<std::size_t>(workers, 1, out.runs.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  std::size_t completed = 0;
  std::string first_error;
  for (std::size_t c = 0; c < out.cells.size(); ++c) {
    std::vector<const CellRun*> runs;
    for (const auto& r : out.runs) {
      if (r.cell != c) continue;
      runs.push_back(&r);
      if (r.result) {
        ++completed;
      } else if (first_error.empty()) {
        first_error = r.error;
      }
    }
    ResultRow row = aggregate(out.cells[c], runs);
    if (!row.seeds.empty()) out.rows.push_back(std::move(row));
  }
  if (completed == 0) throw Error("every grid run failed; first error: " + first_error);
  for (std::size_t i = 1; i < out.rows.size(); ++i) {
    const auto& a = out.rows[i];
    const auto& b = out.rows[out.best];
    if (a.mean_accuracy > b.mean_accuracy || (a.mean_accuracy == b.mean_accuracy && a.config_hash < b.config_hash)) {
      out.best = i;
    }
  }
  return out;
}

}  // namespace prunekit::io
