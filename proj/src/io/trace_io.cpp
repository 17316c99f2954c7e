// Copyright 2026 The prunekit Authors
// SPDX-License-Identifier: Apache-2.0

#include "prunekit/io/trace_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>

#include "prunekit/core/error.hpp"
#include "prunekit/io/config_io.hpp"

namespace prunekit::io {

using nlohmann::json;

namespace {

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

/// JSON has no infinity; a collapsed network reports null.
json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

}  // namespace

json to_json(const pipeline::TraceRecord& r) {
  return json{{"type", "record"},
              {"step", r.step},
              {"phase", r.phase},
              {"cycle", r.cycle},
              {"lr", opt(r.lr)},
              {"sparsity", r.sparsity},
              {"train_loss", opt(r.train_loss)},
              {"eval_accuracy", opt(r.eval_accuracy)},
              {"eval_loss", opt(r.eval_loss)},
              {"event", r.event},
              {"seed", r.seed}};
}

json to_json(const pipeline::PruneEvent& e) {
  json j{{"type", "prune"},
         {"step", e.step},
         {"cycle", e.cycle},
         {"target_sparsity", e.target_sparsity},
         {"achieved_sparsity", e.achieved_sparsity},
         {"t_pre", e.stability.t_pre},
         {"t_post", e.stability.t_post},
         {"stability", e.stability.delta},
         {"applied_discount", e.applied_discount},
         {"collapsed_layers", e.collapsed_layers}};
  if (!e.stability.note.empty()) j["note"] = e.stability.note;
  if (e.discount) {
    j["d1_unclamped"] = e.discount->d1_unclamped;
    j["d1"] = e.discount->d1;
    j["d2"] = e.discount->d2;
    j["d"] = e.discount->d;
  }
  return j;
}

json to_json(const pipeline::PhaseAccount& p) {
  return json{{"type", "phase"},
              {"phase", p.phase},
              {"cycle", p.cycle},
              {"start_step", p.start_step},
              {"steps", p.steps},
              {"epochs", p.epochs}};
}

json to_json(const metrics::FlopsReport& f) {
  json layers = json::array();
  for (const auto& l : f.per_layer) {
    layers.push_back(json{{"layer", l.layer_index},
                          {"kind", l.kind},
                          {"dense", l.dense},
                          {"sparse", l.sparse},
                          {"activation", l.activation}});
  }
  return json{{"dense", f.dense},
              {"sparse", f.sparse},
              {"speedup", finite_or_null(f.speedup)},
              {"dense_weights_only", f.dense_weights_only},
              {"sparse_weights_only", f.sparse_weights_only},
              {"speedup_weights_only", finite_or_null(f.speedup_weights_only)},
              {"collapsed", f.collapsed},
              {"per_layer", layers}};
}

void write_trace_jsonl(std::ostream& out, const pipeline::Trace& trace) {
  for (const auto& r : trace.records) out << to_json(r).dump() << '\n';
  for (const auto& e : trace.prunes) out << to_json(e).dump() << '\n';
  for (const auto& p : trace.phases) out << to_json(p).dump() << '\n';
}

void write_lr_csv(std::ostream& out, std::span<const double> lrs, std::size_t first_step) {
  out << "step,lr\n";
  char buf[64];
  for (std::size_t i = 0; i < lrs.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.12g\n", first_step + i, lrs[i]);
    out << buf;
  }
}

json result_json(const pipeline::ExperimentConfig& cfg, const pipeline::RunResult& result) {
  const metrics::SparsityReport sp = metrics::sparsity_report(result.mask);
  json prunes = json::array();
  for (const auto& e : result.trace.prunes) prunes.push_back(to_json(e));
  json phases = json::array();
  double epochs = 0;
  for (const auto& p : result.trace.phases) {
    phases.push_back(to_json(p));
    epochs += p.epochs;
  }
  return json{{"name", cfg.name},
              {"config_hash", config_hash(cfg)},
              {"seed", cfg.seed},
              {"pipeline", std::string(pipeline::to_string(cfg.pipeline))},
              {"accuracy", result.accuracy},
              {"loss", result.loss},
              {"sparsity", sp.overall},
              {"kept", sp.kept},
              {"total", sp.total},
              {"total_steps", result.trace.total_steps()},
              {"total_epochs", epochs},
              {"steps_per_epoch", result.steps_per_epoch},
              {"flops", to_json(result.flops)},
              {"prunes", prunes},
              {"phases", phases}};
}

void write_run(const std::filesystem::path& dir, const pipeline::ExperimentConfig& cfg,
               const pipeline::RunResult& result) {
  std::filesystem::create_directories(dir);
  open_out(dir / "config.json") << serialize_config(cfg);
  open_out(dir / "result.json") << result_json(cfg, result).dump(2) << '\n';
  {
    auto out = open_out(dir / "trace.jsonl");
    write_trace_jsonl(out, result.trace);
  }
  {
    auto out = open_out(dir / "lr.csv");
    write_lr_csv(out, result.trace.lr_per_step);
  }
  auto out = open_out(dir / "mask.csv");
  pruning::write_mask_csv(out, result.mask);
}

std::filesystem::path output_dir(const std::optional<std::string>& flag) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return "prunekit_out";
}

}  // namespace prunekit::io
