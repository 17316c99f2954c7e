// Copyright 2026 The prunekit Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "prunekit/io/config_io.hpp"
#include "prunekit/io/grid.hpp"
#include "prunekit/io/report.hpp"
#include "prunekit/io/trace_io.hpp"
#include "prunekit/pipeline/pipeline.hpp"

namespace {

using namespace prunekit;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

pipeline::ExperimentConfig load(const Common& c) {
  auto cfg = io::load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  return cfg;
}

/// The config reduced to the pipeline a subcommand runs.
pipeline::ExperimentConfig as_pipeline(pipeline::ExperimentConfig cfg, pipeline::PipelineKind kind) {
  cfg.pipeline = kind;
  cfg.retrain.cycles.reset();
  cfg.budget_epochs.reset();
  pipeline::validate(cfg);
  return cfg;
}

void summarize(const pipeline::ExperimentConfig& cfg, const pipeline::RunResult& r, const std::filesystem::path& dir) {
  std::printf("%s seed=%llu accuracy=%.6f sparsity=%.6f speedup=%.4g steps=%zu -> %s\n", cfg.name.c_str(),
              static_cast<unsigned long long>(cfg.seed), r.accuracy, r.mask.sparsity(), r.flops.speedup,
              r.trace.total_steps(), dir.string().c_str());
}

int cmd_train(const Common& c) {
  const auto cfg = as_pipeline(load(c), pipeline::PipelineKind::dense);
  const auto dir = io::output_dir(c.out);
  const auto r = pipeline::train_dense(cfg, io::load_dataset(cfg.data));
  io::write_run(dir, cfg, r);
  nn::save_checkpoint(dir / "dense.ckpt", *r.dense_checkpoint);
  summarize(cfg, r, dir);
  return 0;
}

int cmd_prune(const Common& c, const std::string& checkpoint) {
  const auto cfg = as_pipeline(load(c), pipeline::PipelineKind::one_shot);
  const auto dir = io::output_dir(c.out);
  const auto r = pipeline::prune_and_retrain(cfg, nn::load_checkpoint(checkpoint), io::load_dataset(cfg.data));
  io::write_run(dir, cfg, r);
  summarize(cfg, r, dir);
  return 0;
}

int cmd_experiment(const Common& c) {
  const auto cfg = load(c);
  const auto dir = io::output_dir(c.out);
  pipeline::RunOptions opts;
  opts.checkpoint_dir = dir / "checkpoints";
  const auto r = pipeline::run_experiment(cfg, opts);
  io::write_run(dir, cfg, r);
  summarize(cfg, r, dir);
  return 0;
}

int cmd_grid(const Common& c, std::size_t workers, const std::string& format) {
  const auto fmt = io::parse_format(format);
  const auto grid = io::load_grid(c.config);
  const auto dir = io::output_dir(c.out);
  const auto result = io::run_grid(grid, workers, dir / "runs");
  std::ofstream rows(dir / "rows.jsonl");
  io::emit_report(rows, result.rows, io::ReportFormat::json);
  std::ofstream report(dir / ("report." + std::string(format == "json" ? "jsonl" : "csv")));
  io::emit_report(report, result.rows, *fmt);
  std::size_t failed = 0;
  for (const auto& run : result.runs) {
    if (!run.result) {
      ++failed;
      std::fprintf(stderr, "run failed: cell %zu seed %llu: %s\n", run.cell,
                   static_cast<unsigned long long>(run.seed), run.error.c_str());
    }
  }
  const auto& best = result.rows[result.best];
  std::printf("%zu cells, %zu runs, %zu failed; best %s (%s) accuracy=%.6f -> %s\n", result.cells.size(),
              result.runs.size(), failed, best.config_hash.c_str(), best.label.c_str(), best.mean_accuracy,
              dir.string().c_str());
  return 0;
}

int cmd_schedule_dump(const Common& c, const std::string& phase, std::size_t spe, double discount,
                      const std::string& format) {
  const auto cfg = load(c);
  const std::size_t horizon = cfg.schedule.epochs * spe;
  const auto origin = pipeline::make_schedule(cfg.schedule, horizon);
  std::vector<double> lrs;
  if (phase == "dense") {
    for (std::size_t t = 0; t < horizon; ++t) lrs.push_back(origin.lr_at(t));
  } else {
    const std::size_t steps = cfg.retrain.epochs * spe;
    const auto rs = pipeline::make_retrain_schedule(cfg, origin, steps, discount);
    for (std::size_t t = 0; t < steps; ++t) lrs.push_back(rs.lr_at(t));
  }
  std::ofstream file;
  if (c.out) {
    file.open(*c.out);
    if (!file) throw InputError("cannot write " + *c.out);
  }
  std::ostream& out = c.out ? file : std::cout;
  if (format == "plotdata") {
    io::emit_schedule_plotdata(out, phase == "dense" ? cfg.schedule.kind : std::string(to_string(cfg.retrain.scheme)),
                               lrs);
  } else {
    io::write_lr_csv(out, lrs);
  }
  return 0;
}

int cmd_report(const std::string& input, const std::string& format, const std::optional<std::string>& out_path) {
  std::ifstream in(input);
  if (!in) throw InputError("cannot open " + input);
  const auto rows = io::read_rows_jsonl(in);
  std::ofstream file;
  if (out_path) {
    file.open(*out_path);
    if (!file) throw InputError("cannot write " + *out_path);
  }
  io::emit_report(out_path ? file : std::cout, rows, *io::parse_format(format));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"prunekit: magnitude pruning and retraining experiments"};
  app.require_subcommand(1);

  const std::vector<std::string> formats{"csv", "json", "plotdata"};
  auto add_common = [](CLI::App* sub, Common& c, bool with_seed) {
    sub->add_option("--config", c.config, "JSON config file")->required()->check(CLI::ExistingFile);
    if (with_seed) sub->add_option("--seed", c.seed, "override the config seed");
    sub->add_option("--out", c.out, std::string("output directory (default $") + io::kOutDirEnv + ")");
  };

  Common train, prune, experiment, grid, dump;
  std::string checkpoint, phase = "dense", format = "csv", dump_format = "csv", report_input;
  std::string report_format = "csv";
  std::optional<std::string> report_out;
  std::size_t workers = 1, spe = 1;
  double discount = 1.0;

  auto* t = app.add_subcommand("train", "dense training; writes dense.ckpt");
  add_common(t, train, true);
  auto* p = app.add_subcommand("prune", "one prune-retrain cycle on a dense checkpoint");
  add_common(p, prune, true);
  p->add_option("--checkpoint", checkpoint, "checkpoint written by train")->required()->check(CLI::ExistingFile);
  auto* e = app.add_subcommand("experiment", "run the configured pipeline");
  add_common(e, experiment, true);
  auto* g = app.add_subcommand("grid", "run a grid of configs and seeds");
  add_common(g, grid, false);
  g->add_option("--workers", workers, "parallel runs")->check(CLI::PositiveNumber);
  g->add_option("--format", format, "report format")->check(CLI::IsMember(formats));
  auto* s = app.add_subcommand("schedule-dump", "print the configured learning-rate curve");
  add_common(s, dump, false);
  s->add_option("--phase", phase, "dense or retrain")->check(CLI::IsMember({"dense", "retrain"}));
  s->add_option("--steps-per-epoch", spe, "steps per epoch")->check(CLI::PositiveNumber);
  s->add_option("--discount", discount, "discount for the restarting schemes")->check(CLI::Range(0.0, 1.0));
  s->add_option("--format", dump_format, "csv or plotdata")->check(CLI::IsMember({"csv", "plotdata"}));
  auto* r = app.add_subcommand("report", "re-emit grid rows");
  r->add_option("--input", report_input, "rows.jsonl from grid")->required()->check(CLI::ExistingFile);
  r->add_option("--format", report_format, "report format")->check(CLI::IsMember(formats));
  r->add_option("--out", report_out, "output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (t->parsed()) return cmd_train(train);
    if (p->parsed()) return cmd_prune(prune, checkpoint);
    if (e->parsed()) return cmd_experiment(experiment);
    if (g->parsed()) return cmd_grid(grid, workers, format);
    if (s->parsed()) return cmd_schedule_dump(dump, phase, spe, discount, dump_format);
    if (r->parsed()) return cmd_report(report_input, report_format, report_out);
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 1;
  }
  return 1;
}
