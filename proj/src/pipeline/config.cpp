// Copyright 2026 The prunekit Authors
// SPDX-License-Identifier: Apache-2.0

#include "prunekit/pipeline/config.hpp"

#include <cmath>

#include "prunekit/core/error.hpp"

namespace prunekit::pipeline {

namespace {

[[noreturn]] void fail(const std::string& key, const std::string& what) { throw ConfigError(key + ": " + what); }

void validate_schedule(const ScheduleConfig& sc, const std::string& key, bool needs_epochs) {
  if (sc.kind != "constant" && sc.kind != "stepped" && sc.kind != "cosine" && sc.kind != "linear") {
    fail(key + ".kind", "unknown schedule kind '" + sc.kind + "'");
  }
  if (!(sc.lr >= 0.0) || !std::isfinite(sc.lr)) fail(key + ".lr", "must be finite and nonnegative");
  if (!(sc.warmup >= 0.0 && sc.warmup < 1.0)) fail(key + ".warmup", "must be in [0, 1)");
  if (needs_epochs && sc.epochs == 0) fail(key + ".epochs", "must be positive");
  if (sc.kind == "stepped") {
    if (sc.milestones.size() != sc.factors.size()) fail(key + ".factors", "need one factor per milestone");
    double prev = 0.0;
    for (double m : sc.milestones) {
      if (!(m > prev && m < 1.0)) fail(key + ".milestones", "must be strictly increasing in (0, 1)");
      prev = m;
    }
    for (double f : sc.factors) {
      if (!(f >= 0.0) || !std::isfinite(f)) fail(key + ".factors", "must be finite and nonnegative");
    }
  } else if (!sc.milestones.empty() || !sc.factors.empty()) {
    fail(key + ".milestones", "only stepped schedules take milestones");
  }
}

}  // namespace

std::string_view to_string(PipelineKind kind) {
  switch (kind) {
    case PipelineKind::dense: return "dense";
    case PipelineKind::one_shot: return "one_shot";
    case PipelineKind::iterative: return "iterative";
    case PipelineKind::bimp: return "bimp";
    case PipelineKind::gmp: return "gmp";
  }
  return "?";
}

std::optional<PipelineKind> parse_pipeline(std::string_view name) {
  for (auto k : {PipelineKind::dense, PipelineKind::one_shot, PipelineKind::iterative, PipelineKind::bimp,
                 PipelineKind::gmp}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

std::size_t steps_per_epoch(std::size_t n_train, std::size_t batch_size) {
  if (batch_size == 0) throw ConfigError("training.batch_size: must be positive");
  return (n_train + batch_size - 1) / batch_size;
}

pruning::Criterion effective_criterion(const ExperimentConfig& cfg) {
  if (cfg.pruning.criterion) return *cfg.pruning.criterion;
  return cfg.pipeline == PipelineKind::gmp ? pruning::Criterion::uniform_plus : pruning::Criterion::global;
}

std::size_t cycle_count(const ExperimentConfig& cfg) {
  switch (cfg.pipeline) {
    case PipelineKind::dense:
    case PipelineKind::gmp: return 0;
    case PipelineKind::one_shot: return 1;
    case PipelineKind::iterative: return cfg.retrain.cycles.value_or(0);
    case PipelineKind::bimp:
      if (cfg.retrain.cycles) return *cfg.retrain.cycles;
      if (!cfg.budget_epochs || cfg.retrain.epochs == 0 || *cfg.budget_epochs <= cfg.schedule.epochs) return 0;
      return (*cfg.budget_epochs - cfg.schedule.epochs) / cfg.retrain.epochs;
  }
  return 0;
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.model.layers.empty()) fail("model.layers", "at least one layer is required");
  for (std::size_t i = 0; i < cfg.model.layers.size(); ++i) {
    const auto& l = cfg.model.layers[i];
    const std::string key = "model.layers[" + std::to_string(i) + "]";
    if (l.type == "dense") {
      if (l.units == 0) fail(key + ".units", "must be positive");
    } else if (l.type == "conv2d") {
      if (l.out_channels == 0) fail(key + ".out_channels", "must be positive");
      if (l.kernel == 0) fail(key + ".kernel", "must be positive");
      if (l.stride == 0) fail(key + ".stride", "must be positive");
    } else if (l.type != "relu" && l.type != "flatten") {
      fail(key + ".type", "unknown layer type '" + l.type + "'");
    }
    if (!(l.init_scale > 0.0) || !std::isfinite(l.init_scale)) fail(key + ".init_scale", "must be positive");
  }
  if (!(cfg.data.train_fraction > 0.0 && cfg.data.train_fraction < 1.0)) {
    fail("data.train_fraction", "must be in (0, 1)");
  }
  // a dense run may have zero epochs and return the initialized network
  validate_schedule(cfg.schedule, "schedule", cfg.pipeline != PipelineKind::dense);

  const auto& t = cfg.training;
  if (!(t.momentum >= 0.0 && t.momentum < 1.0)) fail("training.momentum", "must be in [0, 1)");
  if (!(t.weight_decay >= 0.0) || !std::isfinite(t.weight_decay)) {
    fail("training.weight_decay", "must be finite and nonnegative");
  }
  if (t.batch_size == 0) fail("training.batch_size", "must be positive");
  if (t.precision != "float64") fail("training.precision", "only float64 is supported, got '" + t.precision + "'");

  const bool imp = cfg.pipeline == PipelineKind::one_shot || cfg.pipeline == PipelineKind::iterative ||
                   cfg.pipeline == PipelineKind::bimp;
  if (imp) {
    if (!(cfg.pruning.sparsity >= 0.0 && cfg.pruning.sparsity < 1.0)) fail("pruning.sparsity", "must be in [0, 1)");
    if (cfg.retrain.epochs == 0) fail("retrain.epochs", "must be positive");
    if (cfg.retrain.lr && (!(*cfg.retrain.lr >= 0.0) || !std::isfinite(*cfg.retrain.lr))) {
      fail("retrain.lr", "must be finite and nonnegative");
    }
    const auto scheme = cfg.retrain.scheme;
    const bool restart = scheme == schedules::Scheme::CLR || scheme == schedules::Scheme::LLR ||
                         scheme == schedules::Scheme::ALLR;
    if (cfg.retrain.lr && !restart) fail("retrain.lr", "only CLR, LLR and ALLR take a restart rate");
    if (scheme == schedules::Scheme::tuned) {
      if (!cfg.retrain.tuned) fail("retrain.tuned", "required by the tuned scheme");
      validate_schedule(*cfg.retrain.tuned, "retrain.tuned", false);
    } else if (cfg.retrain.tuned) {
      fail("retrain.tuned", "only used by the tuned scheme");
    }
    if (scheme == schedules::Scheme::LRW && cfg.retrain.epochs > cfg.schedule.epochs) {
      fail("retrain.epochs", "LRW needs a retrain length no longer than the schedule");
    }
  } else if (cfg.retrain.cycles) {
    fail("retrain.cycles", "only pruning pipelines with retraining take cycles");
  }
  if (cfg.pipeline != PipelineKind::bimp && cfg.budget_epochs) fail("budget_epochs", "only BIMP takes a budget");

  switch (cfg.pipeline) {
    case PipelineKind::dense: break;
    case PipelineKind::one_shot:
      if (cfg.retrain.cycles && *cfg.retrain.cycles != 1) fail("retrain.cycles", "one-shot runs have exactly 1 cycle");
      break;
    case PipelineKind::iterative:
      if (!cfg.retrain.cycles) fail("retrain.cycles", "required for iterative runs");
      if (*cfg.retrain.cycles < 2) fail("retrain.cycles", "iterative runs need at least 2 cycles");
      break;
    case PipelineKind::bimp: {
      if (cfg.schedule.kind != "linear") fail("schedule.kind", "BIMP trains with a linear schedule");
      if (!cfg.budget_epochs) fail("budget_epochs", "required for BIMP");
      const std::size_t total = *cfg.budget_epochs;
      const std::size_t t0 = cfg.schedule.epochs;
      if (t0 >= total) fail("schedule.epochs", "T0 must be below the budget");
      if (cfg.retrain.scheme != schedules::Scheme::LLR && cfg.retrain.scheme != schedules::Scheme::ALLR) {
        fail("retrain.scheme", "BIMP retrains with LLR or ALLR");
      }
      const std::size_t j = cycle_count(cfg);
      if (j == 0 || t0 + j * cfg.retrain.epochs != total) {
        fail(cfg.retrain.cycles ? "retrain.cycles" : "retrain.epochs",
             "T0 + J * T_rt must equal the budget (" + std::to_string(t0) + " + " + std::to_string(j) + " * " +
                 std::to_string(cfg.retrain.epochs) + " != " + std::to_string(total) + ")");
      }
      break;
    }
    case PipelineKind::gmp: {
      const auto& g = cfg.pruning.gmp;
      if (!(g.initial_sparsity >= 0.0 && g.initial_sparsity <= g.final_sparsity && g.final_sparsity < 1.0)) {
        fail("pruning.gmp", "need 0 <= initial_sparsity <= final_sparsity < 1");
      }
      if (g.pruning_steps == 0) fail("pruning.gmp.pruning_steps", "must be positive");
      const std::size_t end = g.end_epoch.value_or(cfg.schedule.epochs * 3 / 4);
      if (end >= cfg.schedule.epochs) fail("pruning.gmp.end_epoch", "must be before the end of training");
      if (end <= g.start_epoch) fail("pruning.gmp.start_epoch", "must be before end_epoch");
      break;
    }
  }
}

BuiltModel build_model(const ModelConfig& model, const nn::Shape& sample_shape) {
  const nn::Shape input = model.input_shape.value_or(sample_shape);
  std::vector<nn::LayerSpec> specs;
  nn::Shape shape = input;
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    const auto& l = model.layers[i];
    const std::string key = "model.layers[" + std::to_string(i) + "]";
    nn::LayerSpec spec;
    if (l.type == "dense") {
      if (shape.size() != 1) fail(key, "dense layers need a flat input, got " + nn::to_string(shape));
      spec = nn::Dense{shape[0], l.units, l.bias};
    } else if (l.type == "conv2d") {
      if (shape.size() != 3) fail(key, "conv2d layers need a (c, h, w) input, got " + nn::to_string(shape));
      spec = nn::Conv2D{shape[0], l.out_channels, l.kernel, l.kernel, l.stride, l.padding, l.bias};
    } else if (l.type == "relu") {
      spec = nn::ReLU{};
    } else if (l.type == "flatten") {
      spec = nn::Flatten{};
    } else {
      fail(key + ".type", "unknown layer type '" + l.type + "'");
    }
    try {
      shape = nn::Layer(spec).output_shape(shape);
    } catch (const ConfigError& e) {
      fail(key, e.what());
    }
    specs.push_back(spec);
  }
  BuiltModel out{nn::Network(input, std::move(specs)), {}};
  for (const auto& l : model.layers) out.init_scales.push_back(l.init_scale);
  return out;
}

schedules::ScheduleKind schedule_kind(const ScheduleConfig& sc) {
  if (sc.kind == "constant") return schedules::Constant{sc.lr};
  if (sc.kind == "stepped") return schedules::Stepped{sc.lr, sc.milestones, sc.factors};
  if (sc.kind == "cosine") return schedules::Cosine{sc.lr};
  if (sc.kind == "linear") return schedules::Linear{sc.lr};
  throw ConfigError("schedule.kind: unknown schedule kind '" + sc.kind + "'");
}

schedules::BaseSchedule make_schedule(const ScheduleConfig& sc, std::size_t horizon_steps) {
  return schedules::BaseSchedule(schedule_kind(sc), horizon_steps, sc.warmup);
}

schedules::RetrainSchedule make_retrain_schedule(const ExperimentConfig& cfg, const schedules::BaseSchedule& origin,
                                                 std::size_t steps, double discount) {
  const schedules::Scheme scheme = cfg.retrain.scheme;
  if (scheme == schedules::Scheme::tuned) return schedules::tuned_retrain(make_schedule(*cfg.retrain.tuned, steps));
  if (cfg.retrain.lr) {
    // restart schemes read only eta_1 from the origin
    return schedules::translate(schedules::BaseSchedule(schedules::Constant{*cfg.retrain.lr}, origin.horizon()),
                                scheme, steps, discount);
  }
  return schedules::translate(origin, scheme, steps, discount);
}

}  // namespace prunekit::pipeline
