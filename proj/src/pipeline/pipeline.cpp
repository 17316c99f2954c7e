// Copyright 2026 The prunekit Authors
// SPDX-License-Identifier: Apache-2.0

#include "prunekit/pipeline/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "prunekit/nn/loss.hpp"
#include "prunekit/pruning/criteria.hpp"
#include "prunekit/pruning/sparsity_schedule.hpp"
#include "prunekit/schedules/allr.hpp"
#include "trainer.hpp"

namespace prunekit::pipeline {

using detail::Trainer;
using schedules::Scheme;

EvalResult evaluate(const nn::Network& net, const io::Dataset& data) {
  if (data.size() == 0) throw InputError("cannot evaluate on an empty dataset");
  constexpr std::size_t chunk = 512;
  std::size_t correct = 0;
  double loss_sum = 0;
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < data.size(); start += chunk) {
    const std::size_t len = std::min(chunk, data.size() - start);
    idx.resize(len);
    std::iota(idx.begin(), idx.end(), start);
    const nn::Tensor logits = net.predict(data.gather(idx));
    const std::size_t k = logits.dim(1);
    const std::span<const int> labels(data.labels.data() + start, len);
    loss_sum += nn::softmax_cross_entropy(logits, labels).loss * static_cast<double>(len);
    for (std::size_t i = 0; i < len; ++i) {
      const double* row = logits.data() + i * k;
      // max_element returns the first maximum, i.e. the lowest class index
      const auto best = static_cast<int>(std::max_element(row, row + k) - row);
      if (best == labels[i]) ++correct;
    }
  }
  const auto n = static_cast<double>(data.size());
  return EvalResult{static_cast<double>(correct) / n, loss_sum / n};
}

namespace {

void expect_kind(const ExperimentConfig& cfg, PipelineKind kind) {
  if (cfg.pipeline != kind) {
    throw ConfigError("pipeline: expected '" + std::string(to_string(kind)) + "', got '" +
                      std::string(to_string(cfg.pipeline)) + "'");
  }
}

Trainer fresh_trainer(const ExperimentConfig& cfg, const io::Split& data, const RunOptions& opts) {
  validate(cfg);
  if (data.train.size() == 0) throw InputError("training split is empty");
  const Rng root(cfg.seed);
  Rng init = root.split(1);
  auto built = build_model(cfg.model, data.train.sample_shape());
  if (built.network.n_classes() < data.train.n_classes) {
    throw ConfigError("model.layers: output width " + std::to_string(built.network.n_classes()) + " is below the " +
                      std::to_string(data.train.n_classes) + " classes in the data");
  }
  built.network.initialize(init, built.init_scales);
  return Trainer(cfg, data, std::move(built.network), root.split(2), 0, opts);
}

/// Dense phase over cfg.schedule; returns its horizon in steps.
std::size_t dense_phase(Trainer& tr, const ExperimentConfig& cfg) {
  const std::size_t steps = cfg.schedule.epochs * tr.steps_per_epoch();
  if (steps > 0) {
    const auto sched = make_schedule(cfg.schedule, steps);
    tr.run_phase("dense", 0, steps, [&](std::size_t t) { return sched.lr_at(t); });
  }
  tr.save("dense");
  return steps;
}

schedules::AllrDiscount discount_for(const detail::PruneOutcome& o, std::size_t retrain_steps,
                                     std::size_t reference_steps) {
  if (o.kept_after == o.kept_before) {
    // nothing removed: zero distance
    const double d2 = std::clamp(static_cast<double>(retrain_steps) / static_cast<double>(reference_steps), 0.0, 1.0);
    return schedules::AllrDiscount{0.0, 0.0, d2, d2};
  }
  const double s = static_cast<double>(o.kept_before - o.kept_after) / static_cast<double>(o.kept_before);
  return schedules::compute_allr_discount(o.before, o.after, s, retrain_steps, reference_steps);
}

/// J hard prune-retrain cycles towards cfg.pruning.sparsity.
/// `reference_steps` is the T in d2 = T_rt / T.
void imp_cycles(Trainer& tr, const ExperimentConfig& cfg, const schedules::BaseSchedule& origin, std::size_t cycles,
                std::size_t reference_steps) {
  const double target = cfg.pruning.sparsity;
  const double p = target > 0.0 ? pruning::per_cycle_fraction(target, cycles) : 0.0;
  const std::size_t rt_steps = cfg.retrain.epochs * tr.steps_per_epoch();
  const pruning::Criterion criterion = effective_criterion(cfg);
  for (std::size_t j = 1; j <= cycles; ++j) {
    const double s_j = j == cycles ? target : pruning::cumulative_sparsity(p, j);
    const auto layers = pruning::prunable_layers(tr.net(), true);
    const pruning::PruneMask mask = pruning::select_mask(layers, criterion, s_j);
    detail::PruneOutcome o = tr.apply(mask, nn::MaskMode::hard, "retrain", j, s_j);
    o.event.discount = discount_for(o, rt_steps, reference_steps);
    const bool discounted = cfg.retrain.scheme == Scheme::ALLR && schedules::allr_cycle_policy(j, cycles);
    o.event.applied_discount = discounted ? o.event.discount->d : 1.0;
    tr.trace().prunes.push_back(o.event);
    const auto rs = make_retrain_schedule(cfg, origin, rt_steps, o.event.applied_discount);
    tr.run_phase("retrain", j, rt_steps, [&](std::size_t t) { return rs.lr_at(t); });
    tr.save("retrain_" + std::to_string(j));
  }
}

RunResult finish_with(Trainer& tr, std::optional<nn::Checkpoint> dense) {
  RunResult r = tr.finish();
  r.dense_checkpoint = std::move(dense);
  return r;
}

}  // namespace

RunResult train_dense(const ExperimentConfig& cfg, const io::Split& data, const RunOptions& opts) {
  expect_kind(cfg, PipelineKind::dense);
  Trainer tr = fresh_trainer(cfg, data, opts);
  dense_phase(tr, cfg);
  return finish_with(tr, tr.checkpoint());
}

RunResult one_shot_imp(const ExperimentConfig& cfg, const io::Split& data, const RunOptions& opts) {
  expect_kind(cfg, PipelineKind::one_shot);
  Trainer tr = fresh_trainer(cfg, data, opts);
  const std::size_t steps = dense_phase(tr, cfg);
  nn::Checkpoint dense = tr.checkpoint();
  imp_cycles(tr, cfg, make_schedule(cfg.schedule, steps), 1, steps);
  return finish_with(tr, std::move(dense));
}

RunResult iterative_imp(const ExperimentConfig& cfg, const io::Split& data, const RunOptions& opts) {
  expect_kind(cfg, PipelineKind::iterative);
  Trainer tr = fresh_trainer(cfg, data, opts);
  const std::size_t steps = dense_phase(tr, cfg);
  nn::Checkpoint dense = tr.checkpoint();
  imp_cycles(tr, cfg, make_schedule(cfg.schedule, steps), cycle_count(cfg), steps);
  return finish_with(tr, std::move(dense));
}

RunResult bimp(const ExperimentConfig& cfg, const io::Split& data, const RunOptions& opts) {
  expect_kind(cfg, PipelineKind::bimp);
  Trainer tr = fresh_trainer(cfg, data, opts);
  const std::size_t t0_steps = dense_phase(tr, cfg);
  nn::Checkpoint dense = tr.checkpoint();
  const std::size_t budget_steps = *cfg.budget_epochs * tr.steps_per_epoch();
  imp_cycles(tr, cfg, make_schedule(cfg.schedule, t0_steps), cycle_count(cfg), budget_steps);
  return finish_with(tr, std::move(dense));
}

RunResult gmp_run(const ExperimentConfig& cfg, const io::Split& data, const RunOptions& opts) {
  expect_kind(cfg, PipelineKind::gmp);
  Trainer tr = fresh_trainer(cfg, data, opts);
  const auto& g = cfg.pruning.gmp;
  const std::size_t spe = tr.steps_per_epoch();
  const std::size_t total = cfg.schedule.epochs * spe;
  const std::size_t t0 = g.start_epoch * spe;
  const std::size_t end = g.end_epoch.value_or(cfg.schedule.epochs * 3 / 4) * spe;
  const std::size_t interval = std::max<std::size_t>(1, (end - t0) / g.pruning_steps);
  const pruning::CubicGMP cubic{g.initial_sparsity, g.final_sparsity, t0, g.pruning_steps, interval};
  const std::size_t last_prune = t0 + g.pruning_steps * interval;
  if (last_prune >= total) {
    throw ConfigError("pruning.gmp.pruning_steps: pruning would run past the end of training");
  }

  std::vector<double> lrs(total);
  if (g.lr_mode == GmpLrMode::base) {
    const auto sched = make_schedule(cfg.schedule, total);
    for (std::size_t t = 0; t < total; ++t) lrs[t] = sched.lr_at(t);
  } else {
    // linear restarts between consecutive pruning points
    std::set<std::size_t> bounds{0, total};
    for (std::size_t k = 0; k <= g.pruning_steps; ++k) bounds.insert(t0 + k * interval);
    for (auto it = bounds.begin(); std::next(it) != bounds.end(); ++it) {
      const std::size_t a = *it;
      const std::size_t b = *std::next(it);
      const schedules::BaseSchedule seg(schedules::Linear{cfg.schedule.lr}, b - a, schedules::kRestartWarmup);
      for (std::size_t t = a; t < b; ++t) lrs[t] = seg.lr_at(t - a);
    }
  }

  tr.net().set_mask_mode(g.mask_mode);
  const pruning::Criterion criterion = effective_criterion(cfg);
  auto before_step = [&](std::size_t t) {
    if (t < t0 || t > last_prune || (t - t0) % interval != 0) return;
    const std::size_t k = (t - t0) / interval;
    const double s_t = pruning::cubic_sparsity(cubic, t);
    const bool hard = g.mask_mode == nn::MaskMode::hard;
    const auto layers = pruning::prunable_layers(tr.net(), hard);
    const pruning::PruneMask mask = pruning::select_mask(layers, criterion, s_t);
    tr.trace().prunes.push_back(tr.apply(mask, g.mask_mode, "gmp", k + 1, s_t).event);
  };
  tr.run_phase("gmp", 0, total, [&](std::size_t t) { return lrs[t]; }, before_step);
  if (g.mask_mode == nn::MaskMode::soft) {
    // make the final selection permanent
    const pruning::PruneMask mask = pruning::current_mask(tr.net());
    tr.trace().prunes.push_back(
        tr.apply(mask, nn::MaskMode::hard, "gmp", g.pruning_steps + 2, g.final_sparsity).event);
  }
  tr.save("gmp");
  return finish_with(tr, std::nullopt);
}

RunResult prune_and_retrain(const ExperimentConfig& cfg, const nn::Checkpoint& dense, const io::Split& data,
                            const RunOptions& opts) {
  expect_kind(cfg, PipelineKind::one_shot);
  validate(cfg);
  const auto expected = build_model(cfg.model, data.train.sample_shape()).network;
  if (expected.input_shape() != dense.network.input_shape() ||
      expected.layers().size() != dense.network.layers().size()) {
    throw ConfigError("model: checkpoint network does not match the configured model");
  }
  for (std::size_t i = 0; i < expected.layers().size(); ++i) {
    if (!(expected.layers()[i].spec() == dense.network.layers()[i].spec())) {
      throw ConfigError("model.layers[" + std::to_string(i) + "]: differs from the checkpoint (" +
                        nn::describe(dense.network.layers()[i].spec()) + ")");
    }
  }
  Rng data_rng(cfg.seed, 2);
  data_rng.set_state(dense.rng_state);
  Trainer tr(cfg, data, dense.network, std::move(data_rng), dense.step, opts);
  const std::size_t steps = cfg.schedule.epochs * tr.steps_per_epoch();
  imp_cycles(tr, cfg, make_schedule(cfg.schedule, steps), 1, steps);
  return finish_with(tr, dense);
}

RunResult run_experiment(const ExperimentConfig& cfg, const io::Split& data, const RunOptions& opts) {
  switch (cfg.pipeline) {
    case PipelineKind::dense: return train_dense(cfg, data, opts);
    case PipelineKind::one_shot: return one_shot_imp(cfg, data, opts);
    case PipelineKind::iterative: return iterative_imp(cfg, data, opts);
    case PipelineKind::bimp: return bimp(cfg, data, opts);
    case PipelineKind::gmp: return gmp_run(cfg, data, opts);
  }
  throw ConfigError("pipeline: unknown kind");
}

RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  validate(cfg);
  return run_experiment(cfg, io::load_dataset(cfg.data), opts);
}

}  // namespace prunekit::pipeline
