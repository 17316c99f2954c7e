// Copyright 2026 The prunekit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "prunekit/metrics/metrics.hpp"
#include "prunekit/schedules/allr.hpp"

namespace prunekit::pipeline {

/// One metrics sample. `step` counts optimizer steps completed so far
/// across all phases.
struct TraceRecord {
  std::size_t step = 0;
  std::string phase;  // dense | retrain | gmp
  std::size_t cycle = 0;
  /// Rate of the most recent step; absent before any step of the phase.
  std::optional<double> lr;
  double sparsity = 0;
  /// Mean minibatch loss since the previous record.
  std::optional<double> train_loss;
  std::optional<double> eval_accuracy;
  std::optional<double> eval_loss;
  std::string event;  // eval | phase_end | prune_pre | prune_post | abort
  std::uint64_t seed = 0;
  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

struct PhaseAccount {
  std::string phase;
  std::size_t cycle = 0;
  std::size_t start_step = 0;
  std::size_t steps = 0;
  double epochs = 0;
  friend bool operator==(const PhaseAccount&, const PhaseAccount&) = default;
};

struct PruneEvent {
  std::size_t step = 0;
  std::size_t cycle = 0;
  double target_sparsity = 0;
  double achieved_sparsity = 0;
  metrics::StabilityRecord stability;
  /// Computed for every IMP prune; absent for GMP.
  std::optional<schedules::AllrDiscount> discount;
  /// Discount the following retrain phase actually used (1 when undiscounted).
  double applied_discount = 1.0;
  std::vector<std::size_t> collapsed_layers;
  friend bool operator==(const PruneEvent&, const PruneEvent&) = default;
};

struct Trace {
  std::uint64_t seed = 0;
  std::vector<TraceRecord> records;
  /// Learning rate of every optimizer step, in order.
  std::vector<double> lr_per_step;
  std::vector<PhaseAccount> phases;
  std::vector<PruneEvent> prunes;

  std::size_t total_steps() const { return lr_per_step.size(); }
  friend bool operator==(const Trace&, const Trace&) = default;
};

}  // namespace prunekit::pipeline
