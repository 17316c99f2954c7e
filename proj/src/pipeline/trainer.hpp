// Copyright 2026 The prunekit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "prunekit/core/rng.hpp"
#include "prunekit/pipeline/pipeline.hpp"

namespace prunekit::pipeline::detail {

/// Epoch-wise reshuffled minibatches. A new permutation is drawn whenever
/// the previous one is exhausted, so phase boundaries at whole epochs leave
/// only the generator state to persist.
class BatchStream {
 public:
  BatchStream(std::size_t n, std::size_t batch, Rng rng);
  std::span<const std::size_t> next();
  const Rng& rng() const { return rng_; }
  bool at_epoch_start() const { return pos_ == 0; }

 private:
  std::vector<std::size_t> order_;
  std::size_t batch_;
  std::size_t pos_ = 0;
  Rng rng_;
};

struct PruneOutcome {
  PruneEvent event;
  std::vector<double> before;  // concatenated prunable weights
  std::vector<double> after;
  std::size_t kept_before = 0;
  std::size_t kept_after = 0;
};

class Trainer {
 public:
  Trainer(const ExperimentConfig& cfg, const io::Split& data, nn::Network net, Rng data_rng, std::size_t start_step,
          const RunOptions& opts);

  nn::Network& net() { return net_; }
  Trace& trace() { return trace_; }
  std::size_t step() const { return step_; }
  std::size_t steps_per_epoch() const { return spe_; }

  /// Runs `steps` optimizer steps; lr_at and before_step get the phase-local index.
  void run_phase(const std::string& phase, std::size_t cycle, std::size_t steps,
                 const std::function<double(std::size_t)>& lr_at,
                 const std::function<void(std::size_t)>& before_step = {});

  /// Applies `mask` with evaluations on both sides and logs the event.
  PruneOutcome apply(const pruning::PruneMask& mask, nn::MaskMode mode, const std::string& phase,
                     std::size_t cycle, double target);

  nn::Checkpoint checkpoint() const;
  void save(const std::string& name) const;
  RunResult finish();

 private:
  const EvalResult& eval();
  void record(const std::string& phase, std::size_t cycle, const std::string& event, bool with_eval);

  const ExperimentConfig& cfg_;
  const io::Split& data_;
  nn::Network net_;
  BatchStream batches_;
  std::size_t spe_;
  std::size_t step_;
  RunOptions opts_;
  Trace trace_;
  std::optional<double> last_lr_;
  double loss_sum_ = 0;
  std::size_t loss_n_ = 0;
  std::optional<EvalResult> eval_cache_;
};

}  // namespace prunekit::pipeline::detail
