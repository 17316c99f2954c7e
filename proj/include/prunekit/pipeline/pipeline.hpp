// Copyright 2026 The prunekit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>

#include "prunekit/core/error.hpp"
#include "prunekit/io/dataset.hpp"
#include "prunekit/metrics/metrics.hpp"
#include "prunekit/nn/checkpoint.hpp"
#include "prunekit/nn/network.hpp"
#include "prunekit/pipeline/config.hpp"
#include "prunekit/pipeline/trace.hpp"
#include "prunekit/pruning/mask.hpp"

namespace prunekit::pipeline {

/// A non-finite training loss. The trace ends with an `abort` record.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, Trace trace) : Error(what), trace_(std::move(trace)) {}
  const Trace& trace() const { return trace_; }

 private:
  Trace trace_;
};

struct EvalResult {
  double accuracy = 0;
  double loss = 0;
};

/// Top-1 accuracy and mean loss; argmax ties go to the lowest class.
/// Throws InputError on an empty dataset.
EvalResult evaluate(const nn::Network& net, const io::Dataset& data);

struct RunOptions {
  /// When set, a checkpoint is written at the end of every phase.
  std::optional<std::filesystem::path> checkpoint_dir;
};

struct RunResult {
  nn::Network network;
  Trace trace;
  pruning::PruneMask mask;
  double accuracy = 0;
  double loss = 0;
  metrics::FlopsReport flops;
  std::size_t steps_per_epoch = 0;
  /// State at the end of dense training, usable by prune_and_retrain.
  std::optional<nn::Checkpoint> dense_checkpoint;
};

/// Dispatches on cfg.pipeline.
RunResult run_experiment(const ExperimentConfig& cfg, const io::Split& data, const RunOptions& opts = {});
RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

RunResult train_dense(const ExperimentConfig& cfg, const io::Split& data, const RunOptions& opts = {});
RunResult one_shot_imp(const ExperimentConfig& cfg, const io::Split& data, const RunOptions& opts = {});
RunResult iterative_imp(const ExperimentConfig& cfg, const io::Split& data, const RunOptions& opts = {});
RunResult bimp(const ExperimentConfig& cfg, const io::Split& data, const RunOptions& opts = {});
RunResult gmp_run(const ExperimentConfig& cfg, const io::Split& data, const RunOptions& opts = {});

/// One prune-retrain cycle on a densely trained checkpoint, using the
/// config's schedule as the origin. Given the checkpoint a dense or one-shot
/// run produced, the result matches that one-shot run bit for bit.
RunResult prune_and_retrain(const ExperimentConfig& cfg, const nn::Checkpoint& dense, const io::Split& data,
                            const RunOptions& opts = {});

}  // namespace prunekit::pipeline
