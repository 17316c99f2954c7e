// Copyright 2026 The prunekit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "prunekit/io/dataset.hpp"
#include "prunekit/nn/network.hpp"
#include "prunekit/nn/sgd.hpp"
#include "prunekit/pruning/criteria.hpp"
#include "prunekit/schedules/schedule.hpp"

namespace prunekit::pipeline {

enum class PipelineKind { dense, one_shot, iterative, bimp, gmp };

std::string_view to_string(PipelineKind kind);
std::optional<PipelineKind> parse_pipeline(std::string_view name);

/// One layer of the model. Input widths and channel counts are inferred
/// from the preceding layer, so only output sizes are declared.
struct LayerConfig {
  std::string type = "dense";  // dense | conv2d | relu | flatten
  std::size_t units = 0;         // dense
  std::size_t out_channels = 0;  // conv2d
  std::size_t kernel = 3;        // conv2d, square
  std::size_t stride = 1;
  std::size_t padding = 0;
  bool bias = true;
  /// Multiplies the initialization bound of this layer.
  double init_scale = 1.0;
  friend bool operator==(const LayerConfig&, const LayerConfig&) = default;
};

struct ModelConfig {
  /// Per-sample input shape; taken from the data when absent.
  std::optional<nn::Shape> input_shape;
  std::vector<LayerConfig> layers;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Epoch-denominated schedule; converted to steps once the data size is known.
struct ScheduleConfig {
  std::string kind = "linear";  // constant | stepped | cosine | linear
  double lr = 0.1;
  std::size_t epochs = 10;
  double warmup = 0.1;
  std::vector<double> milestones;
  std::vector<double> factors;
  friend bool operator==(const ScheduleConfig&, const ScheduleConfig&) = default;
};

struct RetrainConfig {
  schedules::Scheme scheme = schedules::Scheme::LLR;
  std::size_t epochs = 1;  // T_rt per cycle
  /// J. Required for iterative runs; derived from the budget for BIMP.
  std::optional<std::size_t> cycles;
  /// Peak rate of CLR/LLR/ALLR restarts; defaults to the schedule's lr.
  std::optional<double> lr;
  /// Schedule for the `tuned` scheme; its epochs are ignored.
  std::optional<ScheduleConfig> tuned;
  friend bool operator==(const RetrainConfig&, const RetrainConfig&) = default;
};

enum class GmpLrMode { base, cyclic_linear };

struct GmpConfig {
  double initial_sparsity = 0.0;
  double final_sparsity = 0.9;
  std::size_t start_epoch = 0;
  /// Last pruning epoch; 3/4 of training when absent.
  std::optional<std::size_t> end_epoch;
  std::size_t pruning_steps = 20;
  nn::MaskMode mask_mode = nn::MaskMode::soft;
  GmpLrMode lr_mode = GmpLrMode::base;
  friend bool operator==(const GmpConfig&, const GmpConfig&) = default;
};

struct PruningConfig {
  /// Global for IMP pipelines and uniform_plus for GMP when absent.
  std::optional<pruning::Criterion> criterion;
  double sparsity = 0.9;
  GmpConfig gmp;
  friend bool operator==(const PruningConfig&, const PruningConfig&) = default;
};

struct TrainingConfig {
  double momentum = 0.9;
  double weight_decay = 0.0;
  std::size_t batch_size = 64;
  /// 0 disables periodic evaluation; phase ends and prune events still evaluate.
  std::size_t eval_every_epochs = 1;
  std::string precision = "float64";
  friend bool operator==(const TrainingConfig&, const TrainingConfig&) = default;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::uint64_t seed = 0;
  PipelineKind pipeline = PipelineKind::dense;
  ModelConfig model;
  io::DatasetSpec data;
  /// Dense training; for BIMP this is the T0 phase.
  ScheduleConfig schedule;
  RetrainConfig retrain;
  PruningConfig pruning;
  /// Total budget T in epochs. BIMP only.
  std::optional<std::size_t> budget_epochs;
  TrainingConfig training;
  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Checks everything that does not depend on the data. Errors name the
/// offending key, e.g. "retrain.cycles: ...".
void validate(const ExperimentConfig& cfg);

/// Builds the network for a per-sample input shape. The returned scales
/// are indexed by layer position.
struct BuiltModel {
  nn::Network network;
  std::vector<double> init_scales;
};
BuiltModel build_model(const ModelConfig& model, const nn::Shape& sample_shape);

schedules::ScheduleKind schedule_kind(const ScheduleConfig& sc);
schedules::BaseSchedule make_schedule(const ScheduleConfig& sc, std::size_t horizon_steps);

/// Retraining schedule of one cycle over `steps` steps. A configured
/// retrain.lr replaces the origin's eta_1 for the restarting schemes.
schedules::RetrainSchedule make_retrain_schedule(const ExperimentConfig& cfg, const schedules::BaseSchedule& origin,
                                                 std::size_t steps, double discount);

pruning::Criterion effective_criterion(const ExperimentConfig& cfg);

/// J for BIMP, J from the config for iterative runs, 1 for one-shot, 0 otherwise.
std::size_t cycle_count(const ExperimentConfig& cfg);

/// ceil(n_train / batch_size).
std::size_t steps_per_epoch(std::size_t n_train, std::size_t batch_size);

}  // namespace prunekit::pipeline
