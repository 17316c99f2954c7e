// Copyright 2026 The prunekit Authors
// SPDX-License-Identifier: Apache-2.0

// Small experiment configs shared by the pipeline, cli-io and acceptance tests.
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "prunekit/pipeline/config.hpp"

namespace prunekit::testing {

inline pipeline::LayerConfig dense_layer(std::size_t units, double init_scale = 1.0) {
  pipeline::LayerConfig l;
  l.type = "dense";
  l.units = units;
  l.init_scale = init_scale;
  return l;
}

inline pipeline::LayerConfig relu_layer() {
  pipeline::LayerConfig l;
  l.type = "relu";
  return l;
}

/// MLP with ReLU between the given hidden widths and `classes` outputs.
inline pipeline::ModelConfig mlp(const std::vector<std::size_t>& hidden, std::size_t classes) {
  pipeline::ModelConfig m;
  for (std::size_t h : hidden) {
    m.layers.push_back(dense_layer(h));
    m.layers.push_back(relu_layer());
  }
  m.layers.push_back(dense_layer(classes));
  return m;
}

inline io::DatasetSpec blobs_data(std::size_t n, std::uint64_t seed, double noise = 0.3) {
  io::SyntheticSource s;
  s.kind = io::SyntheticKind::blobs;
  s.n_samples = n;
  s.n_classes = 2;
  s.noise = noise;
  s.seed = seed;
  io::DatasetSpec d;
  d.source = s;
  d.train_fraction = 0.75;
  d.split_seed = seed;
  return d;
}

inline io::DatasetSpec spirals_data(std::size_t n, std::uint64_t seed, double noise = 0.05) {
  io::SyntheticSource s;
  s.kind = io::SyntheticKind::two_spirals;
  s.n_samples = n;
  s.n_classes = 2;
  s.noise = noise;
  s.seed = seed;
  io::DatasetSpec d;
  d.source = s;
  d.train_fraction = 0.75;
  d.split_seed = seed;
  return d;
}

/// A fast config: 8-unit MLP on 120 blob samples, batch 30, 3 steps per epoch.
inline pipeline::ExperimentConfig tiny_config(pipeline::PipelineKind kind, std::uint64_t seed = 0) {
  pipeline::ExperimentConfig cfg;
  cfg.name = "tiny";
  cfg.seed = seed;
  cfg.pipeline = kind;
  cfg.model = mlp({8}, 2);
  cfg.data = blobs_data(120, 7);
  cfg.schedule.kind = "linear";
  cfg.schedule.lr = 0.1;
  cfg.schedule.epochs = 4;
  cfg.training.batch_size = 30;
  cfg.retrain.epochs = 1;
  cfg.pruning.sparsity = 0.5;
  if (kind == pipeline::PipelineKind::iterative) cfg.retrain.cycles = 2;
  return cfg;
}

}  // namespace prunekit::testing
