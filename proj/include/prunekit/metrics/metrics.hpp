// Copyright 2026 The prunekit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "prunekit/nn/network.hpp"
#include "prunekit/pruning/mask.hpp"

namespace prunekit::metrics {

/// 1 - (t_pre - t_post) / t_pre. Not clamped: values above 1 mean pruning
/// improved accuracy. Throws UndefinedMetricError when t_pre <= 0.
double stability(double t_pre, double t_post);

struct StabilityRecord {
  double t_pre = 0;
  double t_post = 0;
  double delta = 0;
  /// Set when delta > 1.
  std::string note;
  friend bool operator==(const StabilityRecord&, const StabilityRecord&) = default;
};

StabilityRecord make_stability(double t_pre, double t_post);

struct LayerFlops {
  std::size_t layer_index = 0;
  std::string kind;
  std::uint64_t dense = 0;
  std::uint64_t sparse = 0;
  /// Activation-style layers (ReLU, Flatten, bias adds excluded) cost the
  /// same dense and sparse.
  bool activation = false;
};

/// Per-sample inference FLOPs; a multiply-add counts as 2.
struct FlopsReport {
  std::uint64_t dense = 0;   // F_d including activation layers
  std::uint64_t sparse = 0;  // F_s including activation layers
  double speedup = 1.0;      // F_d / F_s; +inf when F_s == 0
  std::uint64_t dense_weights_only = 0;
  std::uint64_t sparse_weights_only = 0;
  double speedup_weights_only = 1.0;
  std::vector<LayerFlops> per_layer;
  /// Some prunable layer has no kept weight.
  bool collapsed = false;
};

/// Dense:  2*n_in*n_out (dense) / 2*kept (sparse), plus n_out bias adds.
/// Conv2D: 2*c_in*k_h*k_w*c_out*H_out*W_out / 2*kept*H_out*W_out, plus
///         c_out*H_out*W_out bias adds.
/// ReLU and Flatten count their element counts.
/// Sparse counts depend only on which entries the mask keeps; layers the
/// mask does not mention count as dense.
FlopsReport count_flops(const nn::Network& net, const pruning::PruneMask& mask, const nn::Shape& input_shape);

struct LayerSparsity {
  std::size_t layer_index = 0;
  std::size_t kept = 0;
  std::size_t total = 0;
  double sparsity = 0;
};

struct SparsityReport {
  double overall = 0;
  std::size_t kept = 0;
  std::size_t total = 0;
  std::vector<LayerSparsity> per_layer;
};

SparsityReport sparsity_report(const pruning::PruneMask& mask);

}  // namespace prunekit::metrics
