// Copyright 2026 The prunekit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "prunekit/nn/network.hpp"

namespace prunekit::nn {

struct LayerGradError {
  std::size_t layer = 0;
  /// Max over the layer's parameter entries of |a - n| / max(|a|, |n|, floor).
  double max_rel_error = 0;
  bool pass = true;
};

struct GradCheckReport {
  std::vector<LayerGradError> layers;  // only layers that own parameters
  double max_rel_error = 0;
  bool pass = true;
};

/// Relative error floor: entries where both gradients are below this in
/// magnitude are compared absolutely.
inline constexpr double kGradCheckFloor = 1e-8;

/// Analytic gradients of the mean cross-entropy, one tensor per parameter
/// (Network::parameters order).
std::vector<Tensor> analytic_gradients(Network& net, const Tensor& batch, std::span<const int> labels);

/// Central differences (L(w+h) - L(w-h)) / 2h for every parameter entry.
std::vector<Tensor> numeric_gradients(Network& net, const Tensor& batch, std::span<const int> labels, double h);

/// Per-layer comparison. Masked entries are skipped: they are frozen in hard
/// mode and carry a deliberately dense gradient in soft mode.
GradCheckReport compare_gradients(const Network& net, std::span<const Tensor> analytic,
                                  std::span<const Tensor> numeric, double tol);

GradCheckReport grad_check(Network& net, const Tensor& batch, std::span<const int> labels, double h, double tol);

}  // namespace prunekit::nn
