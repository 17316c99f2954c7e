// Copyright 2026 The prunekit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>

#include "prunekit/nn/tensor.hpp"

namespace prunekit::nn {

struct LossResult {
  Real loss = 0;
  Tensor dlogits;
};

/// Mean softmax cross-entropy over the batch.
/// dlogits = (softmax - onehot) / batch_size.
LossResult softmax_cross_entropy(const Tensor& logits, std::span<const int> labels);

}  // namespace prunekit::nn
