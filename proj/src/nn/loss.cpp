// Copyright 2026 The prunekit Authors
// SPDX-License-Identifier: Apache-2.0

#include "prunekit/nn/loss.hpp"

#include <algorithm>
#include <cmath>

#include "prunekit/core/error.hpp"

namespace prunekit::nn {

LossResult softmax_cross_entropy(const Tensor& logits, std::span<const int> labels) {
  if (logits.rank() != 2) throw InputError("logits must be (batch, classes), got " + to_string(logits.shape()));
  const std::size_t batch = logits.dim(0), classes = logits.dim(1);
  if (labels.size() != batch) {
    throw InputError("got " + std::to_string(labels.size()) + " labels for a batch of " + std::to_string(batch));
  }
  LossResult out{0, Tensor(logits.shape())};
  const Real inv_batch = Real(1) / static_cast<Real>(batch);
  for (std::size_t n = 0; n < batch; ++n) {
    const int label = labels[n];
    if (label < 0 || static_cast<std::size_t>(label) >= classes) {
      throw InputError("label " + std::to_string(label) + " out of range [0, " + std::to_string(classes) + ")");
    }
    const Real* row = logits.data() + n * classes;
    Real* grow = out.dlogits.data() + n * classes;
    const Real peak = *std::max_element(row, row + classes);
    Real sum = 0;
    for (std::size_t c = 0; c < classes; ++c) sum += std::exp(row[c] - peak);
    const Real log_z = peak + std::log(sum);
    out.loss += (log_z - row[label]) * inv_batch;
    for (std::size_t c = 0; c < classes; ++c) {
      grow[c] = std::exp(row[c] - log_z) * inv_batch;
    }
    grow[label] -= inv_batch;
  }
  return out;
}

}  // namespace prunekit::nn
