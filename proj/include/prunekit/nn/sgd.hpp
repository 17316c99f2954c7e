// Copyright 2026 The prunekit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>

#include "prunekit/nn/network.hpp"

namespace prunekit::nn {

struct SgdConfig {
  double momentum = 0.9;
  /// Coupled L2: added to the gradient before the momentum buffer.
  double weight_decay = 0.0;
  MaskMode mask_mode = MaskMode::hard;

  friend bool operator==(const SgdConfig&, const SgdConfig&) = default;
};

/// Throws InputError when momentum is outside [0, 1) or weight decay is negative.
void validate(const SgdConfig& cfg);

/// buf <- momentum*buf + (grad + wd*value); value <- value - lr*buf.
/// Hard mode re-zeroes masked values and their momentum entries afterwards.
void sgd_step(std::span<Parameter* const> params, double lr, const SgdConfig& cfg);

}  // namespace prunekit::nn
