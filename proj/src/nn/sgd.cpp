// Copyright 2026 The prunekit Authors
// SPDX-License-Identifier: Apache-2.0

#include "prunekit/nn/sgd.hpp"

#include <cmath>
#include <string>

#include "prunekit/core/error.hpp"

namespace prunekit::nn {

void validate(const SgdConfig& cfg) {
  if (!(cfg.momentum >= 0.0 && cfg.momentum < 1.0)) {
    throw InputError("momentum must be in [0, 1), got " + std::to_string(cfg.momentum));
  }
  if (!(cfg.weight_decay >= 0.0)) {
    throw InputError("weight decay must be nonnegative, got " + std::to_string(cfg.weight_decay));
  }
}

void sgd_step(std::span<Parameter* const> params, double lr, const SgdConfig& cfg) {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw InputError("learning rate must be finite and >= 0");
  validate(cfg);
  const Real mu = cfg.momentum, wd = cfg.weight_decay, eta = lr;
  for (Parameter* p : params) {
    Real* value = p->value.data();
    Real* buf = p->momentum.data();
    const Real* grad = p->grad.data();
    const std::size_t n = p->size();
    for (std::size_t i = 0; i < n; ++i) {
      buf[i] = mu * buf[i] + (grad[i] + wd * value[i]);
      value[i] -= eta * buf[i];
    }
    if (p->mask && cfg.mask_mode == MaskMode::hard) {
      const auto& mask = *p->mask;
      for (std::size_t i = 0; i < n; ++i) {
        if (!mask[i]) {
          value[i] = 0;
          buf[i] = 0;
        }
      }
    }
  }
}

}  // namespace prunekit::nn
