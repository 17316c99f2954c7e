// Copyright 2026 The prunekit Authors
// SPDX-License-Identifier: Apache-2.0

#include "prunekit/schedules/allr.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "prunekit/core/error.hpp"

namespace prunekit::schedules {

AllrDiscount compute_allr_discount(std::span<const double> before, std::span<const double> after,
                                   double pruned_fraction, std::size_t retrain_steps, std::size_t train_steps) {
  if (before.size() != after.size()) throw InputError("weight vectors before and after pruning differ in length");
  if (!(pruned_fraction > 0.0 && pruned_fraction <= 1.0)) {
    throw InputError("pruned fraction must be in (0, 1], got " + std::to_string(pruned_fraction));
  }
  if (train_steps == 0) throw InputError("original training length must be positive");
  double norm_sq = 0, dist_sq = 0;
  for (std::size_t i = 0; i < before.size(); ++i) {
    norm_sq += before[i] * before[i];
    const double diff = before[i] - after[i];
    dist_sq += diff * diff;
  }
  if (norm_sq == 0.0) throw DegenerateModelError("cannot normalize pruning distance: weight norm is zero");
  AllrDiscount out;
  out.d1_unclamped = std::sqrt(dist_sq) / (std::sqrt(norm_sq) * std::sqrt(pruned_fraction));
  out.d1 = std::clamp(out.d1_unclamped, 0.0, 1.0);
  out.d2 = std::clamp(static_cast<double>(retrain_steps) / static_cast<double>(train_steps), 0.0, 1.0);
  out.d = std::max(out.d1, out.d2);
  return out;
}

bool allr_cycle_policy(std::size_t cycle_index, std::size_t total_cycles) {
  if (cycle_index < 1 || cycle_index > total_cycles) {
    throw InputError("cycle " + std::to_string(cycle_index) + " outside [1, " + std::to_string(total_cycles) + "]");
  }
  return cycle_index == total_cycles;
}

}  // namespace prunekit::schedules
