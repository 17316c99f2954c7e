// Copyright 2026 The prunekit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>

namespace prunekit::schedules {

/// Components of the adaptive learning-rate discount.
struct AllrDiscount {
  /// ||W - W^p|| / (||W|| * sqrt(s)) before clamping.
  double d1_unclamped = 0;
  double d1 = 0;  // clamped to [0, 1]
  double d2 = 0;  // retrain_steps / train_steps, clamped to [0, 1]
  double d = 0;   // max(d1, d2)
  friend bool operator==(const AllrDiscount&, const AllrDiscount&) = default;
};

/// `before` and `after` are the concatenated prunable weights just before
/// and after pruning; `pruned_fraction` is the share of the previously
/// remaining weights removed by this pruning step.
///
/// Throws DegenerateModelError when ||before|| is zero and InputError when
/// the vectors differ in length or pruned_fraction is outside (0, 1].
AllrDiscount compute_allr_discount(std::span<const double> before, std::span<const double> after,
                                   double pruned_fraction, std::size_t retrain_steps, std::size_t train_steps);

/// Whether the discount is used in this cycle: only the final cycle of a run
/// is discounted, and a one-shot run is its own final cycle.
bool allr_cycle_policy(std::size_t cycle_index, std::size_t total_cycles);

}  // namespace prunekit::schedules
