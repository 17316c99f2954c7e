// Copyright 2026 The prunekit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <variant>

namespace prunekit::pruning {

/// Fraction p of the remaining weights to prune per cycle so that J cycles
/// reach overall sparsity s: p = 1 - (1 - s)^(1/J).
double per_cycle_fraction(double sparsity, std::size_t cycles);

/// Overall sparsity after j cycles of pruning fraction p of the remainder.
double cumulative_sparsity(double fraction, std::size_t cycles);

/// Smallest J with 1 - (1 - p)^J >= s.
std::size_t cycles_to_reach(double sparsity, double fraction);

struct OneShot {
  double target = 0.9;
};

struct ExponentialCycles {
  double target = 0.9;
  std::size_t cycles = 1;
};

/// Gradual schedule: s_t = s_f + (s_i - s_f) * (1 - (t - t0) / (n * dt))^3
/// on [t0, t0 + n * dt], constant outside.
struct CubicGMP {
  double initial = 0.0;
  double final = 0.9;
  std::size_t start_step = 0;
  std::size_t pruning_steps = 20;
  std::size_t interval = 1;
};

using SparsitySchedule = std::variant<OneShot, ExponentialCycles, CubicGMP>;

/// Throws InputError when a field is outside its domain.
void validate(const SparsitySchedule& schedule);

double cubic_sparsity(const CubicGMP& schedule, std::size_t t);

}  // namespace prunekit::pruning
