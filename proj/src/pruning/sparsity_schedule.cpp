// Copyright 2026 The prunekit Authors
// SPDX-License-Identifier: Apache-2.0

#include "prunekit/pruning/sparsity_schedule.hpp"

#include <cmath>
#include <string>

#include "prunekit/core/error.hpp"

namespace prunekit::pruning {

namespace {

void check_target(double s) {
  if (!(s > 0.0 && s < 1.0)) throw InputError("sparsity target must be in (0, 1), got " + std::to_string(s));
}

}  // namespace

double per_cycle_fraction(double sparsity, std::size_t cycles) {
  check_target(sparsity);
  if (cycles == 0) throw InputError("need at least one pruning cycle");
  return 1.0 - std::pow(1.0 - sparsity, 1.0 / static_cast<double>(cycles));
}

double cumulative_sparsity(double fraction, std::size_t cycles) {
  double remaining = 1.0;
  for (std::size_t j = 0; j < cycles; ++j) remaining *= 1.0 - fraction;
  return 1.0 - remaining;
}

std::size_t cycles_to_reach(double sparsity, double fraction) {
  check_target(sparsity);
  if (!(fraction > 0.0 && fraction < 1.0)) throw InputError("per-cycle fraction must be in (0, 1)");
  std::size_t j = 1;
  double remaining = 1.0 - fraction;
  while (1.0 - remaining < sparsity) {
    remaining *= 1.0 - fraction;
    ++j;
  }
  return j;
}

void validate(const SparsitySchedule& schedule) {
  if (const auto* o = std::get_if<OneShot>(&schedule)) {
    check_target(o->target);
  } else if (const auto* e = std::get_if<ExponentialCycles>(&schedule)) {
    check_target(e->target);
    if (e->cycles == 0) throw InputError("need at least one pruning cycle");
  } else {
    const auto& c = std::get<CubicGMP>(schedule);
    if (!(c.initial >= 0.0 && c.initial <= c.final && c.final < 1.0)) {
      throw InputError("cubic schedule needs 0 <= initial <= final < 1");
    }
    if (c.pruning_steps == 0 || c.interval == 0) throw InputError("cubic schedule needs n >= 1 and interval >= 1");
  }
}

double cubic_sparsity(const CubicGMP& schedule, std::size_t t) {
  if (t <= schedule.start_step) return schedule.initial;
  const std::size_t span = schedule.pruning_steps * schedule.interval;
  if (t >= schedule.start_step + span) return schedule.final;
  const double progress = static_cast<double>(t - schedule.start_step) / static_cast<double>(span);
  const double rest = 1.0 - progress;
  return schedule.final + (schedule.initial - schedule.final) * rest * rest * rest;
}

}  // namespace prunekit::pruning
