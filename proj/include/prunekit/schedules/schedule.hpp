// Copyright 2026 The prunekit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace prunekit::schedules {

struct Constant {
  double value = 0.1;
  friend bool operator==(const Constant&, const Constant&) = default;
};

/// Piecewise-constant decay. Milestones are fractions of the post-warmup
/// window; passing milestone i multiplies the rate by factors[i].
struct Stepped {
  double initial = 0.1;
  std::vector<double> milestones;
  std::vector<double> factors;
  friend bool operator==(const Stepped&, const Stepped&) = default;
};

struct Cosine {
  double initial = 0.1;
  friend bool operator==(const Cosine&, const Cosine&) = default;
};

struct Linear {
  double initial = 0.1;
  friend bool operator==(const Linear&, const Linear&) = default;
};

using ScheduleKind = std::variant<Constant, Stepped, Cosine, Linear>;

/// A total map from optimizer step t in [0, horizon) to a learning rate.
///
/// The first floor(warmup_frac * horizon) steps rise along a half cosine
/// 0.5 * (1 - cos(pi * x)), x = (t + 1) / warmup_steps, towards the value
/// the schedule has at the first post-warmup step. After warmup the kind is
/// evaluated at x' = (t - warmup_steps) / (horizon - warmup_steps).
class BaseSchedule {
 public:
  /// Throws InputError on a zero horizon, warmup outside [0, 1), negative
  /// rates, or non-increasing milestones outside (0, 1).
  BaseSchedule(ScheduleKind kind, std::size_t horizon, double warmup_frac = 0.0);

  double lr_at(std::size_t t) const;

  const ScheduleKind& kind() const { return kind_; }
  std::size_t horizon() const { return horizon_; }
  double warmup_frac() const { return warmup_frac_; }
  std::size_t warmup_steps() const { return warmup_steps_; }
  /// The schedule's nominal starting value (eta_1).
  double initial_lr() const;

 private:
  double post_warmup(std::size_t t) const;

  ScheduleKind kind_;
  std::size_t horizon_;
  double warmup_frac_;
  std::size_t warmup_steps_;
  std::vector<std::size_t> milestone_steps_;
};

/// Number of whole warmup steps for a fraction of a horizon.
std::size_t warmup_steps_for(double frac, std::size_t horizon);

/// How a retraining phase derives its learning rates from the original
/// training schedule. `tuned` is a free-standing schedule compressed into
/// the retraining budget.
enum class Scheme { FT, LRW, SLR, CLR, LLR, ALLR, tuned };

std::string_view to_string(Scheme scheme);
std::optional<Scheme> parse_scheme(std::string_view name);

/// Warmup used by SLR, CLR, LLR and ALLR.
inline constexpr double kRestartWarmup = 0.1;

class RetrainSchedule {
 public:
  double lr_at(std::size_t t) const;

  Scheme scheme() const { return scheme_; }
  std::size_t horizon() const { return horizon_; }
  double discount() const { return discount_; }
  /// The largest value the schedule is built to reach: eta_T for FT,
  /// d * eta_1 for the restarting schemes.
  double peak_lr() const;
  const BaseSchedule& origin() const { return origin_; }

  friend RetrainSchedule translate(const BaseSchedule& origin, Scheme scheme, std::size_t retrain_steps,
                                   double discount);
  friend RetrainSchedule tuned_retrain(const BaseSchedule& schedule);

 private:
  RetrainSchedule(Scheme scheme, BaseSchedule origin, std::size_t horizon, double discount,
                  std::optional<BaseSchedule> inner);

  Scheme scheme_;
  BaseSchedule origin_;
  std::size_t horizon_;
  double discount_;
  std::optional<BaseSchedule> inner_;  // CLR/LLR/ALLR/tuned
  std::size_t slr_warmup_ = 0;
  double slr_target_ = 0;
};

/// Builds the retraining schedule for one prune-retrain cycle.
///
///   FT   lr(t) = origin(T - 1)
///   LRW  lr(t) = origin(T - T_rt + t)            requires T_rt <= T
///   SLR  lr(t) = origin(floor(t * T / T_rt)), 10% cosine warmup overlaid
///   CLR  Cosine(d * eta_1) over T_rt with 10% warmup
///   LLR  Linear(d * eta_1) over T_rt with 10% warmup
///   ALLR same as LLR; the caller supplies the discount
///
/// The discount only affects CLR, LLR and ALLR.
RetrainSchedule translate(const BaseSchedule& origin, Scheme scheme, std::size_t retrain_steps,
                          double discount = 1.0);

/// Wraps an independently chosen schedule as a retraining schedule.
RetrainSchedule tuned_retrain(const BaseSchedule& schedule);

}  // namespace prunekit::schedules
