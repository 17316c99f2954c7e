// Copyright 2026 The prunekit Authors
// SPDX-License-Identifier: Apache-2.0

#include "prunekit/schedules/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "prunekit/core/error.hpp"

namespace prunekit::schedules {

namespace {

double half_cosine_rise(std::size_t t, std::size_t warmup) {
  const double x = static_cast<double>(t + 1) / static_cast<double>(warmup);
  return 0.5 * (1.0 - std::cos(std::numbers::pi * x));
}

void check_rate(double v, const char* what) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw InputError(std::string(what) + " must be finite and nonnegative, got " + std::to_string(v));
  }
}

}  // namespace

std::size_t warmup_steps_for(double frac, std::size_t horizon) {
  if (frac <= 0.0 || horizon == 0) return 0;
  // Products like 0.1 * 30 land a hair above the integer; the slack keeps
  // exact multiples exact.
  const auto w = static_cast<std::size_t>(std::floor(frac * static_cast<double>(horizon) + 1e-9));
  return std::min(w, horizon - 1);
}

BaseSchedule::BaseSchedule(ScheduleKind kind, std::size_t horizon, double warmup_frac)
    : kind_(std::move(kind)), horizon_(horizon), warmup_frac_(warmup_frac) {
  if (horizon_ == 0) throw InputError("schedule horizon must be positive");
  if (!(warmup_frac_ >= 0.0 && warmup_frac_ < 1.0)) {
    throw InputError("warmup fraction must be in [0, 1), got " + std::to_string(warmup_frac_));
  }
  warmup_steps_ = warmup_steps_for(warmup_frac_, horizon_);
  check_rate(initial_lr(), "schedule initial learning rate");
  if (const auto* s = std::get_if<Stepped>(&kind_)) {
    if (s->milestones.size() != s->factors.size()) {
      throw InputError("stepped schedule needs one decay factor per milestone");
    }
    double prev = 0.0;
    for (std::size_t i = 0; i < s->milestones.size(); ++i) {
      const double m = s->milestones[i];
      if (!(m > prev && m < 1.0)) throw InputError("milestones must be strictly increasing in (0, 1)");
      check_rate(s->factors[i], "decay factor");
      prev = m;
      const double window = static_cast<double>(horizon_ - warmup_steps_);
      milestone_steps_.push_back(warmup_steps_ + static_cast<std::size_t>(std::ceil(m * window - 1e-9)));
    }
  }
}

double BaseSchedule::initial_lr() const {
  return std::visit([](const auto& k) -> double {
    using K = std::decay_t<decltype(k)>;
    if constexpr (std::is_same_v<K, Constant>) {
      return k.value;
    } else {
      return k.initial;
    }
  }, kind_);
}

double BaseSchedule::post_warmup(std::size_t t) const {
  const double x = static_cast<double>(t - warmup_steps_) / static_cast<double>(horizon_ - warmup_steps_);
  if (const auto* c = std::get_if<Constant>(&kind_)) return c->value;
  if (const auto* s = std::get_if<Stepped>(&kind_)) {
    double lr = s->initial;
    for (std::size_t i = 0; i < milestone_steps_.size(); ++i) {
      if (t >= milestone_steps_[i]) lr *= s->factors[i];
    }
    return lr;
  }
  if (const auto* c = std::get_if<Cosine>(&kind_)) return c->initial * 0.5 * (1.0 + std::cos(std::numbers::pi * x));
  return std::get<Linear>(kind_).initial * (1.0 - x);
}

double BaseSchedule::lr_at(std::size_t t) const {
  if (t >= horizon_) {
    throw InputError("step " + std::to_string(t) + " outside schedule horizon " + std::to_string(horizon_));
  }
  if (t < warmup_steps_) return post_warmup(warmup_steps_) * half_cosine_rise(t, warmup_steps_);
  return post_warmup(t);
}

std::string_view to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::FT: return "FT";
    case Scheme::LRW: return "LRW";
    case Scheme::SLR: return "SLR";
    case Scheme::CLR: return "CLR";
    case Scheme::LLR: return "LLR";
    case Scheme::ALLR: return "ALLR";
    case Scheme::tuned: return "tuned";
  }
  return "?";
}

std::optional<Scheme> parse_scheme(std::string_view name) {
  for (Scheme s : {Scheme::FT, Scheme::LRW, Scheme::SLR, Scheme::CLR, Scheme::LLR, Scheme::ALLR, Scheme::tuned}) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

RetrainSchedule::RetrainSchedule(Scheme scheme, BaseSchedule origin, std::size_t horizon, double discount,
                                 std::optional<BaseSchedule> inner)
    : scheme_(scheme), origin_(std::move(origin)), horizon_(horizon), discount_(discount), inner_(std::move(inner)) {}

RetrainSchedule translate(const BaseSchedule& origin, Scheme scheme, std::size_t retrain_steps, double discount) {
  if (retrain_steps == 0) throw InputError("retraining length must be at least one step");
  if (!(discount >= 0.0 && discount <= 1.0)) {
    throw InputError("discount must be in [0, 1], got " + std::to_string(discount));
  }
  const double eta1 = origin.initial_lr();
  switch (scheme) {
    case Scheme::FT:
    case Scheme::LRW:
      if (scheme == Scheme::LRW && retrain_steps > origin.horizon()) {
        throw InputError("LRW needs retrain length " + std::to_string(retrain_steps) + " <= original horizon " +
                         std::to_string(origin.horizon()));
      }
      return RetrainSchedule(scheme, origin, retrain_steps, discount, std::nullopt);
    case Scheme::SLR: {
      RetrainSchedule r(scheme, origin, retrain_steps, discount, std::nullopt);
      r.slr_warmup_ = warmup_steps_for(kRestartWarmup, retrain_steps);
      if (r.slr_warmup_ > 0) {
        // compressed value at the first post-warmup step
        const std::size_t mapped = r.slr_warmup_ * origin.horizon() / retrain_steps;
        r.slr_target_ = origin.lr_at(mapped);
      }
      return r;
    }
    case Scheme::CLR:
      return RetrainSchedule(scheme, origin, retrain_steps, discount,
                             BaseSchedule(Cosine{discount * eta1}, retrain_steps, kRestartWarmup));
    case Scheme::LLR:
    case Scheme::ALLR:
      return RetrainSchedule(scheme, origin, retrain_steps, discount,
                             BaseSchedule(Linear{discount * eta1}, retrain_steps, kRestartWarmup));
    case Scheme::tuned:
      throw InputError("tuned retraining schedules are built with tuned_retrain()");
  }
  throw InputError("unknown retraining scheme");
}

RetrainSchedule tuned_retrain(const BaseSchedule& schedule) {
  return RetrainSchedule(Scheme::tuned, schedule, schedule.horizon(), 1.0, schedule);
}

double RetrainSchedule::lr_at(std::size_t t) const {
  if (t >= horizon_) {
    throw InputError("step " + std::to_string(t) + " outside retraining horizon " + std::to_string(horizon_));
  }
  switch (scheme_) {
    case Scheme::FT:
      return origin_.lr_at(origin_.horizon() - 1);
    case Scheme::LRW:
      return origin_.lr_at(origin_.horizon() - horizon_ + t);
    case Scheme::SLR:
      if (t < slr_warmup_) return slr_target_ * half_cosine_rise(t, slr_warmup_);
      return origin_.lr_at(t * origin_.horizon() / horizon_);
    default:
      return inner_->lr_at(t);
  }
}

double RetrainSchedule::peak_lr() const {
  switch (scheme_) {
    case Scheme::FT:
      return origin_.lr_at(origin_.horizon() - 1);
    case Scheme::LRW:
    case Scheme::SLR: {
      double peak = 0;
      for (std::size_t t = 0; t < horizon_; ++t) peak = std::max(peak, lr_at(t));
      return peak;
    }
    case Scheme::tuned:
      return inner_->initial_lr();
    default:
      return discount_ * origin_.initial_lr();
  }
}

}  // namespace prunekit::schedules
