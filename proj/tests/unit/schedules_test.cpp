// Copyright 2026 The prunekit Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "prunekit/core/error.hpp"
#include "prunekit/core/rng.hpp"
#include "prunekit/schedules/allr.hpp"
#include "prunekit/schedules/schedule.hpp"
#include "support/support.hpp"

using namespace prunekit;
using namespace prunekit::schedules;

namespace {

// The reference stepped schedule, one step per epoch.
BaseSchedule cifar_stepped() { return BaseSchedule(Stepped{0.1, {0.45, 0.9}, {0.1, 0.1}}, 200); }

BaseSchedule random_schedule(Rng& rng) {
  const std::size_t horizon = testing::in_range(rng, 1, 400);
  const double warmup = rng.uniform() < 0.5 ? 0.0 : rng.uniform(0.0, 0.3);
  const double lr = rng.uniform(0.001, 1.0);
  switch (rng.below(4)) {
    case 0: return BaseSchedule(Constant{lr}, horizon, warmup);
    case 1: {
      std::vector<double> ms, fs;
      double m = 0;
      const std::size_t k = testing::in_range(rng, 0, 3);
      for (std::size_t i = 0; i < k; ++i) {
        m += rng.uniform(0.01, (1.0 - m) / 2);
        ms.push_back(m);
        fs.push_back(rng.uniform(0.05, 0.9));
      }
      return BaseSchedule(Stepped{lr, ms, fs}, horizon, warmup);
    }
    case 2: return BaseSchedule(Cosine{lr}, horizon, warmup);
    default: return BaseSchedule(Linear{lr}, horizon, warmup);
  }
}

// Direct evaluation of the discount formula, without clamping.
double d1_oracle(const std::vector<double>& w, const std::vector<double>& wp, double s) {
  long double diff = 0, norm = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    diff += (long double)(w[i] - wp[i]) * (w[i] - wp[i]);
    norm += (long double)w[i] * w[i];
  }
  return static_cast<double>(std::sqrt(diff) / (std::sqrt(norm) * std::sqrt((long double)s)));
}

}  // namespace

TEST_CASE("reference stepped schedule decays at 90 and 180 epochs") {
  const auto s = cifar_stepped();
  CHECK(s.lr_at(0) == 0.1);    // epoch 1
  CHECK(s.lr_at(89) == 0.1);   // epoch 90
  CHECK(s.lr_at(90) == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(s.lr_at(99) == doctest::Approx(0.01).epsilon(1e-15));   // epoch 100
  CHECK(s.lr_at(179) == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(s.lr_at(180) == doctest::Approx(0.001).epsilon(1e-15));
  CHECK(s.lr_at(189) == doctest::Approx(0.001).epsilon(1e-15));  // epoch 190
  CHECK(s.lr_at(199) == doctest::Approx(0.001).epsilon(1e-15));
}

TEST_CASE("linear endpoints") {
  const BaseSchedule s(Linear{0.1}, 50);
  CHECK(s.lr_at(0) == 0.1);
  CHECK(s.lr_at(49) <= 0.1 / 50 + 1e-17);
  CHECK(s.lr_at(49) >= 0.0);
}

TEST_CASE("cosine midpoint is half the initial rate") {
  const BaseSchedule s(Cosine{0.2}, 100);
  CHECK(s.lr_at(50) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(s.lr_at(0) == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("warmup rises along a half cosine to the first post-warmup value") {
  const BaseSchedule s(Linear{0.1}, 100, 0.1);
  REQUIRE(s.warmup_steps() == 10);
  const double target = s.lr_at(10);
  CHECK(target == 0.1);
  for (std::size_t t = 0; t < 10; ++t) {
    const double x = static_cast<double>(t + 1) / 10.0;
    CHECK(s.lr_at(t) == doctest::Approx(target * 0.5 * (1 - std::cos(std::numbers::pi * x))).epsilon(1e-14));
  }
  for (std::size_t t = 1; t < 10; ++t) CHECK(s.lr_at(t) > s.lr_at(t - 1));
}

TEST_CASE("base schedule construction errors") {
  CHECK_THROWS_AS(BaseSchedule(Constant{0.1}, 0), InputError);
  CHECK_THROWS_AS(BaseSchedule(Constant{0.1}, 10, 1.0), InputError);
  CHECK_THROWS_AS(BaseSchedule(Constant{-0.1}, 10), InputError);
  CHECK_THROWS_AS(BaseSchedule(Stepped{0.1, {0.5, 0.4}, {0.1, 0.1}}, 10), InputError);
  CHECK_THROWS_AS(BaseSchedule(Stepped{0.1, {0.5}, {}}, 10), InputError);
  CHECK_THROWS_AS(BaseSchedule(Stepped{0.1, {1.0}, {0.1}}, 10), InputError);
  CHECK_THROWS_AS(cifar_stepped().lr_at(200), InputError);
}

TEST_CASE("FT holds the final origin rate") {
  const auto r = translate(cifar_stepped(), Scheme::FT, 37);
  for (std::size_t t = 0; t < 37; ++t) CHECK(r.lr_at(t) == cifar_stepped().lr_at(199));
  CHECK(r.lr_at(0) == doctest::Approx(0.001).epsilon(1e-15));
}

TEST_CASE("LRW replays the last 60 epochs") {
  const auto origin = cifar_stepped();
  const auto r = translate(origin, Scheme::LRW, 60);
  for (std::size_t t = 0; t < 60; ++t) CHECK(r.lr_at(t) == origin.lr_at(140 + t));
  CHECK(r.lr_at(0) == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(r.lr_at(59) == doctest::Approx(0.001).epsilon(1e-15));
  CHECK_THROWS_AS(translate(origin, Scheme::LRW, 201), InputError);
}

TEST_CASE("SLR maps the middle of retraining to the middle of training") {
  const auto r = translate(cifar_stepped(), Scheme::SLR, 20);
  CHECK(r.lr_at(10) == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(r.lr_at(19) == doctest::Approx(0.001).epsilon(1e-15));
  // 2 warmup steps rise towards the compressed value at step 2
  CHECK(r.lr_at(1) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(r.lr_at(0) == doctest::Approx(0.05).epsilon(1e-14));
}

TEST_CASE("CLR and LLR restart at the discounted initial rate") {
  const auto origin = cifar_stepped();
  const auto clr = translate(origin, Scheme::CLR, 100, 0.5);
  const auto llr = translate(origin, Scheme::LLR, 100, 0.5);
  CHECK(clr.lr_at(10) == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(llr.lr_at(10) == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(llr.peak_lr() == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(clr.lr_at(55) == doctest::Approx(0.025).epsilon(1e-14));
  CHECK(llr.lr_at(55) == doctest::Approx(0.025).epsilon(1e-14));
  CHECK_THROWS_AS(translate(origin, Scheme::LLR, 10, 1.5), InputError);
  CHECK_THROWS_AS(translate(origin, Scheme::LLR, 0), InputError);
  CHECK_THROWS_AS(translate(origin, Scheme::tuned, 10), InputError);
}

TEST_CASE("tuned retraining uses its own schedule") {
  const BaseSchedule own(Cosine{0.3}, 40, 0.1);
  const auto r = tuned_retrain(own);
  CHECK(r.horizon() == 40);
  for (std::size_t t = 0; t < 40; ++t) CHECK(r.lr_at(t) == own.lr_at(t));
}

TEST_CASE("scheme names round-trip") {
  for (Scheme s : {Scheme::FT, Scheme::LRW, Scheme::SLR, Scheme::CLR, Scheme::LLR, Scheme::ALLR, Scheme::tuned}) {
    CHECK(parse_scheme(to_string(s)) == s);
  }
  CHECK_FALSE(parse_scheme("cosine").has_value());
}

TEST_CASE("every scheme is nonnegative and FT is exactly constant") {
  Rng rng(8);
  for (int trial = 0; trial < 300; ++trial) {
    const BaseSchedule origin = random_schedule(rng);
    for (std::size_t t = 0; t < origin.horizon(); ++t) CHECK(origin.lr_at(t) >= 0.0);
    const std::size_t t_rt = testing::in_range(rng, 1, origin.horizon());
    const double d = rng.uniform();
    for (Scheme s : {Scheme::FT, Scheme::LRW, Scheme::SLR, Scheme::CLR, Scheme::LLR, Scheme::ALLR}) {
      const auto r = translate(origin, s, t_rt, d);
      for (std::size_t t = 0; t < t_rt; ++t) {
        const double lr = r.lr_at(t);
        CHECK(lr >= 0.0);
        if (s == Scheme::FT) CHECK(std::abs(lr - origin.lr_at(origin.horizon() - 1)) == 0.0);
        if (s == Scheme::LRW) CHECK(lr == origin.lr_at(origin.horizon() - t_rt + t));
      }
    }
  }
}

TEST_CASE("SLR equals the origin at the same relative position inside step regions") {
  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t T = testing::in_range(rng, 20, 300);
    const std::size_t t_rt = testing::in_range(rng, 10, T);
    const double m1 = rng.uniform(0.2, 0.5), m2 = rng.uniform(0.6, 0.9);
    const BaseSchedule origin(Stepped{rng.uniform(0.01, 1.0), {m1, m2}, {0.1, 0.1}}, T);
    const auto r = translate(origin, Scheme::SLR, t_rt);
    const std::size_t w = warmup_steps_for(kRestartWarmup, t_rt);
    for (std::size_t t = w; t < t_rt; ++t) {
      // relative position of step t and its origin image lie in the same region
      const std::size_t mapped = t * T / t_rt;
      CHECK(r.lr_at(t) == origin.lr_at(mapped));
      const double pos = static_cast<double>(t) / static_cast<double>(t_rt);
      const double pos_next = static_cast<double>(t + 1) / static_cast<double>(t_rt);
      const bool interior = (pos_next <= m1 || pos >= m1) && (pos_next <= m2 || pos >= m2) &&
                            std::abs(pos - m1) > 1.0 / t_rt && std::abs(pos - m2) > 1.0 / t_rt;
      if (interior) {
        const double expected = pos < m1 ? origin.lr_at(0) : pos < m2 ? origin.lr_at(0) * 0.1 : origin.lr_at(0) * 0.01;
        CHECK(r.lr_at(t) == doctest::Approx(expected).epsilon(1e-14));
      }
    }
  }
}

TEST_CASE("LLR is linear after warmup and ends near zero") {
  Rng rng(13);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t t_rt = testing::in_range(rng, 3, 500);
    const double eta1 = rng.uniform(0.001, 2.0);
    const auto r = translate(BaseSchedule(Linear{eta1}, 1000), Scheme::LLR, t_rt);
    const std::size_t w = warmup_steps_for(kRestartWarmup, t_rt);
    for (std::size_t t = w + 2; t < t_rt; ++t) {
      const double second = r.lr_at(t) - 2 * r.lr_at(t - 1) + r.lr_at(t - 2);
      CHECK(std::abs(second) <= 4 * std::numeric_limits<double>::epsilon() * eta1);
    }
    // equality holds when T_rt is a multiple of 10; 1 - x cancels to within a rounding unit of eta1
    const double bound = eta1 / (0.9 * static_cast<double>(t_rt));
    CHECK(r.lr_at(t_rt - 1) <= bound + 2 * std::numeric_limits<double>::epsilon() * eta1);
  }
}

TEST_CASE("discount of a vector whose pruned weights are already zero is the length ratio") {
  const std::vector<double> w{0, 0, 3, 4};
  const auto d = compute_allr_discount(w, w, 0.5, 20, 200);
  CHECK(d.d1 == 0.0);
  CHECK(d.d2 == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(d.d == d.d2);
}

TEST_CASE("pruning the smallest of [1, 2, 2] gives 1/sqrt(3)") {
  const std::vector<double> w{1, 2, 2}, wp{0, 2, 2};
  const auto d = compute_allr_discount(w, wp, 1.0 / 3.0, 1, 100);
  CHECK(d.d1 == doctest::Approx(1.0 / (3.0 * std::sqrt(1.0 / 3.0))).epsilon(1e-12));
  CHECK(d.d1 == doctest::Approx(0.577).epsilon(1e-3));
  CHECK(d.d == d.d1);
}

TEST_CASE("length ratio dominates a small distance") {
  std::vector<double> w(100, 1.0), wp = w;
  wp[0] = 0.0;  // d1 = 0.1 / sqrt(0.5) would exceed 0.1, so prune a tiny weight
  w[0] = 0.01;
  const auto d = compute_allr_discount(w, wp, 0.5, 20, 200);
  CHECK(d.d1 < 0.1);
  CHECK(d.d == doctest::Approx(0.1).epsilon(1e-15));
}

TEST_CASE("discount errors") {
  const std::vector<double> zero(3, 0.0), one(3, 1.0), two(2, 1.0);
  CHECK_THROWS_AS(compute_allr_discount(zero, zero, 0.5, 1, 10), DegenerateModelError);
  CHECK_THROWS_AS(compute_allr_discount(one, two, 0.5, 1, 10), InputError);
  CHECK_THROWS_AS(compute_allr_discount(one, one, 0.0, 1, 10), InputError);
  CHECK_THROWS_AS(compute_allr_discount(one, one, 1.5, 1, 10), InputError);
}

TEST_CASE("d2 is clamped to one and d1 is clamped for arbitrary pruned sets") {
  const std::vector<double> w{10, 0.1, 0.1, 0.1}, wp{0, 0.1, 0.1, 0.1};
  const auto d = compute_allr_discount(w, wp, 0.25, 500, 200);
  CHECK(d.d1_unclamped > 1.0);
  CHECK(d.d1 == 1.0);
  CHECK(d.d2 == 1.0);
}

TEST_CASE("global magnitude pruning never has an unclamped distance above one") {
  Rng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = testing::in_range(rng, 1, 200);
    std::vector<double> w(n);
    const int style = static_cast<int>(rng.below(3));
    for (auto& v : w) v = style == 0 ? rng.normal() : style == 1 ? rng.uniform(-1, 1) : std::pow(rng.normal(), 3);
    const std::size_t k = testing::in_range(rng, 1, n);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return std::abs(w[a]) < std::abs(w[b]); });
    std::vector<double> wp = w;
    for (std::size_t i = 0; i < k; ++i) wp[order[i]] = 0.0;
    const double s = static_cast<double>(k) / static_cast<double>(n);
    if (std::all_of(w.begin(), w.end(), [](double v) { return v == 0.0; })) continue;
    const auto d = compute_allr_discount(w, wp, s, 1, 10);
    CHECK(d.d1_unclamped <= 1.0 + 1e-12);
    CHECK(d.d1_unclamped == doctest::Approx(d1_oracle(w, wp, s)).epsilon(1e-12));
    CHECK(d.d == std::max(d.d1, d.d2));
  }
}

TEST_CASE("only the last cycle is discounted") {
  CHECK_FALSE(allr_cycle_policy(1, 3));
  CHECK(allr_cycle_policy(3, 3));
  CHECK(allr_cycle_policy(1, 1));
  CHECK_THROWS_AS(allr_cycle_policy(0, 3), InputError);
  CHECK_THROWS_AS(allr_cycle_policy(4, 3), InputError);
}
