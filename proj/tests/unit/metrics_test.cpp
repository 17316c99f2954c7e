// Copyright 2026 The prunekit Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "prunekit/core/error.hpp"
#include "prunekit/core/rng.hpp"
#include "prunekit/metrics/metrics.hpp"
#include "prunekit/pruning/criteria.hpp"
#include "prunekit/pruning/mask.hpp"
#include "support/support.hpp"

using namespace prunekit;
using namespace prunekit::metrics;

TEST_CASE("stability examples") {
  CHECK(stability(0.935, 0.935) == 1.0);
  CHECK(stability(0.90, 0.45) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(stability(0.0, 0.5), UndefinedMetricError);
  CHECK_THROWS_AS(stability(-0.1, 0.5), UndefinedMetricError);
}

TEST_CASE("stability above one is kept and annotated") {
  const auto r = make_stability(0.5, 0.6);
  CHECK(r.delta == doctest::Approx(1.2).epsilon(1e-15));
  CHECK_FALSE(r.note.empty());
  CHECK(make_stability(0.5, 0.4).note.empty());
}

TEST_CASE("stability of an unchanged accuracy is one") {
  Rng rng(51);
  for (int i = 0; i < 1000; ++i) {
    const double t = rng.uniform(1e-6, 1.0);
    CHECK(stability(t, t) == 1.0);
  }
}

TEST_CASE("re-applying the present soft mask leaves accuracy unchanged") {
  Rng rng(52);
  nn::Network net({3}, {nn::Dense{3, 8, true}, nn::ReLU{}, nn::Dense{8, 2, true}});
  net.initialize(rng);
  pruning::apply_mask(net, testing::random_mask(rng, net, 0.5), nn::MaskMode::soft);
  const nn::Tensor x = testing::random_tensor(rng, {64, 3});
  const auto before = net.predict(x);
  pruning::apply_mask(net, pruning::current_mask(net), nn::MaskMode::soft);
  CHECK(net.predict(x) == before);
  CHECK(stability(0.8, 0.8) == 1.0);
}

TEST_CASE("dense 100 to 10 at 90 percent gives a tenfold speedup") {
  nn::Network net({100}, {nn::Dense{100, 10, false}});
  pruning::LayerMask lm = pruning::current_mask(net).layers()[0];
  for (std::size_t o = 0; o < 10; ++o) {
    for (std::size_t i = 10; i < 100; ++i) lm.keep[o * 100 + i] = 0;
  }
  const pruning::PruneMask mask({lm});
  const auto r = count_flops(net, mask, {100});
  CHECK(r.dense == 2000);
  CHECK(r.sparse == 200);
  CHECK(r.speedup == 10.0);
  CHECK(r.dense == testing::enumerate_flops(net, mask, true));
  CHECK(r.sparse == testing::enumerate_flops(net, mask, false));
}

TEST_CASE("2x2 conv over a 3x3 input costs 32 per sample") {
  nn::Network net({1, 3, 3}, {nn::Conv2D{1, 1, 2, 2, 1, 0, false}, nn::Flatten{}});
  const auto r = count_flops(net, pruning::current_mask(net), {1, 3, 3});
  CHECK(r.dense_weights_only == 32);
  CHECK(r.dense == 32 + 4);  // Flatten passes 4 elements
  CHECK(r.speedup == 1.0);
}

TEST_CASE("flops match the loop enumeration oracle") {
  Rng rng(53);
  for (int trial = 0; trial < 100; ++trial) {
    const nn::Network net = testing::random_network(rng);
    const auto mask = testing::random_mask(rng, net, rng.uniform(0.05, 1.0));
    const auto r = count_flops(net, mask, net.input_shape());
    CHECK(r.dense == testing::enumerate_flops(net, mask, true));
    CHECK(r.sparse == testing::enumerate_flops(net, mask, false));
    CHECK(r.sparse <= r.dense);
    CHECK(r.sparse_weights_only <= r.dense_weights_only);
    CHECK(r.dense - r.dense_weights_only == r.sparse - r.sparse_weights_only);
    if (r.sparse > 0) CHECK(r.speedup >= 1.0);
    std::uint64_t dense_sum = 0, sparse_sum = 0;
    for (const auto& l : r.per_layer) {
      dense_sum += l.dense;
      sparse_sum += l.sparse;
    }
    CHECK(dense_sum == r.dense);
    CHECK(sparse_sum == r.sparse);
  }
}

TEST_CASE("speedup depends only on mask positions") {
  Rng rng(54);
  for (int trial = 0; trial < 50; ++trial) {
    nn::Network net = testing::random_network(rng);
    const auto mask = testing::random_mask(rng, net, 0.4);
    const auto a = count_flops(net, mask, net.input_shape());
    for (nn::Parameter* p : net.parameters()) {
      for (auto& v : p->value.values()) v *= 7.5;
    }
    const auto b = count_flops(net, mask, net.input_shape());
    CHECK(a.dense == b.dense);
    CHECK(a.sparse == b.sparse);
    CHECK(a.speedup == b.speedup);
  }
}

TEST_CASE("speedup grows as masks shrink and is one for the full mask") {
  Rng rng(55);
  for (int trial = 0; trial < 50; ++trial) {
    const nn::Network net = testing::random_network(rng);
    auto mask = pruning::current_mask(net);
    double prev = count_flops(net, mask, net.input_shape()).speedup;
    CHECK(prev == 1.0);
    for (int round = 0; round < 5; ++round) {
      std::vector<pruning::LayerMask> layers = mask.layers();
      for (auto& l : layers) {
        for (auto& k : l.keep) k = k && rng.uniform() < 0.7;
      }
      mask = pruning::PruneMask(std::move(layers));
      const double s = count_flops(net, mask, net.input_shape()).speedup;
      CHECK(s >= prev);
      prev = s;
    }
  }
}

TEST_CASE("a fully pruned network reports infinite speedup and collapse") {
  nn::Network net({4}, {nn::Dense{4, 2, false}});
  pruning::LayerMask lm = pruning::current_mask(net).layers()[0];
  std::fill(lm.keep.begin(), lm.keep.end(), 0);
  const auto r = count_flops(net, pruning::PruneMask({lm}), {4});
  CHECK(r.sparse == 0);
  CHECK(std::isinf(r.speedup));
  CHECK(r.collapsed);
}

TEST_CASE("a collapsed layer with surviving bias adds is flagged") {
  nn::Network net({4}, {nn::Dense{4, 3, true}, nn::ReLU{}, nn::Dense{3, 2, true}});
  auto layers = pruning::current_mask(net).layers();
  std::fill(layers[0].keep.begin(), layers[0].keep.end(), 0);
  const auto r = count_flops(net, pruning::PruneMask(layers), {4});
  CHECK(r.collapsed);
  CHECK(std::isfinite(r.speedup));
}

TEST_CASE("sparsity report examples") {
  pruning::LayerMask lm;
  lm.shape = {10, 100};
  lm.keep.assign(1000, 1);
  CHECK(sparsity_report(pruning::PruneMask({lm})).overall == 0.0);
  for (std::size_t i = 0; i < 150; ++i) lm.keep[i] = 0;
  const auto r = sparsity_report(pruning::PruneMask({lm}));
  CHECK(r.overall == doctest::Approx(0.15).epsilon(1e-15));
  CHECK(r.kept == 850);
  CHECK(r.per_layer[0].sparsity == doctest::Approx(0.15).epsilon(1e-15));
  std::fill(lm.keep.begin(), lm.keep.end(), 0);
  CHECK(sparsity_report(pruning::PruneMask({lm})).overall == 1.0);
}

TEST_CASE("sparsity report agrees with the mask caches") {
  Rng rng(56);
  for (int trial = 0; trial < 50; ++trial) {
    const nn::Network net = testing::random_network(rng);
    const auto mask = testing::random_mask(rng, net, rng.uniform());
    const auto r = sparsity_report(mask);
    CHECK(r.kept == mask.kept());
    CHECK(r.total == mask.total());
    CHECK(r.overall == mask.sparsity());
    CHECK(r.per_layer.size() == mask.layers().size());
  }
}
