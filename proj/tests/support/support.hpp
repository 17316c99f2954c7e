// Copyright 2026 The prunekit Authors
// SPDX-License-Identifier: Apache-2.0

// Generators and brute-force oracles shared by the unit and acceptance tests.
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "prunekit/core/rng.hpp"
#include "prunekit/io/dataset.hpp"
#include "prunekit/nn/network.hpp"
#include "prunekit/pruning/mask.hpp"

namespace prunekit::testing {

inline nn::Tensor random_tensor(Rng& rng, nn::Shape shape, double lo = -1.0, double hi = 1.0) {
  nn::Tensor t(std::move(shape));
  for (auto& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

inline std::vector<int> random_labels(Rng& rng, std::size_t n, std::size_t classes) {
  std::vector<int> out(n);
  for (auto& l : out) l = static_cast<int>(rng.below(classes));
  return out;
}

inline std::size_t in_range(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
}

/// Random composable network with every dimension at most 8. With
/// `allow_conv` roughly half the networks start with convolutions.
inline nn::Network random_network(Rng& rng, bool allow_conv = true) {
  std::vector<nn::LayerSpec> specs;
  nn::Shape input;
  std::size_t width;
  if (allow_conv && rng.uniform() < 0.5) {
    const std::size_t c = in_range(rng, 1, 3);
    const std::size_t h = in_range(rng, 3, 6);
    const std::size_t w = in_range(rng, 3, 6);
    input = {c, h, w};
    nn::Shape shape = input;
    const std::size_t n_conv = in_range(rng, 1, 2);
    for (std::size_t i = 0; i < n_conv; ++i) {
      nn::Conv2D conv;
      conv.c_in = shape[0];
      conv.c_out = in_range(rng, 1, 4);
      conv.padding = in_range(rng, 0, 1);
      conv.k_h = in_range(rng, 1, std::min<std::size_t>(3, shape[1] + 2 * conv.padding));
      conv.k_w = in_range(rng, 1, std::min<std::size_t>(3, shape[2] + 2 * conv.padding));
      conv.stride = in_range(rng, 1, 2);
      conv.has_bias = rng.uniform() < 0.7;
      specs.push_back(conv);
      shape = nn::Layer(conv).output_shape(shape);
      if (rng.uniform() < 0.7) specs.push_back(nn::ReLU{});
    }
    specs.push_back(nn::Flatten{});
    width = nn::numel(shape);
  } else {
    width = in_range(rng, 1, 8);
    input = {width};
  }
  const std::size_t n_hidden = in_range(rng, 0, 2);
  for (std::size_t i = 0; i < n_hidden; ++i) {
    const std::size_t out = in_range(rng, 2, 8);
    specs.push_back(nn::Dense{width, out, rng.uniform() < 0.7});
    if (rng.uniform() < 0.7) specs.push_back(nn::ReLU{});
    width = out;
  }
  specs.push_back(nn::Dense{width, in_range(rng, 2, 4), true});
  nn::Network net(input, specs);
  net.initialize(rng);
  // nonzero biases so ReLU inputs are generic
  for (nn::Parameter* p : net.parameters()) {
    if (!p->prunable) {
      for (auto& v : p->value.values()) v = rng.uniform(-0.5, 0.5);
    }
  }
  return net;
}

/// Mask keeping each prunable weight with probability `keep`.
inline pruning::PruneMask random_mask(Rng& rng, const nn::Network& net, double keep) {
  std::vector<pruning::LayerMask> layers;
  const pruning::PruneMask current = pruning::current_mask(net);
  for (const auto& lm : current.layers()) {
    pruning::LayerMask m = lm;
    for (auto& k : m.keep) k = rng.uniform() < keep ? 1 : 0;
    layers.push_back(std::move(m));
  }
  return pruning::PruneMask(std::move(layers));
}

/// FLOPs of one inference pass, found by walking every loop of the layer
/// computations and counting each multiply-add with a kept weight as 2.
/// Bias adds and activation elements count 1 each. `dense` ignores the mask.
inline std::uint64_t enumerate_flops(const nn::Network& net, const pruning::PruneMask& mask, bool dense) {
  auto kept_at = [&](std::size_t layer, std::size_t flat) -> bool {
    if (dense) return true;
    for (const auto& lm : mask.layers()) {
      if (lm.layer_index == layer) return lm.keep[flat] != 0;
    }
    return true;
  };
  std::uint64_t flops = 0;
  nn::Shape shape = net.input_shape();
  for (std::size_t li = 0; li < net.layers().size(); ++li) {
    const auto& layer = net.layers()[li];
    const nn::Shape out = layer.output_shape(shape);
    if (const auto* d = std::get_if<nn::Dense>(&layer.spec())) {
      for (std::size_t o = 0; o < d->n_out; ++o) {
        for (std::size_t i = 0; i < d->n_in; ++i) {
          if (kept_at(li, o * d->n_in + i)) flops += 2;
        }
        if (d->has_bias) flops += 1;
      }
    } else if (const auto* c = std::get_if<nn::Conv2D>(&layer.spec())) {
      for (std::size_t co = 0; co < c->c_out; ++co) {
        for (std::size_t y = 0; y < out[1]; ++y) {
          for (std::size_t x = 0; x < out[2]; ++x) {
            for (std::size_t ci = 0; ci < c->c_in; ++ci) {
              for (std::size_t ky = 0; ky < c->k_h; ++ky) {
                for (std::size_t kx = 0; kx < c->k_w; ++kx) {
                  const std::size_t flat = ((co * c->c_in + ci) * c->k_h + ky) * c->k_w + kx;
                  if (kept_at(li, flat)) flops += 2;
                }
              }
            }
            if (c->has_bias) flops += 1;
          }
        }
      }
    } else {
      flops += nn::numel(out);
    }
    shape = out;
  }
  return flops;
}

/// Two well separated Gaussian blobs in `dim` dimensions.
inline io::Split blob_split(std::size_t n, std::uint64_t seed, std::size_t dim = 2, double noise = 0.3) {
  io::SyntheticSource src;
  src.kind = io::SyntheticKind::blobs;
  src.n_samples = n;
  src.n_classes = 2;
  src.n_features = dim;
  src.noise = noise;
  src.seed = seed;
  return io::split_dataset(io::make_blobs(src), 0.75, seed);
}

}  // namespace prunekit::testing
