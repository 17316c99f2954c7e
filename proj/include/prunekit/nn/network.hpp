// Copyright 2026 The prunekit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "prunekit/core/rng.hpp"
#include "prunekit/nn/tensor.hpp"

namespace prunekit::nn {

/// How a stored pruning mask acts on its parameter.
///
/// hard: masked entries are zero in storage and receive no gradient.
/// soft: masked entries are treated as zero in forward/backward, storage and
///       gradients stay dense so a later mask may revive them.
enum class MaskMode { hard, soft };

struct Dense {
  std::size_t n_in = 0;
  std::size_t n_out = 0;
  bool has_bias = true;
  friend bool operator==(const Dense&, const Dense&) = default;
};

struct Conv2D {
  std::size_t c_in = 0;
  std::size_t c_out = 0;
  std::size_t k_h = 1;
  std::size_t k_w = 1;
  std::size_t stride = 1;
  std::size_t padding = 0;
  bool has_bias = true;
  friend bool operator==(const Conv2D&, const Conv2D&) = default;
};

struct ReLU {
  friend bool operator==(const ReLU&, const ReLU&) = default;
};

struct Flatten {
  friend bool operator==(const Flatten&, const Flatten&) = default;
};

using LayerSpec = std::variant<Dense, Conv2D, ReLU, Flatten>;

std::string describe(const LayerSpec& spec);

/// A trainable tensor with its gradient, momentum buffer and optional mask.
/// Biases are never prunable.
struct Parameter {
  Tensor value;
  Tensor grad;
  Tensor momentum;
  /// 1 = kept, 0 = pruned. Only ever set on prunable parameters.
  std::optional<std::vector<std::uint8_t>> mask;
  bool prunable = false;

  explicit Parameter(Shape shape = {}, bool is_prunable = false);

  std::size_t size() const { return value.size(); }
  bool kept(std::size_t i) const { return !mask || (*mask)[i] != 0; }
  /// Value with masked entries replaced by zero.
  Tensor effective_value() const;
};

/// One layer: its spec, owned parameters (weight first, bias second), and
/// the input cached by the last training forward pass.
class Layer {
 public:
  explicit Layer(LayerSpec spec);

  const LayerSpec& spec() const { return spec_; }
  std::vector<Parameter>& params() { return params_; }
  const std::vector<Parameter>& params() const { return params_; }
  Parameter* weight();
  const Parameter* weight() const;
  Parameter* bias();
  const Parameter* bias() const;

  /// Per-sample output shape. Throws ConfigError if `in` is not a valid input.
  Shape output_shape(const Shape& in) const;

  /// Batched forward. Does not touch the activation cache.
  Tensor apply(const Tensor& x, MaskMode mode) const;
  Tensor forward(const Tensor& x, MaskMode mode);
  /// Writes parameter gradients, returns the gradient w.r.t. the input.
  Tensor backward(const Tensor& dy, MaskMode mode);

  bool has_cache() const { return cached_; }
  void clear_cache();

 private:
  LayerSpec spec_;
  std::vector<Parameter> params_;
  Tensor input_;
  bool cached_ = false;
};

/// Feed-forward stack of layers operating on batches shaped
/// (batch, input_shape...).
class Network {
 public:
  Network() = default;
  /// Validates that consecutive layers compose; parameters start at zero.
  Network(Shape input_shape, std::vector<LayerSpec> layers);

  /// Glorot-uniform weights in +-sqrt(6/(fan_in+fan_out)), zero biases.
  /// `layer_scales`, when non-empty, multiplies the bound per layer index.
  void initialize(Rng& rng, std::span<const double> layer_scales = {});

  const Shape& input_shape() const { return input_shape_; }
  Shape output_shape() const;
  std::size_t n_classes() const;
  /// Per-sample input shape of layer i.
  const Shape& layer_input_shape(std::size_t i) const { return shapes_.at(i); }

  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }

  /// Training forward: caches activations for backward.
  Tensor forward(const Tensor& batch);
  /// Inference forward: no caching, safe to call concurrently on a frozen net.
  Tensor predict(const Tensor& batch) const;
  /// Fills every Parameter::grad. Throws StateError without a prior forward.
  void backward(const Tensor& dlogits);

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  void zero_grad();

  MaskMode mask_mode() const { return mask_mode_; }
  void set_mask_mode(MaskMode mode) { mask_mode_ = mode; }

 private:
  void check_batch(const Tensor& batch) const;

  Shape input_shape_;
  std::vector<Layer> layers_;
  std::vector<Shape> shapes_;  // per-sample input shape of each layer
  MaskMode mask_mode_ = MaskMode::hard;
};

}  // namespace prunekit::nn
