// Copyright 2026 The prunekit Authors
// SPDX-License-Identifier: Apache-2.0

#include "prunekit/nn/network.hpp"

#include <cmath>
#include <type_traits>

#include "prunekit/core/error.hpp"

namespace prunekit::nn {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::size_t conv_extent(std::size_t in, std::size_t k, std::size_t stride, std::size_t pad) {
  return (in + 2 * pad - k) / stride + 1;
}

// Weight tensor the computation should see: masked entries zero in soft mode.
// In hard mode the stored values already carry the zeros.
const Tensor& weights_for(const Parameter& w, MaskMode mode, Tensor& scratch) {
  if (!w.mask || mode == MaskMode::hard) return w.value;
  scratch = w.effective_value();
  return scratch;
}

void mask_gradient(Parameter& p, MaskMode mode) {
  if (!p.mask || mode == MaskMode::soft) return;
  for (std::size_t i = 0; i < p.grad.size(); ++i) {
    if (!(*p.mask)[i]) p.grad[i] = 0;
  }
}

Tensor dense_forward(const Dense& d, const Tensor& x, const Parameter& w, const Parameter* b, MaskMode mode) {
  const std::size_t batch = x.dim(0);
  Tensor scratch;
  const Real* W = weights_for(w, mode, scratch).data();
  Tensor y({batch, d.n_out});
  for (std::size_t n = 0; n < batch; ++n) {
    const Real* xr = x.data() + n * d.n_in;
    Real* yr = y.data() + n * d.n_out;
    for (std::size_t o = 0; o < d.n_out; ++o) {
      const Real* wr = W + o * d.n_in;
      Real acc = b ? b->value[o] : Real(0);
      for (std::size_t i = 0; i < d.n_in; ++i) acc += wr[i] * xr[i];
      yr[o] = acc;
    }
  }
  return y;
}

Tensor dense_backward(const Dense& d, const Tensor& x, const Tensor& dy, Parameter& w, Parameter* b,
                      MaskMode mode) {
  const std::size_t batch = x.dim(0);
  Tensor scratch;
  const Real* W = weights_for(w, mode, scratch).data();
  w.grad.fill(0);
  if (b) b->grad.fill(0);
  Tensor dx({batch, d.n_in});
  for (std::size_t n = 0; n < batch; ++n) {
    const Real* xr = x.data() + n * d.n_in;
    const Real* gr = dy.data() + n * d.n_out;
    Real* dxr = dx.data() + n * d.n_in;
    for (std::size_t o = 0; o < d.n_out; ++o) {
      const Real g = gr[o];
      if (b) b->grad[o] += g;
      if (g == 0) continue;
      Real* gw = w.grad.data() + o * d.n_in;
      const Real* wr = W + o * d.n_in;
      for (std::size_t i = 0; i < d.n_in; ++i) {
        gw[i] += g * xr[i];
        dxr[i] += g * wr[i];
      }
    }
  }
  return dx;
}

Tensor conv_forward(const Conv2D& c, const Tensor& x, const Parameter& w, const Parameter* b, MaskMode mode) {
  const std::size_t batch = x.dim(0), H = x.dim(2), Wd = x.dim(3);
  const std::size_t Ho = conv_extent(H, c.k_h, c.stride, c.padding);
  const std::size_t Wo = conv_extent(Wd, c.k_w, c.stride, c.padding);
  Tensor scratch;
  const Real* K = weights_for(w, mode, scratch).data();
  Tensor y({batch, c.c_out, Ho, Wo});
  for (std::size_t n = 0; n < batch; ++n) {
    for (std::size_t co = 0; co < c.c_out; ++co) {
      Real* yp = y.data() + ((n * c.c_out + co) * Ho) * Wo;
      const Real bias = b ? b->value[co] : Real(0);
      for (std::size_t i = 0; i < Ho * Wo; ++i) yp[i] = bias;
      for (std::size_t ci = 0; ci < c.c_in; ++ci) {
        const Real* xp = x.data() + ((n * c.c_in + ci) * H) * Wd;
        for (std::size_t kh = 0; kh < c.k_h; ++kh) {
          for (std::size_t kw = 0; kw < c.k_w; ++kw) {
            const Real k = K[((co * c.c_in + ci) * c.k_h + kh) * c.k_w + kw];
            if (k == 0) continue;
            for (std::size_t oh = 0; oh < Ho; ++oh) {
              const std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(oh * c.stride + kh) -
                                        static_cast<std::ptrdiff_t>(c.padding);
              if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(H)) continue;
              for (std::size_t ow = 0; ow < Wo; ++ow) {
                const std::ptrdiff_t iw = static_cast<std::ptrdiff_t>(ow * c.stride + kw) -
                                          static_cast<std::ptrdiff_t>(c.padding);
                if (iw < 0 || iw >= static_cast<std::ptrdiff_t>(Wd)) continue;
                yp[oh * Wo + ow] += k * xp[ih * Wd + iw];
              }
            }
          }
        }
      }
    }
  }
  return y;
}

Tensor conv_backward(const Conv2D& c, const Tensor& x, const Tensor& dy, Parameter& w, Parameter* b,
                     MaskMode mode) {
  const std::size_t batch = x.dim(0), H = x.dim(2), Wd = x.dim(3);
  const std::size_t Ho = dy.dim(2), Wo = dy.dim(3);
  Tensor scratch;
  const Real* K = weights_for(w, mode, scratch).data();
  w.grad.fill(0);
  if (b) b->grad.fill(0);
  Tensor dx(x.shape());
  for (std::size_t n = 0; n < batch; ++n) {
    for (std::size_t co = 0; co < c.c_out; ++co) {
      const Real* gp = dy.data() + ((n * c.c_out + co) * Ho) * Wo;
      if (b) {
        for (std::size_t i = 0; i < Ho * Wo; ++i) b->grad[co] += gp[i];
      }
      for (std::size_t ci = 0; ci < c.c_in; ++ci) {
        const Real* xp = x.data() + ((n * c.c_in + ci) * H) * Wd;
        Real* dxp = dx.data() + ((n * c.c_in + ci) * H) * Wd;
        for (std::size_t kh = 0; kh < c.k_h; ++kh) {
          for (std::size_t kw = 0; kw < c.k_w; ++kw) {
            const std::size_t widx = ((co * c.c_in + ci) * c.k_h + kh) * c.k_w + kw;
            const Real k = K[widx];
            Real acc = 0;
            for (std::size_t oh = 0; oh < Ho; ++oh) {
              const std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(oh * c.stride + kh) -
                                        static_cast<std::ptrdiff_t>(c.padding);
              if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(H)) continue;
              for (std::size_t ow = 0; ow < Wo; ++ow) {
                const std::ptrdiff_t iw = static_cast<std::ptrdiff_t>(ow * c.stride + kw) -
                                          static_cast<std::ptrdiff_t>(c.padding);
                if (iw < 0 || iw >= static_cast<std::ptrdiff_t>(Wd)) continue;
                const Real g = gp[oh * Wo + ow];
                acc += g * xp[ih * Wd + iw];
                dxp[ih * Wd + iw] += g * k;
              }
            }
            w.grad[widx] += acc;
          }
        }
      }
    }
  }
  return dx;
}

}  // namespace

std::string describe(const LayerSpec& spec) {
  return std::visit(overloaded{
                        [](const Dense& d) {
                          return "Dense(" + std::to_string(d.n_in) + "->" + std::to_string(d.n_out) +
                                 (d.has_bias ? "" : ", no bias") + ")";
                        },
                        [](const Conv2D& c) {
                          return "Conv2D(" + std::to_string(c.c_in) + "->" + std::to_string(c.c_out) + ", " +
                                 std::to_string(c.k_h) + "x" + std::to_string(c.k_w) + ", stride " +
                                 std::to_string(c.stride) + ", pad " + std::to_string(c.padding) +
                                 (c.has_bias ? "" : ", no bias") + ")";
                        },
                        [](const ReLU&) { return std::string("ReLU"); },
                        [](const Flatten&) { return std::string("Flatten"); },
                    },
                    spec);
}

Parameter::Parameter(Shape shape, bool is_prunable)
    : value(shape), grad(shape), momentum(shape), prunable(is_prunable) {}

Tensor Parameter::effective_value() const {
  Tensor out = value;
  if (mask) {
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (!(*mask)[i]) out[i] = 0;
    }
  }
  return out;
}

Layer::Layer(LayerSpec spec) : spec_(std::move(spec)) {
  std::visit(overloaded{
                 [this](const Dense& d) {
                   if (d.n_in == 0 || d.n_out == 0) throw ConfigError("Dense layer needs positive sizes");
                   params_.emplace_back(Shape{d.n_out, d.n_in}, true);
                   if (d.has_bias) params_.emplace_back(Shape{d.n_out}, false);
                 },
                 [this](const Conv2D& c) {
                   if (c.c_in == 0 || c.c_out == 0 || c.k_h == 0 || c.k_w == 0 || c.stride == 0) {
                     throw ConfigError("Conv2D layer needs positive channels, kernel and stride");
                   }
                   params_.emplace_back(Shape{c.c_out, c.c_in, c.k_h, c.k_w}, true);
                   if (c.has_bias) params_.emplace_back(Shape{c.c_out}, false);
                 },
                 [](const ReLU&) {},
                 [](const Flatten&) {},
             },
             spec_);
}

Parameter* Layer::weight() { return params_.empty() ? nullptr : &params_[0]; }
const Parameter* Layer::weight() const { return params_.empty() ? nullptr : &params_[0]; }
Parameter* Layer::bias() { return params_.size() > 1 ? &params_[1] : nullptr; }
const Parameter* Layer::bias() const { return params_.size() > 1 ? &params_[1] : nullptr; }

Shape Layer::output_shape(const Shape& in) const {
  return std::visit(
      overloaded{
          [&](const Dense& d) -> Shape {
            if (in.size() != 1 || in[0] != d.n_in) {
              throw ConfigError(describe(spec_) + " expects input (" + std::to_string(d.n_in) + "), got " +
                                to_string(in));
            }
            return {d.n_out};
          },
          [&](const Conv2D& c) -> Shape {
            if (in.size() != 3 || in[0] != c.c_in) {
              throw ConfigError(describe(spec_) + " expects input (" + std::to_string(c.c_in) +
                                ", H, W), got " + to_string(in));
            }
            if (in[1] + 2 * c.padding < c.k_h || in[2] + 2 * c.padding < c.k_w) {
              throw ConfigError(describe(spec_) + " kernel larger than padded input " + to_string(in));
            }
            return {c.c_out, conv_extent(in[1], c.k_h, c.stride, c.padding),
                    conv_extent(in[2], c.k_w, c.stride, c.padding)};
          },
          [&](const ReLU&) -> Shape { return in; },
          [&](const Flatten&) -> Shape { return {numel(in)}; },
      },
      spec_);
}

Tensor Layer::apply(const Tensor& x, MaskMode mode) const {
  return std::visit(overloaded{
                        [&](const Dense& d) { return dense_forward(d, x, params_[0], bias(), mode); },
                        [&](const Conv2D& c) { return conv_forward(c, x, params_[0], bias(), mode); },
                        [&](const ReLU&) {
                          Tensor y = x;
                          for (auto& v : y.values()) v = v > 0 ? v : Real(0);
                          return y;
                        },
                        [&](const Flatten&) {
                          return x.reshaped({x.dim(0), x.size() / x.dim(0)});
                        },
                    },
                    spec_);
}

Tensor Layer::forward(const Tensor& x, MaskMode mode) {
  input_ = x;
  cached_ = true;
  return apply(x, mode);
}

Tensor Layer::backward(const Tensor& dy, MaskMode mode) {
  if (!cached_) throw StateError(describe(spec_) + ": backward called without a preceding forward");
  Tensor dx = std::visit(overloaded{
                             [&](const Dense& d) {
                               return dense_backward(d, input_, dy, params_[0], bias(), mode);
                             },
                             [&](const Conv2D& c) {
                               return conv_backward(c, input_, dy, params_[0], bias(), mode);
                             },
                             [&](const ReLU&) {
                               Tensor g = dy;
                               for (std::size_t i = 0; i < g.size(); ++i) {
                                 if (!(input_[i] > 0)) g[i] = 0;
                               }
                               return g;
                             },
                             [&](const Flatten&) { return dy.reshaped(input_.shape()); },
                         },
                         spec_);
  if (!params_.empty()) mask_gradient(params_[0], mode);
  clear_cache();
  return dx;
}

void Layer::clear_cache() {
  input_ = Tensor();
  cached_ = false;
}

Network::Network(Shape input_shape, std::vector<LayerSpec> layers) : input_shape_(std::move(input_shape)) {
  if (input_shape_.empty() || numel(input_shape_) == 0) {
    throw ConfigError("network input shape must be non-empty with positive dims, got " + to_string(input_shape_));
  }
  if (layers.empty()) throw ConfigError("network needs at least one layer");
  Shape shape = input_shape_;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    layers_.emplace_back(std::move(layers[i]));
    shapes_.push_back(shape);
    try {
      shape = layers_.back().output_shape(shape);
    } catch (const ConfigError& e) {
      throw ConfigError("layer " + std::to_string(i) + ": " + e.what());
    }
  }
  if (shape.size() != 1) {
    throw ConfigError("network output must be a flat logit vector, got " + to_string(shape) +
                      " (add a Flatten layer)");
  }
}

void Network::initialize(Rng& rng, std::span<const double> layer_scales) {
  for (std::size_t li = 0; li < layers_.size(); ++li) {
    Layer& layer = layers_[li];
    Parameter* w = layer.weight();
    if (!w) continue;
    std::size_t fan_in = 0, fan_out = 0;
    if (const auto* d = std::get_if<Dense>(&layer.spec())) {
      fan_in = d->n_in;
      fan_out = d->n_out;
    } else if (const auto* c = std::get_if<Conv2D>(&layer.spec())) {
      fan_in = c->c_in * c->k_h * c->k_w;
      fan_out = c->c_out * c->k_h * c->k_w;
    }
    double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    if (li < layer_scales.size()) bound *= layer_scales[li];
    for (auto& v : w->value.values()) v = rng.uniform(-bound, bound);
    w->momentum.fill(0);
    w->grad.fill(0);
    w->mask.reset();
    if (Parameter* b = layer.bias()) {
      b->value.fill(0);
      b->momentum.fill(0);
      b->grad.fill(0);
    }
  }
}

Shape Network::output_shape() const { return layers_.back().output_shape(shapes_.back()); }

std::size_t Network::n_classes() const { return output_shape()[0]; }

void Network::check_batch(const Tensor& batch) const {
  if (batch.rank() != input_shape_.size() + 1 || batch.dim(0) == 0 ||
      !std::equal(input_shape_.begin(), input_shape_.end(), batch.shape().begin() + 1)) {
    throw ConfigError("layer 0 (" + describe(layers_.front().spec()) + "): batch shape " + to_string(batch.shape()) +
                      " does not compose with input shape " + to_string(input_shape_));
  }
}

Tensor Network::forward(const Tensor& batch) {
  check_batch(batch);
  Tensor x = batch;
  for (auto& layer : layers_) x = layer.forward(x, mask_mode_);
  return x;
}

Tensor Network::predict(const Tensor& batch) const {
  check_batch(batch);
  Tensor x = batch;
  for (const auto& layer : layers_) x = layer.apply(x, mask_mode_);
  return x;
}

void Network::backward(const Tensor& dlogits) {
  for (const auto& layer : layers_) {
    if (!layer.has_cache()) throw StateError("backward called before forward");
  }
  Tensor g = dlogits;
  for (std::size_t i = layers_.size(); i-- > 0;) g = layers_[i].backward(g, mask_mode_);
}

std::vector<Parameter*> Network::parameters() {
  std::vector<Parameter*> out;
  for (auto& layer : layers_) {
    for (auto& p : layer.params()) out.push_back(&p);
  }
  return out;
}

std::vector<const Parameter*> Network::parameters() const {
  std::vector<const Parameter*> out;
  for (const auto& layer : layers_) {
    for (const auto& p : layer.params()) out.push_back(&p);
  }
  return out;
}

void Network::zero_grad() {
  for (auto* p : parameters()) p->grad.fill(0);
}

}  // namespace prunekit::nn
