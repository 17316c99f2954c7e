// Copyright 2026 The prunekit Authors
// SPDX-License-Identifier: Apache-2.0

#include "prunekit/pruning/mask.hpp"

#include <algorithm>
#include <ostream>

#include "prunekit/core/error.hpp"

namespace prunekit::pruning {

std::size_t LayerMask::kept() const {
  return static_cast<std::size_t>(std::count_if(keep.begin(), keep.end(), [](std::uint8_t k) { return k != 0; }));
}

PruneMask::PruneMask(std::vector<LayerMask> layers) : layers_(std::move(layers)) {
  for (const auto& l : layers_) {
    if (l.keep.size() != nn::numel(l.shape)) throw InputError("layer mask size does not match its shape");
    kept_ += l.kept();
    total_ += l.total();
  }
}

double PruneMask::sparsity() const {
  if (total_ == 0) return 0.0;
  return 1.0 - static_cast<double>(kept_) / static_cast<double>(total_);
}

bool PruneMask::subset_of(const PruneMask& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& a = layers_[l].keep;
    const auto& b = other.layers_[l].keep;
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] && !b[i]) return false;
    }
  }
  return true;
}

PruneMask current_mask(const nn::Network& net) {
  std::vector<LayerMask> layers;
  for (std::size_t li = 0; li < net.layers().size(); ++li) {
    const nn::Layer& layer = net.layers()[li];
    const nn::Parameter* w = layer.weight();
    if (!w || !w->prunable) continue;
    LayerMask m;
    m.layer_index = li;
    m.kind = std::holds_alternative<nn::Conv2D>(layer.spec()) ? LayerKind::conv2d : LayerKind::dense;
    m.shape = w->value.shape();
    m.keep = w->mask ? *w->mask : std::vector<std::uint8_t>(w->size(), 1);
    layers.push_back(std::move(m));
  }
  return PruneMask(std::move(layers));
}

void apply_mask(nn::Network& net, const PruneMask& mask, nn::MaskMode mode) {
  for (const LayerMask& lm : mask.layers()) {
    if (lm.layer_index >= net.layers().size()) {
      throw InputError("mask refers to layer " + std::to_string(lm.layer_index) + " which does not exist");
    }
    const nn::Parameter* w = net.layers()[lm.layer_index].weight();
    if (!w || !w->prunable) {
      throw InputError("mask refers to layer " + std::to_string(lm.layer_index) + " which has no prunable weight");
    }
    if (w->value.shape() != lm.shape) {
      throw InputError("mask shape " + nn::to_string(lm.shape) + " does not match layer " +
                       std::to_string(lm.layer_index) + " weight " + nn::to_string(w->value.shape()));
    }
  }
  for (const LayerMask& lm : mask.layers()) {
    nn::Parameter& w = *net.layers()[lm.layer_index].weight();
    if (mode == nn::MaskMode::hard) {
      std::vector<std::uint8_t> keep = lm.keep;
      if (w.mask && net.mask_mode() == nn::MaskMode::hard) {
        for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = keep[i] && (*w.mask)[i];
      }
      for (std::size_t i = 0; i < keep.size(); ++i) {
        if (!keep[i]) {
          w.value[i] = 0;
          w.momentum[i] = 0;
        }
      }
      w.mask = std::move(keep);
    } else {
      w.mask = lm.keep;
    }
  }
  net.set_mask_mode(mode);
}

std::vector<std::size_t> detect_layer_collapse(const PruneMask& mask) {
  std::vector<std::size_t> out;
  for (const auto& l : mask.layers()) {
    if (l.kept() == 0) out.push_back(l.layer_index);
  }
  return out;
}

void write_mask_csv(std::ostream& out, const PruneMask& mask) {
  out << "layer,kind,kept,total,sparsity\n";
  for (const auto& l : mask.layers()) {
    const double s = l.total() ? 1.0 - static_cast<double>(l.kept()) / static_cast<double>(l.total()) : 0.0;
    out << l.layer_index << ',' << (l.kind == LayerKind::conv2d ? "conv2d" : "dense") << ',' << l.kept() << ','
        << l.total() << ',' << s << '\n';
  }
}

}  // namespace prunekit::pruning
