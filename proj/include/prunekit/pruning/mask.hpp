// Copyright 2026 The prunekit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "prunekit/nn/network.hpp"

namespace prunekit::pruning {

enum class LayerKind { dense, conv2d };

/// Keep-flags for one prunable weight tensor (1 = kept).
struct LayerMask {
  std::size_t layer_index = 0;  // position in Network::layers()
  LayerKind kind = LayerKind::dense;
  nn::Shape shape;
  std::vector<std::uint8_t> keep;

  std::size_t total() const { return keep.size(); }
  std::size_t kept() const;

  friend bool operator==(const LayerMask&, const LayerMask&) = default;
};

/// Binary masks over every prunable parameter of a network.
class PruneMask {
 public:
  PruneMask() = default;
  explicit PruneMask(std::vector<LayerMask> layers);

  const std::vector<LayerMask>& layers() const { return layers_; }
  std::size_t kept() const { return kept_; }
  std::size_t total() const { return total_; }
  double sparsity() const;

  /// Every kept entry here is also kept in `other`.
  bool subset_of(const PruneMask& other) const;

  friend bool operator==(const PruneMask& a, const PruneMask& b) { return a.layers_ == b.layers_; }

 private:
  std::vector<LayerMask> layers_;
  std::size_t kept_ = 0;
  std::size_t total_ = 0;
};

/// The masks currently stored on the network; all-ones where none is stored.
PruneMask current_mask(const nn::Network& net);

/// Stores `mask` on the network's prunable weights.
///
/// hard: masked values and momentum entries are zeroed. A stored hard mask
///       is intersected with the new one, so the kept set only shrinks.
/// soft: the mask replaces the previous one and acts in forward/backward
///       only; stored values are untouched.
/// Throws InputError when layers or shapes do not match the network.
void apply_mask(nn::Network& net, const PruneMask& mask, nn::MaskMode mode);

/// Indices (into Network::layers()) of prunable layers with nothing kept.
std::vector<std::size_t> detect_layer_collapse(const PruneMask& mask);

/// CSV with header layer,kind,kept,total,sparsity.
void write_mask_csv(std::ostream& out, const PruneMask& mask);

}  // namespace prunekit::pruning
