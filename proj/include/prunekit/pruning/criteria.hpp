// Copyright 2026 The prunekit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "prunekit/nn/network.hpp"
#include "prunekit/pruning/mask.hpp"

namespace prunekit::pruning {

/// How a global sparsity target is split across layers.
enum class Criterion {
  global,        // one magnitude threshold over all prunable weights
  uniform,       // every layer pruned to the target
  uniform_plus,  // uniform, first conv kept dense, last dense capped at 80%
  erk,           // Erdos-Renyi-kernel layer densities
  lamp           // layer-adaptive magnitude scores
};

std::string_view to_string(Criterion c);
std::optional<Criterion> parse_criterion(std::string_view name);

/// Read-only view of one prunable weight tensor used for selection.
struct PrunableLayer {
  std::size_t layer_index = 0;
  LayerKind kind = LayerKind::dense;
  nn::Shape shape;
  std::span<const double> weights;
  /// Entries already pruned; they rank below every live weight so the new
  /// mask never revives them. Empty means no prior mask.
  std::span<const std::uint8_t> prior;
};

/// Views over a network's prunable weights. With `with_prior`, stored masks
/// are passed as priors (hard pruning); without, selection starts from the
/// dense stored values (soft re-selection).
std::vector<PrunableLayer> prunable_layers(const nn::Network& net, bool with_prior);

/// Maximum sparsity of the last dense layer under uniform_plus.
inline constexpr double kUniformPlusLastLayerCap = 0.8;

/// Number of weights to prune for a target over `total` entries.
std::size_t prune_quota(double sparsity, std::size_t total);

/// Magnitude-based selection to overall sparsity `sparsity` in [0, 1).
///
/// Ties in the ranking break by ascending flat index (concatenated in layer
/// order for global rankings). Throws InfeasibleError when uniform_plus
/// cannot reach the target under its caps.
PruneMask select_mask(std::span<const PrunableLayer> layers, Criterion criterion, double sparsity);

/// Per-layer kept counts ERK assigns for the target; exposed for testing
/// the waterfilling allocation.
std::vector<std::size_t> erk_kept_counts(std::span<const PrunableLayer> layers, double sparsity);

/// LAMP scores of one layer, in flat-index order.
std::vector<double> lamp_scores(std::span<const double> weights, std::span<const std::uint8_t> prior = {});

}  // namespace prunekit::pruning
