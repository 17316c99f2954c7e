// Copyright 2026 The prunekit Authors
// SPDX-License-Identifier: Apache-2.0

#include "prunekit/pruning/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "prunekit/core/error.hpp"

namespace prunekit::pruning {

namespace {

// Ranking key: previously pruned entries first, then by magnitude, then by
// flat index.
struct Entry {
  bool alive;
  double score;
  std::size_t layer;
  std::size_t index;
  std::size_t flat;
};

bool rank_less(const Entry& a, const Entry& b) {
  if (a.alive != b.alive) return !a.alive;
  if (a.score != b.score) return a.score < b.score;
  return a.flat < b.flat;
}

bool alive(const PrunableLayer& l, std::size_t i) { return l.prior.empty() || l.prior[i] != 0; }

std::vector<LayerMask> all_kept(std::span<const PrunableLayer> layers) {
  std::vector<LayerMask> masks;
  for (const auto& l : layers) {
    if (l.weights.size() != nn::numel(l.shape)) throw InputError("prunable layer view size does not match its shape");
    if (!l.prior.empty() && l.prior.size() != l.weights.size()) throw InputError("prior mask size mismatch");
    masks.push_back(LayerMask{l.layer_index, l.kind, l.shape, std::vector<std::uint8_t>(l.weights.size(), 1)});
  }
  return masks;
}

// Prunes the k lowest-ranked entries of one layer.
void prune_layer(const PrunableLayer& l, std::size_t k, LayerMask& out) {
  std::vector<Entry> entries;
  entries.reserve(l.weights.size());
  for (std::size_t i = 0; i < l.weights.size(); ++i) {
    entries.push_back({alive(l, i), std::abs(l.weights[i]), 0, i, i});
  }
  k = std::min(k, entries.size());
  std::partial_sort(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(k), entries.end(), rank_less);
  for (std::size_t j = 0; j < k; ++j) out.keep[entries[j].index] = 0;
}

void prune_globally(std::vector<Entry>& entries, std::size_t k, std::vector<LayerMask>& masks) {
  // a target below the prior sparsity still keeps every prior entry pruned
  const auto dead = static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [](const Entry& e) { return !e.alive; }));
  k = std::min(std::max(k, dead), entries.size());
  std::partial_sort(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(k), entries.end(), rank_less);
  for (std::size_t j = 0; j < k; ++j) masks[entries[j].layer].keep[entries[j].index] = 0;
}

std::size_t total_size(std::span<const PrunableLayer> layers) {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weights.size();
  return n;
}

std::vector<LayerMask> select_with_counts(std::span<const PrunableLayer> layers,
                                          const std::vector<std::size_t>& pruned_counts) {
  auto masks = all_kept(layers);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    std::size_t already = 0;
    for (std::size_t i = 0; i < layers[l].weights.size(); ++i) already += !alive(layers[l], i);
    prune_layer(layers[l], std::max(pruned_counts[l], already), masks[l]);
  }
  return masks;
}

// Rounds real per-layer targets to integers summing exactly to `budget`
// (largest remainder, ties to the lower layer index), each capped at cap[l].
std::vector<std::size_t> apportion(const std::vector<double>& real, const std::vector<std::size_t>& cap,
                                   std::size_t budget) {
  const std::size_t n = real.size();
  std::vector<std::size_t> out(n);
  std::size_t assigned = 0;
  for (std::size_t l = 0; l < n; ++l) {
    out[l] = std::min(cap[l], static_cast<std::size_t>(std::floor(std::max(real[l], 0.0))));
    assigned += out[l];
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return real[a] - std::floor(real[a]) > real[b] - std::floor(real[b]);
  });
  while (assigned < budget) {
    bool progressed = false;
    for (std::size_t l : order) {
      if (assigned == budget) break;
      if (out[l] < cap[l]) {
        ++out[l];
        ++assigned;
        progressed = true;
      }
    }
    if (!progressed) break;
  }
  while (assigned > budget) {
    for (std::size_t j = n; j-- > 0 && assigned > budget;) {
      if (out[order[j]] > 0) {
        --out[order[j]];
        --assigned;
      }
    }
  }
  return out;
}

std::vector<std::size_t> uniform_plus_counts(std::span<const PrunableLayer> layers, double sparsity) {
  const std::size_t n_layers = layers.size();
  const std::size_t total = total_size(layers);
  const std::size_t quota = prune_quota(sparsity, total);

  std::optional<std::size_t> first_conv, last_dense;
  for (std::size_t l = 0; l < n_layers; ++l) {
    if (layers[l].kind == LayerKind::conv2d && !first_conv) first_conv = l;
    if (layers[l].kind == LayerKind::dense) last_dense = l;
  }

  std::vector<std::size_t> counts(n_layers, 0);
  std::vector<bool> fixed(n_layers, false);
  std::size_t fixed_pruned = 0;
  if (first_conv) fixed[*first_conv] = true;
  if (last_dense && *last_dense != first_conv) {
    const std::size_t n = layers[*last_dense].weights.size();
    const double s_last = std::min(sparsity, kUniformPlusLastLayerCap);
    counts[*last_dense] = prune_quota(s_last, n);
    fixed[*last_dense] = true;
    fixed_pruned += counts[*last_dense];
  }
  std::size_t free_total = 0;
  for (std::size_t l = 0; l < n_layers; ++l) {
    if (!fixed[l]) free_total += layers[l].weights.size();
  }
  const std::size_t remaining = quota > fixed_pruned ? quota - fixed_pruned : 0;
  if (remaining > free_total || (remaining > 0 && free_total == 0)) {
    std::ostringstream msg;
    msg << "uniform_plus cannot reach sparsity " << sparsity << ": ";
    if (first_conv) msg << "first conv layer " << layers[*first_conv].layer_index << " is kept dense; ";
    if (last_dense) {
      msg << "last dense layer " << layers[*last_dense].layer_index << " is capped at "
          << kUniformPlusLastLayerCap << " sparsity; ";
    }
    msg << "the remaining " << free_total << " weights cannot absorb " << remaining
        << " pruned weights (shortfall redistributed proportionally to layer size)";
    throw InfeasibleError(msg.str());
  }
  // shortfall spread proportionally to layer size: one raised sparsity level
  std::vector<double> real(n_layers, 0.0);
  std::vector<std::size_t> cap(n_layers, 0);
  for (std::size_t l = 0; l < n_layers; ++l) {
    if (fixed[l]) continue;
    real[l] = static_cast<double>(remaining) * static_cast<double>(layers[l].weights.size()) /
              static_cast<double>(free_total);
    cap[l] = layers[l].weights.size();
  }
  const auto free_counts = apportion(real, cap, remaining);
  for (std::size_t l = 0; l < n_layers; ++l) {
    if (!fixed[l]) counts[l] = free_counts[l];
  }
  return counts;
}

}  // namespace

std::string_view to_string(Criterion c) {
  switch (c) {
    case Criterion::global: return "global";
    case Criterion::uniform: return "uniform";
    case Criterion::uniform_plus: return "uniform_plus";
    case Criterion::erk: return "erk";
    case Criterion::lamp: return "lamp";
  }
  return "?";
}

std::optional<Criterion> parse_criterion(std::string_view name) {
  for (Criterion c : {Criterion::global, Criterion::uniform, Criterion::uniform_plus, Criterion::erk, Criterion::lamp}) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

std::vector<PrunableLayer> prunable_layers(const nn::Network& net, bool with_prior) {
  std::vector<PrunableLayer> out;
  for (std::size_t li = 0; li < net.layers().size(); ++li) {
    const nn::Layer& layer = net.layers()[li];
    const nn::Parameter* w = layer.weight();
    if (!w || !w->prunable) continue;
    PrunableLayer view;
    view.layer_index = li;
    view.kind = std::holds_alternative<nn::Conv2D>(layer.spec()) ? LayerKind::conv2d : LayerKind::dense;
    view.shape = w->value.shape();
    view.weights = w->value.values();
    if (with_prior && w->mask) view.prior = *w->mask;
    out.push_back(view);
  }
  return out;
}

std::size_t prune_quota(double sparsity, std::size_t total) {
  if (!(sparsity >= 0.0 && sparsity < 1.0)) {
    throw InputError("target sparsity must be in [0, 1), got " + std::to_string(sparsity));
  }
  // slack absorbs products like 0.5 * 4 evaluating to 1.9999999999999998
  const auto k = static_cast<std::size_t>(std::floor(sparsity * static_cast<double>(total) + 1e-9));
  return std::min(k, total);
}

std::vector<std::size_t> erk_kept_counts(std::span<const PrunableLayer> layers, double sparsity) {
  const std::size_t n_layers = layers.size();
  const std::size_t total = total_size(layers);
  const std::size_t budget = total - prune_quota(sparsity, total);

  std::vector<double> raw(n_layers);
  std::vector<double> size(n_layers);
  for (std::size_t l = 0; l < n_layers; ++l) {
    const auto& shape = layers[l].shape;
    const double sum = std::accumulate(shape.begin(), shape.end(), 0.0);
    size[l] = static_cast<double>(layers[l].weights.size());
    raw[l] = sum / size[l];
  }
  // waterfilling: layers whose scaled density exceeds 1 are kept dense, the
  // scale is re-solved over the rest until no new layer saturates
  std::vector<bool> dense(n_layers, false);
  double scale = 0;
  for (std::size_t iter = 0; iter <= n_layers; ++iter) {
    double dense_mass = 0, free_mass = 0;
    for (std::size_t l = 0; l < n_layers; ++l) {
      if (dense[l]) {
        dense_mass += size[l];
      } else {
        free_mass += raw[l] * size[l];
      }
    }
    scale = free_mass > 0 ? (static_cast<double>(budget) - dense_mass) / free_mass : 0.0;
    bool changed = false;
    for (std::size_t l = 0; l < n_layers; ++l) {
      if (!dense[l] && scale * raw[l] > 1.0) {
        dense[l] = true;
        changed = true;
      }
    }
    if (!changed) break;
  }
  std::vector<double> real(n_layers);
  std::vector<std::size_t> cap(n_layers);
  for (std::size_t l = 0; l < n_layers; ++l) {
    real[l] = dense[l] ? size[l] : std::max(0.0, scale * raw[l] * size[l]);
    cap[l] = layers[l].weights.size();
  }
  return apportion(real, cap, budget);
}

std::vector<double> lamp_scores(std::span<const double> weights, std::span<const std::uint8_t> prior) {
  const std::size_t n = weights.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto is_alive = [&](std::size_t i) { return prior.empty() || prior[i] != 0; };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (is_alive(a) != is_alive(b)) return !is_alive(a);
    const double ma = std::abs(weights[a]), mb = std::abs(weights[b]);
    if (ma != mb) return ma < mb;
    return a < b;
  });
  std::vector<double> scores(n, 0.0);
  double suffix = 0;
  for (std::size_t j = n; j-- > 0;) {
    const std::size_t i = order[j];
    const double sq = is_alive(i) ? weights[i] * weights[i] : 0.0;
    suffix += sq;
    scores[i] = suffix > 0 ? sq / suffix : 0.0;
  }
  return scores;
}

PruneMask select_mask(std::span<const PrunableLayer> layers, Criterion criterion, double sparsity) {
  const std::size_t total = total_size(layers);
  const std::size_t quota = prune_quota(sparsity, total);
  auto masks = all_kept(layers);

  switch (criterion) {
    case Criterion::global: {
      std::vector<Entry> entries;
      entries.reserve(total);
      std::size_t flat = 0;
      for (std::size_t l = 0; l < layers.size(); ++l) {
        for (std::size_t i = 0; i < layers[l].weights.size(); ++i) {
          entries.push_back({alive(layers[l], i), std::abs(layers[l].weights[i]), l, i, flat++});
        }
      }
      prune_globally(entries, quota, masks);
      break;
    }
    case Criterion::uniform: {
      std::vector<std::size_t> counts;
      for (const auto& l : layers) counts.push_back(prune_quota(sparsity, l.weights.size()));
      masks = select_with_counts(layers, counts);
      break;
    }
    case Criterion::uniform_plus:
      masks = select_with_counts(layers, uniform_plus_counts(layers, sparsity));
      break;
    case Criterion::erk: {
      const auto kept = erk_kept_counts(layers, sparsity);
      std::vector<std::size_t> counts;
      for (std::size_t l = 0; l < layers.size(); ++l) counts.push_back(layers[l].weights.size() - kept[l]);
      masks = select_with_counts(layers, counts);
      break;
    }
    case Criterion::lamp: {
      std::vector<Entry> entries;
      entries.reserve(total);
      std::size_t flat = 0;
      for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto scores = lamp_scores(layers[l].weights, layers[l].prior);
        for (std::size_t i = 0; i < scores.size(); ++i) {
          entries.push_back({alive(layers[l], i), scores[i], l, i, flat++});
        }
      }
      prune_globally(entries, quota, masks);
      break;
    }
  }
  return PruneMask(std::move(masks));
}

}  // namespace prunekit::pruning
