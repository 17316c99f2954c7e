// Copyright 2026 The prunekit Authors
// SPDX-License-Identifier: Apache-2.0

#include "prunekit/metrics/metrics.hpp"

#include <limits>

#include "prunekit/core/error.hpp"

namespace prunekit::metrics {

double stability(double t_pre, double t_post) {
  if (!(t_pre > 0.0)) throw UndefinedMetricError("pruning stability is undefined for a pre-pruning accuracy of 0");
  return 1.0 - (t_pre - t_post) / t_pre;
}

StabilityRecord make_stability(double t_pre, double t_post) {
  StabilityRecord r{t_pre, t_post, stability(t_pre, t_post), {}};
  if (r.delta > 1.0) r.note = "pruning increased accuracy";
  return r;
}

FlopsReport count_flops(const nn::Network& net, const pruning::PruneMask& mask, const nn::Shape& input_shape) {
  if (input_shape != net.input_shape()) {
    throw ConfigError("FLOP count input shape " + nn::to_string(input_shape) + " does not match network input " +
                      nn::to_string(net.input_shape()));
  }
  FlopsReport report;
  nn::Shape shape = input_shape;
  for (std::size_t li = 0; li < net.layers().size(); ++li) {
    const nn::Layer& layer = net.layers()[li];
    const nn::Shape out = layer.output_shape(shape);
    LayerFlops entry;
    entry.layer_index = li;

    const nn::Parameter* w = layer.weight();
    std::uint64_t kept = w ? w->size() : 0;
    for (const auto& lm : mask.layers()) {
      if (lm.layer_index == li) kept = lm.kept();
    }
    if (const auto* d = std::get_if<nn::Dense>(&layer.spec())) {
      entry.kind = "dense";
      entry.dense = 2 * d->n_in * d->n_out;
      entry.sparse = 2 * kept;
      report.dense_weights_only += entry.dense;
      report.sparse_weights_only += entry.sparse;
      if (d->has_bias) {
        entry.dense += d->n_out;
        entry.sparse += d->n_out;
      }
    } else if (const auto* c = std::get_if<nn::Conv2D>(&layer.spec())) {
      const std::uint64_t positions = out[1] * out[2];
      entry.kind = "conv2d";
      entry.dense = 2 * c->c_in * c->k_h * c->k_w * c->c_out * positions;
      entry.sparse = 2 * kept * positions;
      report.dense_weights_only += entry.dense;
      report.sparse_weights_only += entry.sparse;
      if (c->has_bias) {
        entry.dense += c->c_out * positions;
        entry.sparse += c->c_out * positions;
      }
    } else {
      entry.kind = std::holds_alternative<nn::ReLU>(layer.spec()) ? "relu" : "flatten";
      entry.activation = true;
      entry.dense = entry.sparse = nn::numel(out);
    }
    report.dense += entry.dense;
    report.sparse += entry.sparse;
    report.per_layer.push_back(entry);
    shape = out;
  }
  constexpr double inf = std::numeric_limits<double>::infinity();
  report.speedup = report.sparse ? static_cast<double>(report.dense) / static_cast<double>(report.sparse) : inf;
  report.speedup_weights_only = report.sparse_weights_only ? static_cast<double>(report.dense_weights_only) /
                                                                 static_cast<double>(report.sparse_weights_only)
                                                           : inf;
  report.collapsed = !pruning::detect_layer_collapse(mask).empty();
  return report;
}

SparsityReport sparsity_report(const pruning::PruneMask& mask) {
  SparsityReport r;
  r.kept = mask.kept();
  r.total = mask.total();
  r.overall = mask.sparsity();
  for (const auto& l : mask.layers()) {
    const double s = l.total() ? 1.0 - static_cast<double>(l.kept()) / static_cast<double>(l.total()) : 0.0;
    r.per_layer.push_back({l.layer_index, l.kept(), l.total(), s});
  }
  return r;
}

}  // namespace prunekit::metrics
