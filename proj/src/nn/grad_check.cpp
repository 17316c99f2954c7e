// Copyright 2026 The prunekit Authors
// SPDX-License-Identifier: Apache-2.0

#include "prunekit/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "prunekit/core/error.hpp"
#include "prunekit/nn/loss.hpp"

namespace prunekit::nn {

std::vector<Tensor> analytic_gradients(Network& net, const Tensor& batch, std::span<const int> labels) {
  const Tensor logits = net.forward(batch);
  const LossResult loss = softmax_cross_entropy(logits, labels);
  net.backward(loss.dlogits);
  std::vector<Tensor> grads;
  for (const Parameter* p : net.parameters()) grads.push_back(p->grad);
  return grads;
}

std::vector<Tensor> numeric_gradients(Network& net, const Tensor& batch, std::span<const int> labels, double h) {
  if (!(h > 0)) throw InputError("finite-difference step must be positive");
  std::vector<Tensor> grads;
  for (Parameter* p : net.parameters()) {
    Tensor g(p->value.shape());
    for (std::size_t i = 0; i < p->size(); ++i) {
      const Real saved = p->value[i];
      p->value[i] = saved + h;
      const Real up = softmax_cross_entropy(net.predict(batch), labels).loss;
      p->value[i] = saved - h;
      const Real down = softmax_cross_entropy(net.predict(batch), labels).loss;
      p->value[i] = saved;
      g[i] = (up - down) / (2 * h);
    }
    grads.push_back(std::move(g));
  }
  return grads;
}

GradCheckReport compare_gradients(const Network& net, std::span<const Tensor> analytic,
                                  std::span<const Tensor> numeric, double tol) {
  if (!(tol > 0)) throw InputError("gradient tolerance must be positive");
  GradCheckReport report;
  std::size_t k = 0;
  const auto& layers = net.layers();
  for (std::size_t li = 0; li < layers.size(); ++li) {
    if (layers[li].params().empty()) continue;
    LayerGradError entry{li, 0.0, true};
    for (const Parameter& p : layers[li].params()) {
      if (k >= analytic.size() || k >= numeric.size()) throw InputError("gradient list shorter than parameter list");
      const Tensor& a = analytic[k];
      const Tensor& n = numeric[k];
      ++k;
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (!p.kept(i)) continue;
        const double denom = std::max({std::abs(a[i]), std::abs(n[i]), kGradCheckFloor});
        entry.max_rel_error = std::max(entry.max_rel_error, std::abs(a[i] - n[i]) / denom);
      }
    }
    entry.pass = entry.max_rel_error < tol;
    report.max_rel_error = std::max(report.max_rel_error, entry.max_rel_error);
    report.pass = report.pass && entry.pass;
    report.layers.push_back(entry);
  }
  return report;
}

GradCheckReport grad_check(Network& net, const Tensor& batch, std::span<const int> labels, double h, double tol) {
  const auto analytic = analytic_gradients(net, batch, labels);
  const auto numeric = numeric_gradients(net, batch, labels, h);
  return compare_gradients(net, analytic, numeric, tol);
}

}  // namespace prunekit::nn
