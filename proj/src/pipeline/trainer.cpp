// Copyright 2026 The prunekit Authors
// SPDX-License-Identifier: Apache-2.0

#include "trainer.hpp"

#include <cmath>
#include <numeric>

#include "prunekit/nn/loss.hpp"
#include "prunekit/nn/sgd.hpp"
#include "prunekit/pruning/criteria.hpp"

namespace prunekit::pipeline::detail {

namespace {

std::vector<double> prunable_weights(const nn::Network& net) {
  std::vector<double> out;
  for (const nn::Parameter* p : net.parameters()) {
    if (!p->prunable) continue;
    const nn::Tensor v = p->effective_value();
    out.insert(out.end(), v.values().begin(), v.values().end());
  }
  return out;
}

}  // namespace

BatchStream::BatchStream(std::size_t n, std::size_t batch, Rng rng) : order_(n), batch_(batch), rng_(std::move(rng)) {
  std::iota(order_.begin(), order_.end(), 0);
}

std::span<const std::size_t> BatchStream::next() {
  if (pos_ == 0) {
    std::iota(order_.begin(), order_.end(), 0);
    rng_.shuffle(std::span<std::size_t>(order_));
  }
  const std::size_t len = std::min(batch_, order_.size() - pos_);
  std::span<const std::size_t> out(order_.data() + pos_, len);
  pos_ += len;
  if (pos_ == order_.size()) pos_ = 0;
  return out;
}

Trainer::Trainer(const ExperimentConfig& cfg, const io::Split& data, nn::Network net, Rng data_rng,
                 std::size_t start_step, const RunOptions& opts)
    : cfg_(cfg),
      data_(data),
      net_(std::move(net)),
      batches_(data.train.size(), cfg.training.batch_size, std::move(data_rng)),
      spe_(pipeline::steps_per_epoch(data.train.size(), cfg.training.batch_size)),
      step_(start_step),
      opts_(opts) {
  trace_.seed = cfg.seed;
}

const EvalResult& Trainer::eval() {
  if (!eval_cache_) eval_cache_ = evaluate(net_, data_.eval);
  return *eval_cache_;
}

void Trainer::record(const std::string& phase, std::size_t cycle, const std::string& event, bool with_eval) {
  TraceRecord r;
  r.step = step_;
  r.phase = phase;
  r.cycle = cycle;
  r.lr = last_lr_;
  r.sparsity = pruning::current_mask(net_).sparsity();
  if (loss_n_ > 0) r.train_loss = loss_sum_ / static_cast<double>(loss_n_);
  if (with_eval) {
    const EvalResult& e = eval();
    r.eval_accuracy = e.accuracy;
    r.eval_loss = e.loss;
  }
  r.event = event;
  r.seed = cfg_.seed;
  trace_.records.push_back(std::move(r));
  loss_sum_ = 0;
  loss_n_ = 0;
}

void Trainer::run_phase(const std::string& phase, std::size_t cycle, std::size_t steps,
                        const std::function<double(std::size_t)>& lr_at,
                        const std::function<void(std::size_t)>& before_step) {
  PhaseAccount account{phase, cycle, step_, steps, static_cast<double>(steps) / static_cast<double>(spe_)};
  last_lr_.reset();
  loss_sum_ = 0;
  loss_n_ = 0;
  nn::SgdConfig sgd{cfg_.training.momentum, cfg_.training.weight_decay, net_.mask_mode()};
  const std::size_t cadence = cfg_.training.eval_every_epochs * spe_;
  std::vector<int> labels;
  for (std::size_t t = 0; t < steps; ++t) {
    if (before_step) {
      before_step(t);
      sgd.mask_mode = net_.mask_mode();
    }
    const auto idx = batches_.next();
    labels.clear();
    for (auto i : idx) labels.push_back(data_.train.labels[i]);
    const nn::Tensor logits = net_.forward(data_.train.gather(idx));
    const nn::LossResult loss = nn::softmax_cross_entropy(logits, labels);
    if (!std::isfinite(loss.loss)) {
      record(phase, cycle, "abort", false);
      throw DivergenceError("non-finite training loss at step " + std::to_string(step_) + " (" + phase + ", cycle " +
                                std::to_string(cycle) + ")",
                            trace_);
    }
    net_.backward(loss.dlogits);
    const double lr = lr_at(t);
    nn::sgd_step(net_.parameters(), lr, sgd);
    eval_cache_.reset();
    trace_.lr_per_step.push_back(lr);
    last_lr_ = lr;
    loss_sum_ += loss.loss;
    ++loss_n_;
    ++step_;
    if (cadence > 0 && step_ % cadence == 0) record(phase, cycle, "eval", true);
  }
  record(phase, cycle, "phase_end", true);
  trace_.phases.push_back(account);
}

PruneOutcome Trainer::apply(const pruning::PruneMask& mask, nn::MaskMode mode, const std::string& phase,
                            std::size_t cycle, double target) {
  PruneOutcome out;
  out.kept_before = pruning::current_mask(net_).kept();
  out.before = prunable_weights(net_);
  record(phase, cycle, "prune_pre", true);
  const double t_pre = eval().accuracy;

  pruning::apply_mask(net_, mask, mode);
  eval_cache_.reset();

  const pruning::PruneMask now = pruning::current_mask(net_);
  out.kept_after = now.kept();
  out.after = prunable_weights(net_);
  record(phase, cycle, "prune_post", true);
  const double t_post = eval().accuracy;

  out.event.step = step_;
  out.event.cycle = cycle;
  out.event.target_sparsity = target;
  out.event.achieved_sparsity = now.sparsity();
  out.event.stability = metrics::make_stability(t_pre, t_post);
  out.event.collapsed_layers = pruning::detect_layer_collapse(now);
  return out;
}

nn::Checkpoint Trainer::checkpoint() const {
  return nn::Checkpoint{net_, step_, trace_.phases.empty() ? 0 : trace_.phases.back().cycle, batches_.rng().state()};
}

void Trainer::save(const std::string& name) const {
  if (!opts_.checkpoint_dir) return;
  std::filesystem::create_directories(*opts_.checkpoint_dir);
  nn::save_checkpoint(*opts_.checkpoint_dir / (name + ".ckpt"), checkpoint());
}

RunResult Trainer::finish() {
  RunResult r;
  r.mask = pruning::current_mask(net_);
  const EvalResult& e = eval();
  r.accuracy = e.accuracy;
  r.loss = e.loss;
  r.flops = metrics::count_flops(net_, r.mask, net_.input_shape());
  r.steps_per_epoch = spe_;
  r.network = std::move(net_);
  r.trace = std::move(trace_);
  return r;
}

}  // namespace prunekit::pipeline::detail
