// Copyright 2026 The prunekit Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

#include "doctest.h"
#include "prunekit/core/error.hpp"
#include "prunekit/core/rng.hpp"
#include "prunekit/io/dataset.hpp"
#include "prunekit/pipeline/pipeline.hpp"
#include "prunekit/pruning/sparsity_schedule.hpp"
#include "support/configs.hpp"
#include "support/support.hpp"

using namespace prunekit;
using namespace prunekit::pipeline;
using testing::tiny_config;

namespace {

io::Split tiny_data() { return io::load_dataset(testing::blobs_data(120, 7)); }

double retrain_epochs(const Trace& t) {
  double e = 0;
  for (const auto& p : t.phases) {
    if (p.phase == "retrain") e += p.epochs;
  }
  return e;
}

std::size_t phase_steps(const Trace& t) {
  std::size_t n = 0;
  for (const auto& p : t.phases) n += p.steps;
  return n;
}

}  // namespace

TEST_CASE("constant logits score one half on a balanced set") {
  nn::Network net({2}, {nn::Dense{2, 2, true}});  // all parameters zero
  io::Dataset d;
  d.features = nn::Tensor({4, 2}, std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8});
  d.labels = {0, 1, 0, 1};
  d.n_classes = 2;
  const auto a = evaluate(net, d);
  CHECK(a.accuracy == 0.5);
  CHECK(a.loss == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  const auto b = evaluate(net, d);
  CHECK(a.accuracy == b.accuracy);
  CHECK(a.loss == b.loss);
  io::Dataset empty;
  empty.features = nn::Tensor({0, 2});
  CHECK_THROWS_AS(evaluate(net, empty), InputError);
}

TEST_CASE("an all-ones hard mask does not change evaluation") {
  Rng rng(3);
  const io::Split data = tiny_data();
  nn::Network net({2}, {nn::Dense{2, 8, true}, nn::ReLU{}, nn::Dense{8, 2, true}});
  net.initialize(rng);
  const auto before = evaluate(net, data.eval);
  pruning::apply_mask(net, pruning::current_mask(net), nn::MaskMode::hard);
  const auto after = evaluate(net, data.eval);
  CHECK(before.accuracy == after.accuracy);
  CHECK(before.loss == after.loss);
}

TEST_CASE("a softmax layer separates separable blobs") {
  auto cfg = tiny_config(PipelineKind::dense);
  cfg.model = testing::mlp({}, 2);
  cfg.data = testing::blobs_data(400, 11, 0.3);
  cfg.training.batch_size = 10;
  cfg.schedule.epochs = 17;  // 30 steps per epoch, 510 steps
  const io::Split data = io::load_dataset(cfg.data);
  // oracle: the classes lie on opposite sides of the line x0 = 0
  for (const io::Dataset* part : {&data.train, &data.eval}) {
    for (std::size_t i = 0; i < part->size(); ++i) {
      const double x0 = part->features[i * 2];
      CHECK(((x0 > 0) == (part->labels[i] == 0)));
    }
  }
  const auto r = train_dense(cfg, data);
  CHECK(r.trace.total_steps() >= 500);
  CHECK(evaluate(r.network, data.train).accuracy >= 0.99);
}

TEST_CASE("zero epochs return the initialized network") {
  auto cfg = tiny_config(PipelineKind::dense, 5);
  cfg.schedule.epochs = 0;
  const io::Split data = tiny_data();
  const auto r = train_dense(cfg, data);
  CHECK(r.trace.total_steps() == 0);
  auto built = build_model(cfg.model, data.train.sample_shape());
  Rng init = Rng(cfg.seed).split(1);
  built.network.initialize(init, built.init_scales);
  const auto a = r.network.parameters();
  const auto b = built.network.parameters();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i]->value == b[i]->value);
}

TEST_CASE("identical seeds give identical runs for every pipeline") {
  const io::Split data = tiny_data();
  for (PipelineKind kind : {PipelineKind::dense, PipelineKind::one_shot, PipelineKind::iterative, PipelineKind::gmp}) {
    auto cfg = tiny_config(kind, 42);
    if (kind == PipelineKind::gmp) {
      cfg.schedule.epochs = 8;
      cfg.pruning.gmp.pruning_steps = 3;
    }
    const auto a = run_experiment(cfg, data);
    const auto b = run_experiment(cfg, data);
    CHECK(a.trace == b.trace);
    CHECK(a.mask == b.mask);
    CHECK(a.accuracy == b.accuracy);
    cfg.seed = 43;
    CHECK_FALSE(run_experiment(cfg, data).trace == a.trace);
  }
}

TEST_CASE("FT retrains at the final dense rate") {
  auto cfg = tiny_config(PipelineKind::one_shot);
  cfg.schedule.kind = "stepped";
  cfg.schedule.warmup = 0;
  cfg.schedule.milestones = {0.5};
  cfg.schedule.factors = {0.1};
  cfg.retrain.scheme = schedules::Scheme::FT;
  cfg.retrain.epochs = 2;
  const auto r = one_shot_imp(cfg, tiny_data());
  const std::size_t dense = cfg.schedule.epochs * r.steps_per_epoch;
  const double eta_T = r.trace.lr_per_step[dense - 1];
  CHECK(eta_T == doctest::Approx(0.01).epsilon(1e-15));
  REQUIRE(r.trace.total_steps() == dense + 2 * r.steps_per_epoch);
  for (std::size_t t = dense; t < r.trace.total_steps(); ++t) CHECK(r.trace.lr_per_step[t] == eta_T);
}

TEST_CASE("zero target sparsity prunes nothing and still retrains") {
  auto cfg = tiny_config(PipelineKind::one_shot);
  cfg.pruning.sparsity = 0.0;
  const auto r = one_shot_imp(cfg, tiny_data());
  REQUIRE(r.trace.prunes.size() == 1);
  CHECK(r.trace.prunes[0].achieved_sparsity == 0.0);
  CHECK(r.trace.prunes[0].stability.delta == 1.0);
  CHECK(r.mask.sparsity() == 0.0);
  CHECK(retrain_epochs(r.trace) == 1.0);
}

TEST_CASE("ALLR on near-zero pruned weights restarts at the length ratio") {
  // dense network whose lower half of weights is negligible
  auto cfg = tiny_config(PipelineKind::one_shot);
  cfg.schedule.epochs = 10;
  cfg.retrain.epochs = 1;  // T_rt / T = 0.1
  cfg.retrain.scheme = schedules::Scheme::ALLR;
  const io::Split data = tiny_data();
  auto dense_cfg = cfg;
  dense_cfg.pipeline = PipelineKind::dense;
  nn::Checkpoint ckpt = *train_dense(dense_cfg, data).dense_checkpoint;
  std::size_t i = 0;
  for (nn::Parameter* p : ckpt.network.parameters()) {
    if (!p->prunable) continue;
    for (auto& v : p->value.values()) v = (i++ % 2 == 0) ? 1e-12 : 1.0 + 1e-3 * static_cast<double>(i);
  }
  const auto r = prune_and_retrain(cfg, ckpt, data);
  REQUIRE(r.trace.prunes.size() == 1);
  const auto& ev = r.trace.prunes[0];
  CHECK(ev.discount->d1 < 1e-9);
  CHECK(ev.applied_discount == doctest::Approx(0.1).epsilon(1e-15));
  // first post-warmup step runs at d * eta_1
  const std::size_t warm = schedules::warmup_steps_for(schedules::kRestartWarmup, r.steps_per_epoch);
  CHECK(r.trace.lr_per_step[warm] == doctest::Approx(0.1 * cfg.schedule.lr).epsilon(1e-15));
}

TEST_CASE("three cycles of retraining are recorded") {
  auto cfg = tiny_config(PipelineKind::iterative);
  cfg.retrain.cycles = 3;
  cfg.retrain.epochs = 15;
  const auto r = iterative_imp(cfg, tiny_data());
  CHECK(retrain_epochs(r.trace) == 45.0);
  CHECK(r.trace.prunes.size() == 3);
  CHECK(phase_steps(r.trace) == r.trace.total_steps());
}

TEST_CASE("eighteen cycles of 20 percent reach 98 percent sparsity") {
  auto cfg = tiny_config(PipelineKind::iterative);
  cfg.model = testing::mlp({200}, 2);  // 800 weights resolve 98% to within one weight
  cfg.retrain.cycles = 18;
  cfg.pruning.sparsity = pruning::cumulative_sparsity(0.2, 18);
  cfg.schedule.epochs = 1;
  const auto r = iterative_imp(cfg, tiny_data());
  CHECK(r.mask.sparsity() >= 0.98);
  CHECK(std::abs(r.mask.sparsity() - cfg.pruning.sparsity) <= 1.0 / static_cast<double>(r.mask.total()));
}

TEST_CASE("iterative runs only shrink the mask and hit the target within a weight") {
  Rng rng(77);
  const io::Split data = tiny_data();
  for (int trial = 0; trial < 6; ++trial) {
    auto cfg = tiny_config(PipelineKind::iterative, trial);
    cfg.retrain.cycles = testing::in_range(rng, 2, 5);
    cfg.pruning.sparsity = rng.uniform(0.3, 0.95);
    cfg.retrain.scheme = trial % 2 ? schedules::Scheme::ALLR : schedules::Scheme::CLR;
    const auto r = iterative_imp(cfg, data);
    for (std::size_t j = 1; j < r.trace.prunes.size(); ++j) {
      CHECK(r.trace.prunes[j].achieved_sparsity >= r.trace.prunes[j - 1].achieved_sparsity);
    }
    CHECK(std::abs(r.mask.sparsity() - cfg.pruning.sparsity) <= 1.0 / static_cast<double>(r.mask.total()));
    // ALLR discounts only the last cycle
    for (const auto& ev : r.trace.prunes) {
      const bool last = ev.cycle == *cfg.retrain.cycles;
      if (cfg.retrain.scheme == schedules::Scheme::ALLR && last) {
        CHECK(ev.applied_discount == ev.discount->d);
      } else {
        CHECK(ev.applied_discount == 1.0);
      }
    }
  }
}

TEST_CASE("hard pruning never revives a weight across cycles") {
  auto cfg = tiny_config(PipelineKind::iterative);
  cfg.retrain.cycles = 4;
  cfg.pruning.sparsity = 0.9;
  const auto dir = std::filesystem::temp_directory_path() / "prunekit_pipeline_ckpt";
  std::filesystem::remove_all(dir);
  RunOptions opts;
  opts.checkpoint_dir = dir;
  iterative_imp(cfg, tiny_data(), opts);
  pruning::PruneMask prev;
  for (int j = 1; j <= 4; ++j) {
    const auto ckpt = nn::load_checkpoint(dir / ("retrain_" + std::to_string(j) + ".ckpt"));
    const auto mask = pruning::current_mask(ckpt.network);
    if (j > 1) CHECK(mask.subset_of(prev));
    prev = mask;
  }
  CHECK(std::filesystem::exists(dir / "dense.ckpt"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("BIMP spends exactly the declared budget") {
  const io::Split data = tiny_data();
  for (std::size_t t0 : {std::size_t{4}, std::size_t{8}}) {
    auto cfg = tiny_config(PipelineKind::bimp);
    cfg.schedule.epochs = t0;
    cfg.budget_epochs = 20;
    cfg.retrain.epochs = 4;
    cfg.pruning.sparsity = 0.8;
    const auto r = bimp(cfg, data);
    const std::size_t J = (20 - t0) / 4;
    CHECK(cycle_count(cfg) == J);
    CHECK(r.trace.prunes.size() == J);
    CHECK(r.trace.total_steps() == 20 * r.steps_per_epoch);
    CHECK(phase_steps(r.trace) == 20 * r.steps_per_epoch);
    CHECK(r.trace.records.back().step == 20 * r.steps_per_epoch);
  }
}

TEST_CASE("BIMP rejects a budget that cycles cannot fill") {
  auto cfg = tiny_config(PipelineKind::bimp);
  cfg.schedule.epochs = 5;
  cfg.budget_epochs = 20;
  cfg.retrain.epochs = 4;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg.retrain.cycles = 3;
  cfg.schedule.epochs = 8;
  CHECK_NOTHROW(validate(cfg));
  cfg.retrain.cycles = 2;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
}

TEST_CASE("every prune event carries a computable stability record") {
  const io::Split data = tiny_data();
  for (PipelineKind kind : {PipelineKind::one_shot, PipelineKind::iterative, PipelineKind::gmp}) {
    auto cfg = tiny_config(kind);
    if (kind == PipelineKind::gmp) {
      cfg.schedule.epochs = 8;
      cfg.pruning.gmp.pruning_steps = 3;
    }
    const auto r = run_experiment(cfg, data);
    REQUIRE_FALSE(r.trace.prunes.empty());
    for (const auto& ev : r.trace.prunes) {
      CHECK(ev.stability.t_pre > 0.0);
      CHECK(ev.stability.delta == metrics::stability(ev.stability.t_pre, ev.stability.t_post));
    }
    std::size_t pre = 0, post = 0;
    for (const auto& rec : r.trace.records) {
      pre += rec.event == "prune_pre";
      post += rec.event == "prune_post";
    }
    CHECK(pre == r.trace.prunes.size());
    CHECK(post == r.trace.prunes.size());
  }
}

TEST_CASE("pruning only exact zeros leaves accuracy unchanged") {
  auto cfg = tiny_config(PipelineKind::one_shot);
  const io::Split data = tiny_data();
  auto dense_cfg = cfg;
  dense_cfg.pipeline = PipelineKind::dense;
  nn::Checkpoint ckpt = *train_dense(dense_cfg, data).dense_checkpoint;
  std::size_t total = 0;
  for (const nn::Parameter* p : ckpt.network.parameters()) total += p->prunable ? p->size() : 0;
  const std::size_t quota = pruning::prune_quota(cfg.pruning.sparsity, total);
  std::size_t zeroed = 0;
  for (nn::Parameter* p : ckpt.network.parameters()) {
    if (!p->prunable) continue;
    for (auto& v : p->value.values()) {
      if (zeroed < quota) {
        v = 0.0;
        ++zeroed;
      }
    }
  }
  const auto r = prune_and_retrain(cfg, ckpt, data);
  CHECK(r.trace.prunes[0].stability.t_pre == r.trace.prunes[0].stability.t_post);
  CHECK(r.trace.prunes[0].stability.delta == 1.0);
}

TEST_CASE("pruning a dense checkpoint matches the one-shot pipeline") {
  const io::Split data = tiny_data();
  for (auto scheme : {schedules::Scheme::FT, schedules::Scheme::ALLR}) {
    auto cfg = tiny_config(PipelineKind::one_shot, 9);
    cfg.retrain.scheme = scheme;
    const auto full = one_shot_imp(cfg, data);
    const auto resumed = prune_and_retrain(cfg, *full.dense_checkpoint, data);
    CHECK(resumed.mask == full.mask);
    CHECK(resumed.accuracy == full.accuracy);
    CHECK(resumed.trace.prunes == full.trace.prunes);
    const std::size_t dense = cfg.schedule.epochs * full.steps_per_epoch;
    CHECK(std::equal(resumed.trace.lr_per_step.begin(), resumed.trace.lr_per_step.end(),
                     full.trace.lr_per_step.begin() + static_cast<std::ptrdiff_t>(dense)));
  }
}

TEST_CASE("a checkpoint from a different model is rejected") {
  auto cfg = tiny_config(PipelineKind::one_shot);
  const io::Split data = tiny_data();
  const auto full = one_shot_imp(cfg, data);
  cfg.model = testing::mlp({9}, 2);
  CHECK_THROWS_AS(prune_and_retrain(cfg, *full.dense_checkpoint, data), ConfigError);
}

TEST_CASE("GMP reaches the final sparsity in both mask modes") {
  const io::Split data = tiny_data();
  for (auto mode : {nn::MaskMode::soft, nn::MaskMode::hard}) {
    auto cfg = tiny_config(PipelineKind::gmp);
    cfg.schedule.epochs = 12;
    cfg.pruning.gmp.final_sparsity = 0.8;
    cfg.pruning.gmp.pruning_steps = 4;
    cfg.pruning.gmp.mask_mode = mode;
    cfg.pruning.gmp.lr_mode = mode == nn::MaskMode::soft ? GmpLrMode::cyclic_linear : GmpLrMode::base;
    const auto r = gmp_run(cfg, data);
    const double tol = 2.0 / static_cast<double>(r.mask.total());  // two prunable layers
    CHECK(std::abs(r.mask.sparsity() - 0.8) <= tol);
    const std::size_t expected_events = 5 + (mode == nn::MaskMode::soft ? 1 : 0);
    CHECK(r.trace.prunes.size() == expected_events);
    for (std::size_t j = 1; j < r.trace.prunes.size(); ++j) {
      CHECK(r.trace.prunes[j].target_sparsity >= r.trace.prunes[j - 1].target_sparsity);
      if (mode == nn::MaskMode::hard) {
        CHECK(r.trace.prunes[j].achieved_sparsity >= r.trace.prunes[j - 1].achieved_sparsity);
      }
    }
    CHECK(r.trace.total_steps() == 12 * r.steps_per_epoch);
  }
}

TEST_CASE("a diverging run aborts with a diagnostic record") {
  auto cfg = tiny_config(PipelineKind::dense);
  cfg.schedule.kind = "constant";
  cfg.schedule.lr = 1e300;
  cfg.training.momentum = 0.0;
  try {
    train_dense(cfg, tiny_data());
    FAIL("expected DivergenceError");
  } catch (const DivergenceError& e) {
    REQUIRE_FALSE(e.trace().records.empty());
    CHECK(e.trace().records.back().event == "abort");
  }
}

TEST_CASE("a pipeline function refuses a config for another pipeline") {
  CHECK_THROWS_AS(train_dense(tiny_config(PipelineKind::one_shot), tiny_data()), ConfigError);
}

TEST_CASE("periodic records follow the eval cadence") {
  auto cfg = tiny_config(PipelineKind::dense);
  cfg.training.eval_every_epochs = 2;
  const auto r = train_dense(cfg, tiny_data());
  std::vector<std::size_t> steps;
  for (const auto& rec : r.trace.records) {
    if (rec.event == "eval") steps.push_back(rec.step);
    CHECK(rec.seed == cfg.seed);
  }
  CHECK(steps == std::vector<std::size_t>{6, 12});
  CHECK(r.trace.records.back().event == "phase_end");
}
