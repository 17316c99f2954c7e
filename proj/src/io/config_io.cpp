// Copyright 2026 The prunekit Authors
// SPDX-License-Identifier: Apache-2.0

#include "prunekit/io/config_io.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "prunekit/core/error.hpp"

namespace prunekit::io {

using nlohmann::json;
using pipeline::ExperimentConfig;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ConfigError(path + ": " + what); }

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void read(const json& j, const std::string& path, double& out) {
  if (!j.is_number()) fail(path, "expected a number");
  out = j.get<double>();
}

void read(const json& j, const std::string& path, std::size_t& out) {
  if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<std::int64_t>() < 0)) {
    fail(path, "expected a nonnegative integer");
  }
  out = j.get<std::size_t>();
}

void read(const json& j, const std::string& path, bool& out) {
  if (!j.is_boolean()) fail(path, "expected true or false");
  out = j.get<bool>();
}

void read(const json& j, const std::string& path, std::string& out) {
  if (!j.is_string()) fail(path, "expected a string");
  out = j.get<std::string>();
}

template <typename T>
void read(const json& j, const std::string& path, std::vector<T>& out) {
  if (!j.is_array()) fail(path, "expected an array");
  out.clear();
  for (std::size_t i = 0; i < j.size(); ++i) {
    T v{};
    read(j[i], path + "[" + std::to_string(i) + "]", v);
    out.push_back(std::move(v));
  }
}

template <typename T>
void read(const json& j, const std::string& path, std::optional<T>& out) {
  T v{};
  read(j, path, v);
  out = std::move(v);
}

/// Tracks which keys of an object were consumed so leftovers can be rejected.
class Object {
 public:
  Object(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (auto it = j_.find(key); it != j_.end()) read(*it, join(path_, key), out);
  }

  template <typename F>
  void with(const std::string& key, F&& f) {
    seen_.insert(key);
    if (auto it = j_.find(key); it != j_.end()) f(*it, join(path_, key));
  }

  void done() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) fail(join(path_, it.key()), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_schedule(const json& j, const std::string& path, pipeline::ScheduleConfig& sc) {
  Object o(j, path);
  o.get("kind", sc.kind);
  o.get("lr", sc.lr);
  o.get("epochs", sc.epochs);
  o.get("warmup", sc.warmup);
  o.get("milestones", sc.milestones);
  o.get("factors", sc.factors);
  o.done();
}

json schedule_json(const pipeline::ScheduleConfig& sc) {
  return json{{"kind", sc.kind},     {"lr", sc.lr},         {"epochs", sc.epochs},
              {"warmup", sc.warmup}, {"milestones", sc.milestones}, {"factors", sc.factors}};
}

void read_layer(const json& j, const std::string& path, pipeline::LayerConfig& l) {
  Object o(j, path);
  o.get("type", l.type);
  o.get("units", l.units);
  o.get("out_channels", l.out_channels);
  o.get("kernel", l.kernel);
  o.get("stride", l.stride);
  o.get("padding", l.padding);
  o.get("bias", l.bias);
  o.get("init_scale", l.init_scale);
  o.done();
}

json layer_json(const pipeline::LayerConfig& l) {
  return json{{"type", l.type},     {"units", l.units},     {"out_channels", l.out_channels},
              {"kernel", l.kernel}, {"stride", l.stride},   {"padding", l.padding},
              {"bias", l.bias},     {"init_scale", l.init_scale}};
}

void read_source(const json& j, const std::string& path, DatasetSpec& spec) {
  Object o(j, path);
  std::string type = "synthetic";
  o.get("type", type);
  if (type == "synthetic") {
    SyntheticSource s;
    std::string kind = "blobs";
    o.get("kind", kind);
    if (kind == "blobs") {
      s.kind = SyntheticKind::blobs;
    } else if (kind == "two_spirals") {
      s.kind = SyntheticKind::two_spirals;
    } else {
      fail(join(path, "kind"), "expected blobs or two_spirals, got '" + kind + "'");
    }
    o.get("n_samples", s.n_samples);
    o.get("n_classes", s.n_classes);
    o.get("n_features", s.n_features);
    o.get("noise", s.noise);
    o.get("seed", s.seed);
    spec.source = s;
  } else if (type == "idx") {
    IdxSource s;
    o.get("images", s.images);
    o.get("labels", s.labels);
    if (s.images.empty()) fail(join(path, "images"), "required for idx sources");
    if (s.labels.empty()) fail(join(path, "labels"), "required for idx sources");
    spec.source = s;
  } else if (type == "csv") {
    CsvSource s;
    o.get("path", s.path);
    o.get("label_column", s.label_column);
    if (s.path.empty()) fail(join(path, "path"), "required for csv sources");
    spec.source = s;
  } else {
    fail(join(path, "type"), "expected synthetic, idx or csv, got '" + type + "'");
  }
  o.done();
}

json source_json(const DatasetSpec& spec) {
  if (const auto* s = std::get_if<SyntheticSource>(&spec.source)) {
    return json{{"type", "synthetic"},
                {"kind", s->kind == SyntheticKind::blobs ? "blobs" : "two_spirals"},
                {"n_samples", s->n_samples},
                {"n_classes", s->n_classes},
                {"n_features", s->n_features},
                {"noise", s->noise},
                {"seed", s->seed}};
  }
  if (const auto* s = std::get_if<IdxSource>(&spec.source)) {
    return json{{"type", "idx"}, {"images", s->images}, {"labels", s->labels}};
  }
  const auto& s = std::get<CsvSource>(spec.source);
  return json{{"type", "csv"}, {"path", s.path}, {"label_column", s.label_column}};
}

const char* mask_mode_name(nn::MaskMode m) { return m == nn::MaskMode::hard ? "hard" : "soft"; }

}  // namespace

ExperimentConfig config_from_json(const json& doc) {
  ExperimentConfig cfg;
  Object root(doc, "");
  root.get("name", cfg.name);
  root.get("seed", cfg.seed);
  root.with("pipeline", [&](const json& j, const std::string& path) {
    std::string name;
    read(j, path, name);
    const auto kind = pipeline::parse_pipeline(name);
    if (!kind) fail(path, "expected dense, one_shot, iterative, bimp or gmp, got '" + name + "'");
    cfg.pipeline = *kind;
  });
  root.with("model", [&](const json& j, const std::string& path) {
    Object o(j, path);
    o.get("input_shape", cfg.model.input_shape);
    o.with("layers", [&](const json& arr, const std::string& lpath) {
      if (!arr.is_array()) fail(lpath, "expected an array");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        pipeline::LayerConfig l;
        read_layer(arr[i], lpath + "[" + std::to_string(i) + "]", l);
        cfg.model.layers.push_back(l);
      }
    });
    o.done();
  });
  root.with("data", [&](const json& j, const std::string& path) {
    Object o(j, path);
    o.with("source", [&](const json& s, const std::string& spath) { read_source(s, spath, cfg.data); });
    o.with("normalization", [&](const json& n, const std::string& npath) {
      std::string name;
      read(n, npath, name);
      if (name == "none") {
        cfg.data.normalization = Normalization::none;
      } else if (name == "per_feature_standardize") {
        cfg.data.normalization = Normalization::per_feature_standardize;
      } else {
        fail(npath, "expected none or per_feature_standardize, got '" + name + "'");
      }
    });
    o.get("train_fraction", cfg.data.train_fraction);
    o.get("split_seed", cfg.data.split_seed);
    o.done();
  });
  root.with("schedule", [&](const json& j, const std::string& path) { read_schedule(j, path, cfg.schedule); });
  root.with("retrain", [&](const json& j, const std::string& path) {
    Object o(j, path);
    o.with("scheme", [&](const json& s, const std::string& spath) {
      std::string name;
      read(s, spath, name);
      const auto scheme = schedules::parse_scheme(name);
      if (!scheme) fail(spath, "expected FT, LRW, SLR, CLR, LLR, ALLR or tuned, got '" + name + "'");
      cfg.retrain.scheme = *scheme;
    });
    o.get("epochs", cfg.retrain.epochs);
    o.get("cycles", cfg.retrain.cycles);
    o.get("lr", cfg.retrain.lr);
    o.with("tuned", [&](const json& t, const std::string& tpath) {
      pipeline::ScheduleConfig sc;
      read_schedule(t, tpath, sc);
      cfg.retrain.tuned = sc;
    });
    o.done();
  });
  root.with("pruning", [&](const json& j, const std::string& path) {
    Object o(j, path);
    o.with("criterion", [&](const json& c, const std::string& cpath) {
      std::string name;
      read(c, cpath, name);
      const auto crit = pruning::parse_criterion(name);
      if (!crit) fail(cpath, "expected global, uniform, uniform_plus, erk or lamp, got '" + name + "'");
      cfg.pruning.criterion = *crit;
    });
    o.get("sparsity", cfg.pruning.sparsity);
    o.with("gmp", [&](const json& g, const std::string& gpath) {
      auto& gc = cfg.pruning.gmp;
      Object go(g, gpath);
      go.get("initial_sparsity", gc.initial_sparsity);
      go.get("final_sparsity", gc.final_sparsity);
      go.get("start_epoch", gc.start_epoch);
      go.get("end_epoch", gc.end_epoch);
      go.get("pruning_steps", gc.pruning_steps);
      go.with("mask_mode", [&](const json& m, const std::string& mpath) {
        std::string name;
        read(m, mpath, name);
        if (name == "hard") {
          gc.mask_mode = nn::MaskMode::hard;
        } else if (name == "soft") {
          gc.mask_mode = nn::MaskMode::soft;
        } else {
          fail(mpath, "expected hard or soft, got '" + name + "'");
        }
      });
      go.with("lr_mode", [&](const json& m, const std::string& mpath) {
        std::string name;
        read(m, mpath, name);
        if (name == "base") {
          gc.lr_mode = pipeline::GmpLrMode::base;
        } else if (name == "cyclic_linear") {
          gc.lr_mode = pipeline::GmpLrMode::cyclic_linear;
        } else {
          fail(mpath, "expected base or cyclic_linear, got '" + name + "'");
        }
      });
      go.done();
    });
    o.done();
  });
  root.get("budget_epochs", cfg.budget_epochs);
  root.with("training", [&](const json& j, const std::string& path) {
    Object o(j, path);
    o.get("momentum", cfg.training.momentum);
    o.get("weight_decay", cfg.training.weight_decay);
    o.get("batch_size", cfg.training.batch_size);
    o.get("eval_every_epochs", cfg.training.eval_every_epochs);
    o.get("precision", cfg.training.precision);
    o.done();
  });
  root.done();
  pipeline::validate(cfg);
  return cfg;
}

ExperimentConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("config is not valid JSON: ") + e.what(), e.byte > 0 ? e.byte - 1 : 0);
  }
  return config_from_json(doc);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

json config_to_json(const ExperimentConfig& cfg) {
  json model{{"layers", json::array()}};
  if (cfg.model.input_shape) model["input_shape"] = *cfg.model.input_shape;
  for (const auto& l : cfg.model.layers) model["layers"].push_back(layer_json(l));

  json retrain{{"scheme", std::string(schedules::to_string(cfg.retrain.scheme))}, {"epochs", cfg.retrain.epochs}};
  if (cfg.retrain.cycles) retrain["cycles"] = *cfg.retrain.cycles;
  if (cfg.retrain.lr) retrain["lr"] = *cfg.retrain.lr;
  if (cfg.retrain.tuned) retrain["tuned"] = schedule_json(*cfg.retrain.tuned);

  const auto& g = cfg.pruning.gmp;
  json gmp{{"initial_sparsity", g.initial_sparsity},
           {"final_sparsity", g.final_sparsity},
           {"start_epoch", g.start_epoch},
           {"pruning_steps", g.pruning_steps},
           {"mask_mode", mask_mode_name(g.mask_mode)},
           {"lr_mode", g.lr_mode == pipeline::GmpLrMode::base ? "base" : "cyclic_linear"}};
  if (g.end_epoch) gmp["end_epoch"] = *g.end_epoch;
  json pruning{{"sparsity", cfg.pruning.sparsity}, {"gmp", gmp}};
  if (cfg.pruning.criterion) pruning["criterion"] = std::string(pruning::to_string(*cfg.pruning.criterion));

  json doc{{"name", cfg.name},
           {"seed", cfg.seed},
           {"pipeline", std::string(pipeline::to_string(cfg.pipeline))},
           {"model", model},
           {"data",
            {{"source", source_json(cfg.data)},
             {"normalization",
              cfg.data.normalization == Normalization::none ? "none" : "per_feature_standardize"},
             {"train_fraction", cfg.data.train_fraction},
             {"split_seed", cfg.data.split_seed}}},
           {"schedule", schedule_json(cfg.schedule)},
           {"retrain", retrain},
           {"pruning", pruning},
           {"training",
            {{"momentum", cfg.training.momentum},
             {"weight_decay", cfg.training.weight_decay},
             {"batch_size", cfg.training.batch_size},
             {"eval_every_epochs", cfg.training.eval_every_epochs},
             {"precision", cfg.training.precision}}}};
  if (cfg.budget_epochs) doc["budget_epochs"] = *cfg.budget_epochs;
  return doc;
}

std::string serialize_config(const ExperimentConfig& cfg) { return config_to_json(cfg).dump(2) + "\n"; }

std::string config_hash(const ExperimentConfig& cfg) {
  json doc = config_to_json(cfg);
  doc.erase("seed");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : doc.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace prunekit::io
