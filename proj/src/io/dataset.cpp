// Copyright 2026 The prunekit Authors
// SPDX-License-Identifier: Apache-2.0

#include "prunekit/io/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>

#include "prunekit/core/error.hpp"
#include "prunekit/core/rng.hpp"
#include "prunekit/io/idx.hpp"

namespace prunekit::io {

nn::Shape Dataset::sample_shape() const {
  return nn::Shape(features.shape().begin() + 1, features.shape().end());
}

nn::Tensor Dataset::gather(std::span<const std::size_t> indices) const {
  const std::size_t stride = size() ? features.size() / size() : 0;
  nn::Shape shape = features.shape();
  shape[0] = indices.size();
  nn::Tensor out(shape);
  for (std::size_t j = 0; j < indices.size(); ++j) {
    std::copy_n(features.data() + indices[j] * stride, stride, out.data() + j * stride);
  }
  return out;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.features = gather(indices);
  out.n_classes = n_classes;
  out.labels.reserve(indices.size());
  for (auto i : indices) out.labels.push_back(labels[i]);
  return out;
}

Dataset make_blobs(const SyntheticSource& src) {
  if (src.n_samples == 0 || src.n_classes < 2 || src.n_features == 0) {
    throw ConfigError("blobs need samples, >= 2 classes and >= 1 feature");
  }
  Rng rng(src.seed);
  Dataset d;
  d.n_classes = src.n_classes;
  d.features = nn::Tensor({src.n_samples, src.n_features});
  for (std::size_t i = 0; i < src.n_samples; ++i) {
    const std::size_t k = i % src.n_classes;
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(src.n_classes);
    double* row = d.features.data() + i * src.n_features;
    for (std::size_t f = 0; f < src.n_features; ++f) {
      double center = 0;
      if (f == 0) center = 3.0 * std::cos(angle);
      if (f == 1) center = 3.0 * std::sin(angle);
      row[f] = center + src.noise * rng.normal();
    }
    d.labels.push_back(static_cast<int>(k));
  }
  return d;
}

Dataset make_two_spirals(const SyntheticSource& src) {
  if (src.n_samples == 0 || src.n_classes < 2) throw ConfigError("spirals need samples and >= 2 classes");
  constexpr double turns = 1.5;
  Rng rng(src.seed);
  Dataset d;
  d.n_classes = src.n_classes;
  d.features = nn::Tensor({src.n_samples, 2});
  for (std::size_t i = 0; i < src.n_samples; ++i) {
    const std::size_t k = i % src.n_classes;
    const double r = std::sqrt(rng.uniform());
    const double theta = r * turns * 2.0 * std::numbers::pi +
                         2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(src.n_classes);
    d.features[2 * i] = r * std::cos(theta) + src.noise * rng.normal();
    d.features[2 * i + 1] = r * std::sin(theta) + src.noise * rng.normal();
    d.labels.push_back(static_cast<int>(k));
  }
  return d;
}

Dataset load_csv(const std::string& path, const std::string& label_column) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open CSV file " + path);
  auto split_line = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
  };
  std::string line;
  if (!std::getline(in, line)) throw FormatError("CSV file " + path + " is empty", 0);
  std::size_t offset = line.size() + 1;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_line(line);
  const auto it = std::find(header.begin(), header.end(), label_column);
  if (it == header.end()) throw ConfigError("CSV file " + path + " has no column '" + label_column + "'");
  const std::size_t label_at = static_cast<std::size_t>(it - header.begin());
  const std::size_t n_features = header.size() - 1;

  std::vector<double> values;
  std::vector<double> raw_labels;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    const std::size_t raw_length = line.size() + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      offset += raw_length;
      continue;
    }
    const auto cells = split_line(line);
    if (cells.size() != header.size()) {
      throw FormatError("CSV row " + std::to_string(row) + " has " + std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(header.size()),
                        offset);
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v;
      try {
        std::size_t used = 0;
        v = std::stod(cells[c], &used);
        if (used != cells[c].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw FormatError("CSV row " + std::to_string(row) + ": '" + cells[c] + "' is not a number", offset);
      }
      if (c == label_at) {
        raw_labels.push_back(v);
      } else {
        values.push_back(v);
      }
    }
    offset += raw_length;
  }
  if (raw_labels.empty()) throw FormatError("CSV file " + path + " has no data rows", offset);
  std::map<double, int> classes;
  for (double v : raw_labels) classes.emplace(v, 0);
  int next = 0;
  for (auto& [v, id] : classes) id = next++;
  Dataset d;
  d.n_classes = classes.size();
  d.features = nn::Tensor({raw_labels.size(), n_features}, std::move(values));
  for (double v : raw_labels) d.labels.push_back(classes.at(v));
  return d;
}

Split split_dataset(const Dataset& data, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train fraction must be in (0, 1), got " + std::to_string(train_fraction));
  }
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed, 0x5e11);
  rng.shuffle(std::span<std::size_t>(order));
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(data.size())));
  if (n_train == 0 || n_train == data.size()) throw ConfigError("dataset too small for the requested split");
  const std::span<const std::size_t> all(order);
  return Split{data.subset(all.first(n_train)), data.subset(all.subspan(n_train))};
}

void standardize(Split& split) {
  const std::size_t n = split.train.size();
  const std::size_t stride = split.train.features.size() / n;
  std::vector<double> mean(stride, 0.0), sd(stride, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < stride; ++f) mean[f] += split.train.features[i * stride + f];
  }
  for (auto& m : mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < stride; ++f) {
      const double dv = split.train.features[i * stride + f] - mean[f];
      sd[f] += dv * dv;
    }
  }
  for (auto& s : sd) {
    s = std::sqrt(s / static_cast<double>(n));
    if (s == 0.0) s = 1.0;
  }
  for (Dataset* d : {&split.train, &split.eval}) {
    for (std::size_t i = 0; i < d->size(); ++i) {
      for (std::size_t f = 0; f < stride; ++f) {
        auto& v = d->features[i * stride + f];
        v = (v - mean[f]) / sd[f];
      }
    }
  }
}

Split load_dataset(const DatasetSpec& spec) {
  Dataset data;
  if (const auto* s = std::get_if<SyntheticSource>(&spec.source)) {
    data = s->kind == SyntheticKind::blobs ? make_blobs(*s) : make_two_spirals(*s);
  } else if (const auto* idx = std::get_if<IdxSource>(&spec.source)) {
    data = load_idx(idx->images, idx->labels);
  } else {
    const auto& csv = std::get<CsvSource>(spec.source);
    data = load_csv(csv.path, csv.label_column);
  }
  Split split = split_dataset(data, spec.train_fraction, spec.split_seed);
  if (spec.normalization == Normalization::per_feature_standardize) standardize(split);
  return split;
}

}  // namespace prunekit::io
