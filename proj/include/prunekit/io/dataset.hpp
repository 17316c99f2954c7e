// Copyright 2026 The prunekit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "prunekit/nn/tensor.hpp"

namespace prunekit::io {

/// Labelled samples: features shaped (n, sample dims...), labels dense in
/// [0, n_classes).
struct Dataset {
  nn::Tensor features;
  std::vector<int> labels;
  std::size_t n_classes = 0;

  std::size_t size() const { return labels.size(); }
  nn::Shape sample_shape() const;
  Dataset subset(std::span<const std::size_t> indices) const;
  /// Features of the given samples stacked as one batch.
  nn::Tensor gather(std::span<const std::size_t> indices) const;
};

struct IdxSource {
  std::string images;
  std::string labels;
  friend bool operator==(const IdxSource&, const IdxSource&) = default;
};

enum class SyntheticKind { blobs, two_spirals };

struct SyntheticSource {
  SyntheticKind kind = SyntheticKind::blobs;
  std::size_t n_samples = 1000;
  std::size_t n_classes = 2;
  /// Feature dimension for blobs; spirals are always 2-D.
  std::size_t n_features = 2;
  double noise = 0.1;
  std::uint64_t seed = 0;
  friend bool operator==(const SyntheticSource&, const SyntheticSource&) = default;
};

struct CsvSource {
  std::string path;
  std::string label_column = "label";
  friend bool operator==(const CsvSource&, const CsvSource&) = default;
};

enum class Normalization { none, per_feature_standardize };

struct DatasetSpec {
  std::variant<SyntheticSource, IdxSource, CsvSource> source = SyntheticSource{};
  Normalization normalization = Normalization::none;
  double train_fraction = 0.8;
  std::uint64_t split_seed = 0;
  friend bool operator==(const DatasetSpec&, const DatasetSpec&) = default;
};

struct Split {
  Dataset train;
  Dataset eval;
};

/// Gaussian blobs with class centers spaced evenly on a circle of radius 3
/// (first two dims), scaled by `noise`.
Dataset make_blobs(const SyntheticSource& src);
/// Interleaved spiral arms, one per class, with Gaussian jitter.
Dataset make_two_spirals(const SyntheticSource& src);

/// Header row required; every column other than the label is a feature.
/// Distinct label values are mapped to 0..k-1 in ascending order.
Dataset load_csv(const std::string& path, const std::string& label_column);

/// Loads, splits (disjoint and exhaustive) and normalizes with statistics
/// from the training part.
Split load_dataset(const DatasetSpec& spec);

/// Shuffles with `seed` and puts the first round(fraction * n) into train.
Split split_dataset(const Dataset& data, double train_fraction, std::uint64_t seed);

void standardize(Split& split);

}  // namespace prunekit::io
