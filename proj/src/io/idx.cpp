// Copyright 2026 The prunekit Authors
// SPDX-License-Identifier: Apache-2.0

#include "prunekit/io/idx.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "prunekit/core/error.hpp"

namespace prunekit::io {

namespace {

std::size_t element_size(std::uint8_t code) {
  switch (code) {
    case 0x08:
    case 0x09: return 1;
    case 0x0B: return 2;
    case 0x0C:
    case 0x0D: return 4;
    case 0x0E: return 8;
    default: return 0;
  }
}

std::uint64_t read_be(const std::uint8_t* p, std::size_t n) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < n; ++i) v = (v << 8) | p[i];
  return v;
}

double decode(std::uint8_t code, const std::uint8_t* p) {
  switch (code) {
    case 0x08: return p[0];
    case 0x09: return static_cast<std::int8_t>(p[0]);
    case 0x0B: return static_cast<std::int16_t>(read_be(p, 2));
    case 0x0C: return static_cast<std::int32_t>(read_be(p, 4));
    case 0x0D: return std::bit_cast<float>(static_cast<std::uint32_t>(read_be(p, 4)));
    default: return std::bit_cast<double>(read_be(p, 8));
  }
}

}  // namespace

IdxArray parse_idx(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4) throw FormatError("IDX file shorter than its magic number", bytes.size());
  if (bytes[0] != 0 || bytes[1] != 0) throw FormatError("bad IDX magic", bytes[0] != 0 ? 0 : 1);
  IdxArray out;
  out.type_code = bytes[2];
  const std::size_t elem = element_size(out.type_code);
  if (elem == 0) throw FormatError("unknown IDX element type", 2);
  const std::size_t ndim = bytes[3];
  if (ndim == 0) throw FormatError("IDX file declares zero dimensions", 3);
  const std::size_t header = 4 + 4 * ndim;
  if (bytes.size() < header) throw FormatError("IDX header truncated", bytes.size());
  std::size_t count = 1;
  for (std::size_t i = 0; i < ndim; ++i) {
    const std::size_t d = read_be(&bytes[4 + 4 * i], 4);
    if (d == 0) throw FormatError("IDX dimension " + std::to_string(i) + " is zero", 4 + 4 * i);
    if (count > (std::size_t{1} << 40) / d) throw FormatError("IDX dimensions overflow", 4 + 4 * i);
    count *= d;
    out.dims.push_back(d);
  }
  const std::size_t payload = bytes.size() - header;
  if (payload != count * elem) {
    throw FormatError("IDX payload holds " + std::to_string(payload) + " bytes but dims require " +
                          std::to_string(count * elem),
                      std::min(bytes.size(), header + count * elem));
  }
  out.values.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.values.push_back(decode(out.type_code, &bytes[header + i * elem]));
  return out;
}

IdxArray read_idx(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open IDX file " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_idx(bytes);
}

Dataset idx_to_dataset(const IdxArray& images, const IdxArray& labels) {
  if (images.type_code != 0x08) throw FormatError("IDX images must be unsigned bytes", 2);
  if (labels.type_code != 0x08) throw FormatError("IDX labels must be unsigned bytes", 2);
  if (labels.dims.size() != 1) throw FormatError("IDX label file must be one-dimensional", 3);
  if (images.dims.size() < 2 || images.dims.size() > 4) {
    throw FormatError("IDX images must have 2 to 4 dimensions", 3);
  }
  if (images.dims[0] != labels.dims[0]) {
    throw FormatError("IDX image count " + std::to_string(images.dims[0]) + " differs from label count " +
                          std::to_string(labels.dims[0]),
                      4);
  }
  nn::Shape shape(images.dims.begin(), images.dims.end());
  if (shape.size() == 3) shape.insert(shape.begin() + 1, 1);
  Dataset d;
  std::vector<double> values = images.values;
  for (auto& v : values) v /= 255.0;
  d.features = nn::Tensor(shape, std::move(values));
  int max_label = 0;
  for (double v : labels.values) {
    d.labels.push_back(static_cast<int>(v));
    max_label = std::max(max_label, static_cast<int>(v));
  }
  d.n_classes = static_cast<std::size_t>(max_label) + 1;
  return d;
}

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
  return idx_to_dataset(read_idx(images_path), read_idx(labels_path));
}

}  // namespace prunekit::io
