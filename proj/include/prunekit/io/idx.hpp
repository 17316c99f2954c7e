// Copyright 2026 The prunekit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "prunekit/io/dataset.hpp"

namespace prunekit::io {

/// Decoded IDX file: element type code and dims from the header, values
/// converted to double.
struct IdxArray {
  std::uint8_t type_code = 0x08;
  std::vector<std::size_t> dims;
  std::vector<double> values;
};

/// Parses the IDX container: magic (0x00, 0x00, type, ndim), ndim
/// big-endian u32 dims, then the payload. Throws FormatError with the byte
/// offset on a bad magic, unknown type, zero dim, or a payload whose length
/// differs from the dims.
IdxArray parse_idx(const std::vector<std::uint8_t>& bytes);
IdxArray read_idx(const std::string& path);

/// Image/label pair in unsigned-byte IDX format. Images (n, h, w) become
/// (n, 1, h, w) scaled to [0, 1]; (n, c, h, w) and (n, d) keep their shape.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);
Dataset idx_to_dataset(const IdxArray& images, const IdxArray& labels);

}  // namespace prunekit::io
