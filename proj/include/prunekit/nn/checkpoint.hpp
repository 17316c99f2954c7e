// Copyright 2026 The prunekit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "prunekit/nn/network.hpp"

namespace prunekit::nn {

/// Everything needed to resume a run: architecture, weights, masks,
/// optimizer buffers, counters and the data-order generator state.
struct Checkpoint {
  Network network;
  std::uint64_t step = 0;
  std::uint64_t cycle = 0;
  std::string rng_state;
};

/// Binary layout (all integers little-endian u64, reals as IEEE-754 bits):
///   "PKCKPT\0" version(u64)
///   rank, input dims..., layer count, then per layer a kind tag and fields,
///   then per parameter: prunable, value[], momentum[], has_mask, mask bytes,
///   then mask mode, step, cycle, rng-state length and bytes.
void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace prunekit::nn
