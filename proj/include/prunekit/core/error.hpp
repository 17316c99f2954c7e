// Copyright 2026 The prunekit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace prunekit {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration: shapes that do not compose, bad config keys,
/// budgets that do not add up.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A caller passed an argument outside the operation's domain.
class InputError : public Error {
 public:
  using Error::Error;
};

/// An operation was invoked in the wrong order (e.g. backward before forward).
class StateError : public Error {
 public:
  using Error::Error;
};

/// Malformed file contents. Carries the byte offset where parsing failed.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// The model has no weight mass left to normalize against.
class DegenerateModelError : public Error {
 public:
  using Error::Error;
};

/// A sparsity target cannot be met under the criterion's per-layer caps.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// A metric is mathematically undefined for the given inputs.
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

}  // namespace prunekit
