// Copyright 2026 The prunekit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"
#include "prunekit/pipeline/config.hpp"

namespace prunekit::io {

/// JSON experiment configs. Every key is optional except `model.layers`;
/// unknown keys are rejected. Errors are ConfigErrors prefixed with the
/// dotted path of the offending key.
pipeline::ExperimentConfig parse_config(std::string_view text);
pipeline::ExperimentConfig config_from_json(const nlohmann::json& doc);
pipeline::ExperimentConfig load_config(const std::filesystem::path& path);

/// Full form with every default spelled out; parse_config inverts it.
nlohmann::json config_to_json(const pipeline::ExperimentConfig& cfg);
std::string serialize_config(const pipeline::ExperimentConfig& cfg);

/// FNV-1a-64 of the canonical JSON without the seed, as 16 hex digits.
/// Runs of one configuration under different seeds share a hash.
std::string config_hash(const pipeline::ExperimentConfig& cfg);

}  // namespace prunekit::io
