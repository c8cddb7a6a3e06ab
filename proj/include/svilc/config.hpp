// Copyright 2026 The svilc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "svilc/qubit_system.hpp"

namespace svilc {

/// Everything a run needs. Files are JSON with // comments allowed; a "preset" key loads a
/// preset first and the rest of the file is applied on top as a merge patch.
struct RunConfig {
  std::string preset;  // empty for a fully custom layout
  QubitLayout layout;
  std::optional<int> n_electrons;           // overrides the hole-count filling rule
  std::map<std::string, double> operating_point;  // feed values for chi / spectrum / dipoles
  std::vector<SweepSpec> sweeps;
  std::string output_dir = "svilc-out";
  std::uint64_t seed = 1;
  int threads = 1;

  /// Feed values in layout order for the operating point.
  Eigen::VectorXd operating_feeds() const;
  const SweepSpec& sweep(const std::string& name) const;
};

/// Layout with the electron count fixed for the built lattice.
QubitLayout resolved_layout(const RunConfig& config, const BondGraph& graph);

/// Preset configuration including its default sweeps.
RunConfig preset_config(const std::string& name);

/// Parses and validates. Errors are ValidationError naming the offending field, or the line
/// and column for malformed text.
RunConfig parse_config(const std::string& text);
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

nlohmann::json to_json(const RunConfig& config);
std::string serialize_config(const RunConfig& config);

/// FNV-1a (64 bit) of the canonical serialization, leaving out threads and output_dir.
std::uint64_t config_hash(const RunConfig& config);
std::string hash_hex(std::uint64_t h);

bool operator==(const RunConfig& a, const RunConfig& b);

/// Cross-field checks: coordinates against lattice bounds, sweeps against declared feeds.
void validate_config(const RunConfig& config);

}  // namespace svilc
