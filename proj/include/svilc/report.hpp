// Copyright 2026 The svilc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include "svilc/config.hpp"

namespace svilc {

inline constexpr const char* kToolVersion = "0.1.0";

/// First line of every output file: tool version and configuration hash.
std::string provenance_header(const RunConfig& config);

/// Output written under a temporary ".partial" name. `commit` renames it to the final
/// name; if the object is destroyed first (for example while a solver error unwinds),
/// the ".partial" file stays behind with whatever was written.
class OutputFile {
 public:
  OutputFile(const std::filesystem::path& dir, const std::string& name, const RunConfig& config);
  OutputFile(const OutputFile&) = delete;
  OutputFile& operator=(const OutputFile&) = delete;
  ~OutputFile();

  std::ostream& stream() { return out_; }
  const std::filesystem::path& path() const { return final_; }
  void commit();

 private:
  std::filesystem::path final_;
  std::filesystem::path partial_;
  std::ofstream out_;
  bool committed_ = false;
};

}  // namespace svilc
