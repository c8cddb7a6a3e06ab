// Copyright 2026 The svilc Authors
// SPDX-License-Identifier: Apache-2.0

#include "svilc/report.hpp"

#include "svilc/errors.hpp"

namespace svilc {

std::string provenance_header(const RunConfig& config) {
  return std::string("# svilc ") + kToolVersion + " config " + hash_hex(config_hash(config)) + "\n";
}

OutputFile::OutputFile(const std::filesystem::path& dir, const std::string& name, const RunConfig& config)
    : final_(dir / name), partial_(dir / (name + ".partial")) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  out_.open(partial_, std::ios::binary | std::ios::trunc);
  if (!out_) throw ValidationError("output_dir: cannot write " + partial_.string());
  out_ << provenance_header(config);
}

OutputFile::~OutputFile() {
  if (!committed_ && out_.is_open()) out_.close();
}

void OutputFile::commit() {
  out_.close();
  if (!out_) throw SolverError("write failed for " + final_.string());
  std::filesystem::rename(partial_, final_);
  committed_ = true;
}

}  // namespace svilc
