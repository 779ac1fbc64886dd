#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "floordiff/optimizer.hpp"
#include "floordiff/params.hpp"

namespace floordiff::num {

// Binary checkpoint: versioned magic, string metadata, named parameters
// (name, shape, raw little-endian float64), and optionally the optimizer
// state in parameter order. Save/load/save round-trips byte-identically.
struct Checkpoint {
  std::map<std::string, std::string> metadata;
  ParamStore params;
  std::optional<OptimizerState> optimizer;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace floordiff::num
