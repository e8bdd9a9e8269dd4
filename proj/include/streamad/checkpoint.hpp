#pragma once

#include <string>
#include <utility>
#include <vector>

#include "streamad/tensor.hpp"

namespace streamad {

/// Versioned binary container: magic "CADM", format version u32, then named
/// parameter blobs with shape headers; all integers and the 32-bit float
/// payload are little-endian. Save -> load -> save is byte-identical.
void save_checkpoint(const std::string& path,
                     const std::vector<std::pair<std::string, Tensor>>& params);

std::vector<std::pair<std::string, Tensor>> load_checkpoint(const std::string& path);

}  // namespace streamad
