#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "streamad/tensor.hpp"

namespace streamad {

/// IDX container: magic [0,0,type,rank], big-endian u32 extents, raw payload.
/// Only element type 0x08 (unsigned byte) is handled.
struct IdxData {
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> payload;
};

IdxData load_idx_raw(const std::string& path);

/// Rank-3 image file -> one [1,1,H,W] tensor per image, intensities mapped
/// from [0,255] to [-1,1].
std::vector<Tensor> load_idx_images(const std::string& path);

/// Rank-1 file -> integer label vector.
std::vector<int> load_idx_labels(const std::string& path);

void write_idx(const std::string& path, const std::vector<std::uint32_t>& dims,
               const std::vector<std::uint8_t>& payload);

}  // namespace streamad
