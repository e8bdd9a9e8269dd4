#pragma once

#include <cstdint>
#include <string>

namespace streamad {

/// Procedural stand-in for a handwritten 0/1 digit set: class 0 renders as a
/// jittered ellipse ring (high shape variety), class 1 as a near-vertical
/// stroke (deliberately low variety). Emits standard IDX image/label files,
/// so the same pipeline runs unchanged on real digit data when available.
struct DigitSetConfig {
  int zeros = 6000;
  int ones = 6800;
  int size = 28;
  std::uint64_t seed = 5;
};

void generate_digit_idx(const std::string& images_path, const std::string& labels_path,
                        const DigitSetConfig& cfg);

}  // namespace streamad
