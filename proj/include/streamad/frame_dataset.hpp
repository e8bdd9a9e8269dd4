#pragma once

#include <string>
#include <vector>

#include "streamad/mixer.hpp"

namespace streamad {

struct FrameDatasetConfig {
  int height = 128;
  int width = 192;
};

struct FrameDataset {
  std::vector<LabeledClip> clips;
  std::vector<std::string> clip_names;  // parallel to clips
  int height = 0;
  int width = 0;
};

/// Layout: root/<clip>/<frame>.{pgm|png|bmp}, frames in lexicographic order.
/// The label file lists anomalous frame ranges, one per line:
///   <clip-dir-name> <first-frame> <last-frame>     (inclusive, 0-based)
/// Clips without ranges are all-normal; an empty label path means no
/// anomalies anywhere. Frames are grayscaled, resized and scaled to [-1,1].
FrameDataset load_frame_dataset(const std::string& root, const std::string& label_file,
                                const FrameDatasetConfig& cfg = {});

}  // namespace streamad
