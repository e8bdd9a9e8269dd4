#pragma once

#include <cstdint>
#include <vector>

#include "streamad/mixer.hpp"
#include "streamad/sample.hpp"

namespace streamad {

/// Procedural stand-in dataset: textured rectangles translating over a
/// textured static background. Normal sprites move +v horizontally; anomalies
/// move at 3v or orthogonally at v.
enum class SpriteKind { kNormal, kFastSpeed, kWrongDirection };

struct SpriteConfig {
  int height = 64;
  int width = 96;
  int frames_normal = 21;
  int frames_fast = 9;        // 3v travel; shorter so sprites stay in frame
  int frames_direction = 13;
  int velocity = 2;           // px/frame
  int speed_factor = 3;
  int min_size = 10;
  int max_size = 20;
  int texture_cell = 4;       // correlation length of sprite/background texture
};

LabeledClip make_sprite_clip(const SpriteConfig& cfg, SpriteKind kind, int clip_id, Rng& rng);

struct SpriteDataset {
  std::vector<LabeledClip> train;      // all normal
  std::vector<LabeledClip> test;       // normal + one anomaly kind
};

SpriteDataset make_sprite_dataset(const SpriteConfig& cfg, int train_clips, int test_normal,
                                  int test_anomalous, SpriteKind anomaly_kind, std::uint64_t seed);

/// Exhaustive block-matching flow estimate; the brute-force reference scorer
/// for the sprite benchmark. Independent of the tensor engine.
struct FlowBaseline {
  double dx = 0.0;  // mean displacement of moving blocks over normal data
  double dy = 0.0;
  int block = 8;
  int radius = 8;
  double motion_threshold = 0.05;  // mean |diff| marking a block as moving
};

FlowBaseline fit_flow_baseline(const std::vector<LabeledClip>& train_clips);
/// Mean squared deviation of per-block displacements from the fitted normal
/// motion, over moving blocks (0 when nothing moves).
double flow_baseline_score(const FramePair& pair, const FlowBaseline& baseline);

}  // namespace streamad
