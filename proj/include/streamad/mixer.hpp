#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "streamad/rng.hpp"
#include "streamad/sample.hpp"

namespace streamad {

/// A labeled frame sequence; pairs are never formed across clip boundaries.
struct LabeledClip {
  int clip_id = 0;
  std::vector<Tensor> frames;
  std::vector<int> labels;  // one per frame, 0 normal / 1 anomalous
};

/// Disjoint normal/anomalous sample pools consumed without replacement.
struct SamplePool {
  std::vector<StreamSample> normal;
  std::vector<StreamSample> anomalous;
};

struct MixConfig {
  double s = 0.0;          // required anomaly portion, in [0,1]
  std::uint64_t seed = 1;
  long total = 0;          // requested stream length; <=0 draws until both pools exhaust
};

/// Consecutive-frame pairs; a pair is anomalous iff its current frame is.
/// Every frame must carry a label.
SamplePool partition(const std::vector<LabeledClip>& clips);

/// Pool of single images (prev aliases curr); used by image-per-sample
/// scorers such as the autoencoder.
SamplePool make_image_pool(const std::vector<Tensor>& images, const std::vector<int>& labels);

/// Interleaves the two pools: each draw takes an anomalous sample with
/// probability s, falling back to the other pool when the chosen one is
/// exhausted (the first such event is flagged). Pools are consumed in a
/// seed-shuffled order, without replacement.
class StreamMixer {
 public:
  StreamMixer(const SamplePool& pool, const MixConfig& cfg);

  std::optional<StreamSample> next();
  long emitted() const { return emitted_; }
  long crossover_index() const { return crossover_; }  // -1 if never fell back

 private:
  const SamplePool& pool_;
  MixConfig cfg_;
  Rng rng_;
  std::vector<int> normal_order_;
  std::vector<int> anomalous_order_;
  std::size_t normal_next_ = 0;
  std::size_t anomalous_next_ = 0;
  long emitted_ = 0;
  long crossover_ = -1;
};

struct MixedStream {
  std::vector<StreamSample> samples;
  long crossover_index = -1;
  bool exhausted_early = false;  // pools ran out before cfg.total
};

/// Deterministic given (pool, cfg). Emits exactly cfg.total samples or ends
/// early with the exhausted flag set.
MixedStream build_stream(const SamplePool& pool, const MixConfig& cfg);

/// Splits clips into maximal same-label runs, so each run is a coherent
/// normal or anomalous unit.
std::vector<LabeledClip> segment_label_runs(const std::vector<LabeledClip>& clips);

/// Clip-granularity mixing: each draw takes a whole unexhausted same-label
/// run (anomalous with probability s) and emits its pairs in order.
MixedStream build_clip_stream(const std::vector<LabeledClip>& clips, const MixConfig& cfg);

/// Stream length at which neither pool is expected to exhaust at portion s.
long balanced_stream_length(long normal_count, long anomalous_count, double s);

}  // namespace streamad
