#include <cmath>
#include <set>

#include "doctest.h"
#include "streamad/errors.hpp"
#include "streamad/mixer.hpp"

using namespace streamad;

namespace {

LabeledClip make_clip(int id, const std::vector<int>& labels) {
  LabeledClip clip;
  clip.clip_id = id;
  for (std::size_t f = 0; f < labels.size(); ++f) {
    Tensor frame = Tensor::full({1, 1, 2, 2}, static_cast<double>(id) + 0.01 * f);
    clip.frames.push_back(frame);
    clip.labels.push_back(labels[f]);
  }
  return clip;
}

SamplePool numbered_pool(int normals, int anomalies) {
  std::vector<Tensor> images;
  std::vector<int> labels;
  for (int i = 0; i < normals + anomalies; ++i) {
    images.push_back(Tensor::full({1}, i));
    labels.push_back(i < normals ? 0 : 1);
  }
  return make_image_pool(images, labels);
}

}  // namespace

TEST_SUITE_BEGIN("mixer");

TEST_CASE("partition: an all-normal clip of n frames yields n-1 normal pairs") {
  const SamplePool pool = partition({make_clip(0, std::vector<int>(7, 0))});
  CHECK(pool.normal.size() == 6);
  CHECK(pool.anomalous.empty());
}

TEST_CASE("partition: pairs never span clip boundaries") {
  const SamplePool pool =
      partition({make_clip(0, std::vector<int>(5, 0)), make_clip(1, std::vector<int>(9, 0))});
  CHECK(pool.normal.size() == 4 + 8);
  for (const StreamSample& s : pool.normal) {
    CHECK(s.frame >= 1);  // a pair's curr is never frame 0 of its clip
  }
}

TEST_CASE("partition: pair label follows the current frame") {
  const SamplePool pool = partition({make_clip(3, {0, 0, 1, 1, 0})});
  // curr labels of the 4 pairs: 0, 1, 1, 0
  CHECK(pool.normal.size() == 2);
  CHECK(pool.anomalous.size() == 2);
}

TEST_CASE("partition: label/frame count mismatch is an input error") {
  LabeledClip bad = make_clip(0, {0, 0, 0});
  bad.labels.pop_back();
  CHECK_THROWS_AS(partition({bad}), InputError);
  LabeledClip bad2 = make_clip(0, {0, 2, 0});
  CHECK_THROWS_AS(partition({bad2}), InputError);
}

TEST_CASE("s=0 emits only normal samples, s=1 only anomalous") {
  const SamplePool pool = numbered_pool(50, 50);
  MixConfig cfg;
  cfg.seed = 4;
  cfg.total = 50;
  cfg.s = 0.0;
  for (const StreamSample& s : build_stream(pool, cfg).samples) CHECK(s.label == 0);
  cfg.s = 1.0;
  for (const StreamSample& s : build_stream(pool, cfg).samples) CHECK(s.label == 1);
}

TEST_CASE("empirical anomaly fraction concentrates around s") {
  const SamplePool pool = numbered_pool(9000, 4000);
  MixConfig cfg;
  cfg.s = 0.25;
  cfg.seed = 12;
  cfg.total = 10000;
  const MixedStream stream = build_stream(pool, cfg);
  REQUIRE(stream.samples.size() == 10000);
  long anom = 0;
  for (const StreamSample& s : stream.samples) anom += s.label;
  const double fraction = static_cast<double>(anom) / 10000.0;
  CHECK(std::fabs(fraction - 0.25) < 0.02);
  CHECK(stream.crossover_index == -1);
}

TEST_CASE("same seed gives byte-identical streams; no index is emitted twice") {
  const SamplePool pool = numbered_pool(300, 200);
  MixConfig cfg;
  cfg.s = 0.4;
  cfg.seed = 77;
  cfg.total = 450;
  const MixedStream a = build_stream(pool, cfg);
  const MixedStream b = build_stream(pool, cfg);
  REQUIRE(a.samples.size() == b.samples.size());
  std::set<std::pair<int, int>> seen;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    CHECK(a.samples[i].frame == b.samples[i].frame);
    CHECK(a.samples[i].label == b.samples[i].label);
    const bool fresh = seen.insert({a.samples[i].label, a.samples[i].frame}).second;
    CHECK(fresh);
  }
}

TEST_CASE("different seeds give different streams") {
  const SamplePool pool = numbered_pool(300, 200);
  MixConfig a_cfg{0.4, 1, 100};
  MixConfig b_cfg{0.4, 2, 100};
  const MixedStream a = build_stream(pool, a_cfg);
  const MixedStream b = build_stream(pool, b_cfg);
  bool differs = false;
  for (std::size_t i = 0; i < a.samples.size() && !differs; ++i) {
    differs = a.samples[i].frame != b.samples[i].frame;
  }
  CHECK(differs);
}

TEST_CASE("pool exhaustion falls back to the other pool and flags the crossover") {
  const SamplePool pool = numbered_pool(10, 200);
  MixConfig cfg;
  cfg.s = 0.5;  // normal pool dies quickly
  cfg.seed = 5;
  cfg.total = 100;
  const MixedStream stream = build_stream(pool, cfg);
  CHECK(stream.samples.size() == 100);
  CHECK(stream.crossover_index >= 0);
  long tail_normals = 0;
  for (std::size_t i = static_cast<std::size_t>(stream.crossover_index); i < stream.samples.size(); ++i) {
    tail_normals += stream.samples[i].label == 0 ? 1 : 0;
  }
  // after the normal pool is gone, only anomalous samples remain
  long normals = 0;
  for (const StreamSample& s : stream.samples) normals += s.label == 0 ? 1 : 0;
  CHECK(normals == 10);
}

TEST_CASE("both pools exhausted ends the stream early") {
  const SamplePool pool = numbered_pool(5, 5);
  MixConfig cfg;
  cfg.s = 0.5;
  cfg.seed = 3;
  cfg.total = 50;
  const MixedStream stream = build_stream(pool, cfg);
  CHECK(stream.samples.size() == 10);
  CHECK(stream.exhausted_early);
}

TEST_CASE("balanced stream length avoids exhaustion at the requested portion") {
  CHECK(balanced_stream_length(100, 100, 0.0) == 100);
  CHECK(balanced_stream_length(100, 100, 1.0) == 100);
  CHECK(balanced_stream_length(5923, 6742, 0.25) == 7897);
  for (double s : {0.05, 0.25, 0.5, 0.9}) {
    const long n = balanced_stream_length(3000, 2000, s);
    const SamplePool pool = numbered_pool(3000, 2000);
    MixConfig cfg;
    cfg.s = s;
    cfg.seed = 9;
    cfg.total = n;
    const MixedStream stream = build_stream(pool, cfg);
    CHECK(static_cast<long>(stream.samples.size()) == n);
  }
}

TEST_CASE("invalid portion is a configuration error") {
  const SamplePool pool = numbered_pool(5, 5);
  MixConfig cfg;
  cfg.s = 1.5;
  CHECK_THROWS_AS(StreamMixer(pool, cfg), ConfigError);
}

TEST_CASE("segment_label_runs splits clips at label changes") {
  const auto runs = segment_label_runs({make_clip(0, {0, 0, 1, 1, 1, 0})});
  REQUIRE(runs.size() == 3);
  CHECK(runs[0].frames.size() == 2);
  CHECK(runs[0].labels.front() == 0);
  CHECK(runs[1].frames.size() == 3);
  CHECK(runs[1].labels.front() == 1);
  CHECK(runs[2].frames.size() == 1);
}

TEST_CASE("clip-granularity mixing keeps same-label runs contiguous") {
  std::vector<LabeledClip> clips;
  for (int c = 0; c < 8; ++c) clips.push_back(make_clip(c, std::vector<int>(6, 0)));
  for (int c = 8; c < 14; ++c) clips.push_back(make_clip(c, std::vector<int>(5, 1)));
  MixConfig cfg;
  cfg.s = 0.4;
  cfg.seed = 6;
  cfg.total = 0;
  const MixedStream stream = build_clip_stream(clips, cfg);
  CHECK(stream.samples.size() == 8 * 5 + 6 * 4);
  // within a clip's run, frames advance by one; labels are uniform per run
  for (std::size_t i = 1; i < stream.samples.size(); ++i) {
    if (stream.samples[i].clip == stream.samples[i - 1].clip &&
        stream.samples[i].frame == stream.samples[i - 1].frame + 1) {
      CHECK(stream.samples[i].label == stream.samples[i - 1].label);
    }
  }
  // deterministic
  const MixedStream again = build_clip_stream(clips, cfg);
  REQUIRE(again.samples.size() == stream.samples.size());
  for (std::size_t i = 0; i < stream.samples.size(); ++i) {
    CHECK(again.samples[i].clip == stream.samples[i].clip);
    CHECK(again.samples[i].frame == stream.samples[i].frame);
  }
  // s=1 emits only anomalous runs until they exhaust
  cfg.s = 1.0;
  cfg.total = 20;
  for (const StreamSample& s : build_clip_stream(clips, cfg).samples) CHECK(s.label == 1);
}

TEST_SUITE_END();
