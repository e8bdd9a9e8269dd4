#include "streamad/mixer.hpp"

#include <algorithm>
#include <cmath>

#include "streamad/errors.hpp"

namespace streamad {

SamplePool partition(const std::vector<LabeledClip>& clips) {
  SamplePool pool;
  for (const auto& clip : clips) {
    if (clip.labels.size() != clip.frames.size()) {
      throw InputError("clip " + std::to_string(clip.clip_id) + ": " +
                       std::to_string(clip.labels.size()) + " labels for " +
                       std::to_string(clip.frames.size()) + " frames");
    }
    for (int l : clip.labels) {
      if (l != 0 && l != 1) {
        throw InputError("clip " + std::to_string(clip.clip_id) + ": frame label must be 0 or 1");
      }
    }
    for (std::size_t i = 1; i < clip.frames.size(); ++i) {
      StreamSample s;
      s.pair = FramePair{clip.frames[i - 1], clip.frames[i]};
      s.label = clip.labels[i];
      s.clip = clip.clip_id;
      s.frame = static_cast<int>(i);
      (s.label ? pool.anomalous : pool.normal).push_back(std::move(s));
    }
  }
  return pool;
}

SamplePool make_image_pool(const std::vector<Tensor>& images, const std::vector<int>& labels) {
  if (images.size() != labels.size()) {
    throw InputError("image pool: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(images.size()) + " images");
  }
  SamplePool pool;
  for (std::size_t i = 0; i < images.size(); ++i) {
    StreamSample s;
    s.pair = FramePair{images[i], images[i]};
    s.label = labels[i];
    s.clip = 0;
    s.frame = static_cast<int>(i);
    (s.label ? pool.anomalous : pool.normal).push_back(std::move(s));
  }
  return pool;
}

namespace {

std::vector<int> shuffled_indices(std::size_t n, Rng& rng) {
  std::vector<int> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<int>(i);
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

}  // namespace

StreamMixer::StreamMixer(const SamplePool& pool, const MixConfig& cfg)
    : pool_(pool), cfg_(cfg), rng_(make_rng(cfg.seed, 101)) {
  if (cfg_.s < 0.0 || cfg_.s > 1.0) {
    throw ConfigError("anomaly portion must lie in [0,1], got " + std::to_string(cfg_.s));
  }
  normal_order_ = shuffled_indices(pool_.normal.size(), rng_);
  anomalous_order_ = shuffled_indices(pool_.anomalous.size(), rng_);
}

std::optional<StreamSample> StreamMixer::next() {
  const bool normal_left = normal_next_ < normal_order_.size();
  const bool anomalous_left = anomalous_next_ < anomalous_order_.size();
  if (!normal_left && !anomalous_left) return std::nullopt;

  const double r = uniform01(rng_);
  bool take_anomalous = r < cfg_.s;
  if (take_anomalous && !anomalous_left) {
    take_anomalous = false;
    if (crossover_ < 0) crossover_ = emitted_;
  } else if (!take_anomalous && !normal_left) {
    take_anomalous = true;
    if (crossover_ < 0) crossover_ = emitted_;
  }
  ++emitted_;
  if (take_anomalous) return pool_.anomalous[anomalous_order_[anomalous_next_++]];
  return pool_.normal[normal_order_[normal_next_++]];
}

MixedStream build_stream(const SamplePool& pool, const MixConfig& cfg) {
  MixedStream out;
  StreamMixer mixer(pool, cfg);
  const long want = cfg.total > 0
                        ? cfg.total
                        : static_cast<long>(pool.normal.size() + pool.anomalous.size());
  out.samples.reserve(static_cast<std::size_t>(want));
  for (long i = 0; i < want; ++i) {
    auto s = mixer.next();
    if (!s) {
      out.exhausted_early = true;
      break;
    }
    out.samples.push_back(std::move(*s));
  }
  out.crossover_index = mixer.crossover_index();
  return out;
}

std::vector<LabeledClip> segment_label_runs(const std::vector<LabeledClip>& clips) {
  std::vector<LabeledClip> runs;
  for (const LabeledClip& clip : clips) {
    if (clip.labels.size() != clip.frames.size()) {
      throw InputError("clip " + std::to_string(clip.clip_id) + ": label/frame count mismatch");
    }
    std::size_t start = 0;
    while (start < clip.frames.size()) {
      std::size_t end = start + 1;
      while (end < clip.frames.size() && clip.labels[end] == clip.labels[start]) ++end;
      LabeledClip run;
      run.clip_id = clip.clip_id;
      run.frames.assign(clip.frames.begin() + static_cast<long>(start),
                        clip.frames.begin() + static_cast<long>(end));
      run.labels.assign(clip.labels.begin() + static_cast<long>(start),
                        clip.labels.begin() + static_cast<long>(end));
      runs.push_back(std::move(run));
      start = end;
    }
  }
  return runs;
}

MixedStream build_clip_stream(const std::vector<LabeledClip>& clips, const MixConfig& cfg) {
  if (cfg.s < 0.0 || cfg.s > 1.0) {
    throw ConfigError("anomaly portion must lie in [0,1], got " + std::to_string(cfg.s));
  }
  std::vector<LabeledClip> runs = segment_label_runs(clips);
  std::vector<std::size_t> normal_runs, anomalous_runs;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (runs[i].frames.size() < 2) continue;  // no pair can be formed
    (runs[i].labels.front() ? anomalous_runs : normal_runs).push_back(i);
  }
  Rng rng = make_rng(cfg.seed, 101);
  auto shuffle = [&](std::vector<std::size_t>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng() % i]);
  };
  shuffle(normal_runs);
  shuffle(anomalous_runs);

  MixedStream out;
  std::size_t next_n = 0, next_a = 0;
  const long want = cfg.total;
  while (want <= 0 || static_cast<long>(out.samples.size()) < want) {
    const bool normal_left = next_n < normal_runs.size();
    const bool anomalous_left = next_a < anomalous_runs.size();
    if (!normal_left && !anomalous_left) {
      out.exhausted_early = want > 0;
      break;
    }
    bool take_anomalous = uniform01(rng) < cfg.s;
    if (take_anomalous && !anomalous_left) {
      take_anomalous = false;
      if (out.crossover_index < 0) out.crossover_index = static_cast<long>(out.samples.size());
    } else if (!take_anomalous && !normal_left) {
      take_anomalous = true;
      if (out.crossover_index < 0) out.crossover_index = static_cast<long>(out.samples.size());
    }
    const LabeledClip& run = runs[take_anomalous ? anomalous_runs[next_a++] : normal_runs[next_n++]];
    for (std::size_t f = 1; f < run.frames.size(); ++f) {
      if (want > 0 && static_cast<long>(out.samples.size()) >= want) break;
      StreamSample s;
      s.pair = FramePair{run.frames[f - 1], run.frames[f]};
      s.label = run.labels[f];
      s.clip = run.clip_id;
      s.frame = static_cast<int>(f);
      out.samples.push_back(std::move(s));
    }
  }
  return out;
}

long balanced_stream_length(long normal_count, long anomalous_count, double s) {
  if (s <= 0.0) return normal_count;
  if (s >= 1.0) return anomalous_count;
  const double cap = std::min(static_cast<double>(normal_count) / (1.0 - s),
                              static_cast<double>(anomalous_count) / s);
  return std::min(normal_count + anomalous_count, static_cast<long>(std::floor(cap)));
}

}  // namespace streamad
