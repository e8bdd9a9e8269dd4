#include "streamad/sprites.hpp"

#include <algorithm>
#include <cmath>

#include "streamad/errors.hpp"

namespace streamad {

namespace {

// smooth random texture: coarse uniform grid, bilinearly upsampled
std::vector<double> make_texture(int h, int w, int cell, double lo, double hi, Rng& rng) {
  const int gh = h / cell + 2;
  const int gw = w / cell + 2;
  std::vector<double> grid(static_cast<std::size_t>(gh) * gw);
  for (double& v : grid) v = uniform(rng, lo, hi);
  std::vector<double> tex(static_cast<std::size_t>(h) * w);
  for (int y = 0; y < h; ++y) {
    const double fy = static_cast<double>(y) / cell;
    const int y0 = static_cast<int>(fy);
    const double wy = fy - y0;
    for (int x = 0; x < w; ++x) {
      const double fx = static_cast<double>(x) / cell;
      const int x0 = static_cast<int>(fx);
      const double wx = fx - x0;
      const double v00 = grid[static_cast<std::size_t>(y0) * gw + x0];
      const double v01 = grid[static_cast<std::size_t>(y0) * gw + x0 + 1];
      const double v10 = grid[static_cast<std::size_t>(y0 + 1) * gw + x0];
      const double v11 = grid[static_cast<std::size_t>(y0 + 1) * gw + x0 + 1];
      tex[static_cast<std::size_t>(y) * w + x] =
          (1 - wy) * ((1 - wx) * v00 + wx * v01) + wy * ((1 - wx) * v10 + wx * v11);
    }
  }
  return tex;
}

}  // namespace

LabeledClip make_sprite_clip(const SpriteConfig& cfg, SpriteKind kind, int clip_id, Rng& rng) {
  int vx = 0, vy = 0, frames = 0;
  switch (kind) {
    case SpriteKind::kNormal:
      vx = cfg.velocity;
      frames = cfg.frames_normal;
      break;
    case SpriteKind::kFastSpeed:
      vx = cfg.velocity * cfg.speed_factor;
      frames = cfg.frames_fast;
      break;
    case SpriteKind::kWrongDirection:
      vy = cfg.velocity;
      frames = cfg.frames_direction;
      break;
  }
  const int sw = uniform_int(rng, cfg.min_size, cfg.max_size);
  const int sh = uniform_int(rng, cfg.min_size, cfg.max_size);
  const int travel_x = vx * (frames - 1);
  const int travel_y = vy * (frames - 1);
  const int x_max = cfg.width - sw - travel_x - 2;
  const int y_max = cfg.height - sh - travel_y - 2;
  if (x_max < 2 || y_max < 2) {
    throw ConfigError("sprite travel does not fit the frame; shorten clips or enlarge frames");
  }
  const int x0 = uniform_int(rng, 2, x_max);
  const int y0 = uniform_int(rng, 2, y_max);

  const std::vector<double> bg = make_texture(cfg.height, cfg.width, cfg.texture_cell * 2, -1.0, 0.2, rng);
  const std::vector<double> sprite = make_texture(sh, sw, cfg.texture_cell, -0.1, 1.0, rng);

  LabeledClip clip;
  clip.clip_id = clip_id;
  const int label = kind == SpriteKind::kNormal ? 0 : 1;
  for (int t = 0; t < frames; ++t) {
    Tensor frame({1, 1, cfg.height, cfg.width});
    double* p = frame.data();
    std::copy(bg.begin(), bg.end(), p);
    const int sx = x0 + vx * t;
    const int sy = y0 + vy * t;
    for (int y = 0; y < sh; ++y) {
      for (int x = 0; x < sw; ++x) {
        p[static_cast<long>(sy + y) * cfg.width + sx + x] = sprite[static_cast<std::size_t>(y) * sw + x];
      }
    }
    clip.frames.push_back(std::move(frame));
    clip.labels.push_back(label);
  }
  return clip;
}

SpriteDataset make_sprite_dataset(const SpriteConfig& cfg, int train_clips, int test_normal,
                                  int test_anomalous, SpriteKind anomaly_kind, std::uint64_t seed) {
  SpriteDataset ds;
  Rng rng = make_rng(seed, 31);
  int id = 0;
  for (int i = 0; i < train_clips; ++i) {
    ds.train.push_back(make_sprite_clip(cfg, SpriteKind::kNormal, id++, rng));
  }
  for (int i = 0; i < test_normal; ++i) {
    ds.test.push_back(make_sprite_clip(cfg, SpriteKind::kNormal, id++, rng));
  }
  for (int i = 0; i < test_anomalous; ++i) {
    ds.test.push_back(make_sprite_clip(cfg, anomaly_kind, id++, rng));
  }
  return ds;
}

namespace {

struct BlockMatch {
  bool moving = false;
  int dx = 0;
  int dy = 0;
};

BlockMatch match_block(const Tensor& prev, const Tensor& curr, int bx, int by,
                       const FlowBaseline& bl) {
  const Shape& s = prev.shape();
  const int H = s[2], W = s[3];
  const int B = bl.block;
  const double* pp = prev.data();
  const double* pc = curr.data();

  BlockMatch m;
  double diff0 = 0.0;
  for (int y = 0; y < B; ++y) {
    for (int x = 0; x < B; ++x) {
      const long i = static_cast<long>(by + y) * W + bx + x;
      diff0 += std::fabs(pc[i] - pp[i]);
    }
  }
  if (diff0 / (B * B) < bl.motion_threshold) return m;

  m.moving = true;
  double best = 1e300;
  for (int dy = -bl.radius; dy <= bl.radius; ++dy) {
    if (by + dy < 0 || by + dy + B > H) continue;
    for (int dx = -bl.radius; dx <= bl.radius; ++dx) {
      if (bx + dx < 0 || bx + dx + B > W) continue;
      double sad = 0.0;
      for (int y = 0; y < B && sad < best; ++y) {
        const double* crow = pc + static_cast<long>(by + y) * W + bx;
        const double* prow = pp + static_cast<long>(by + dy + y) * W + bx + dx;
        for (int x = 0; x < B; ++x) sad += std::fabs(crow[x] - prow[x]);
      }
      if (sad < best) {
        best = sad;
        m.dx = dx;
        m.dy = dy;
      }
    }
  }
  return m;
}

}  // namespace

FlowBaseline fit_flow_baseline(const std::vector<LabeledClip>& train_clips) {
  FlowBaseline bl;
  double sx = 0.0, sy = 0.0;
  long count = 0;
  for (const LabeledClip& clip : train_clips) {
    for (std::size_t f = 1; f < clip.frames.size(); ++f) {
      const Shape& s = clip.frames[f].shape();
      for (int by = 0; by + bl.block <= s[2]; by += bl.block) {
        for (int bx = 0; bx + bl.block <= s[3]; bx += bl.block) {
          const BlockMatch m = match_block(clip.frames[f - 1], clip.frames[f], bx, by, bl);
          if (m.moving) {
            sx += m.dx;
            sy += m.dy;
            ++count;
          }
        }
      }
    }
  }
  if (count > 0) {
    bl.dx = sx / static_cast<double>(count);
    bl.dy = sy / static_cast<double>(count);
  }
  return bl;
}

double flow_baseline_score(const FramePair& pair, const FlowBaseline& bl) {
  const Shape& s = pair.curr.shape();
  double acc = 0.0;
  long count = 0;
  for (int by = 0; by + bl.block <= s[2]; by += bl.block) {
    for (int bx = 0; bx + bl.block <= s[3]; bx += bl.block) {
      const BlockMatch m = match_block(pair.prev, pair.curr, bx, by, bl);
      if (m.moving) {
        const double ddx = m.dx - bl.dx;
        const double ddy = m.dy - bl.dy;
        acc += ddx * ddx + ddy * ddy;
        ++count;
      }
    }
  }
  return count ? acc / static_cast<double>(count) : 0.0;
}

}  // namespace streamad
