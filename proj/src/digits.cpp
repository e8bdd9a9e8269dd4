#include "streamad/digits.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "streamad/idx.hpp"
#include "streamad/rng.hpp"

namespace streamad {

namespace {

// class 0 is kept homogeneous so the majority class is quick to learn
void render_zero(std::uint8_t* img, int n, Rng& rng) {
  const double cx = n / 2.0 + uniform(rng, -1.0, 1.0);
  const double cy = n / 2.0 + uniform(rng, -1.0, 1.0);
  const double rx = uniform(rng, 6.0, 7.5);
  const double ry = uniform(rng, 8.0, 9.5);
  const double theta = uniform(rng, -0.2, 0.2);
  const double sigma = uniform(rng, 1.15, 1.6);
  const double amp = uniform(rng, 185.0, 235.0);
  const double ct = std::cos(theta), st = std::sin(theta);
  const double rmean = 0.5 * (rx + ry);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const double dx = x - cx, dy = y - cy;
      const double xr = dx * ct + dy * st;
      const double yr = -dx * st + dy * ct;
      const double q = std::sqrt((xr / rx) * (xr / rx) + (yr / ry) * (yr / ry));
      const double dist = (q - 1.0) * rmean;
      const double v = amp * std::exp(-dist * dist / (2.0 * sigma * sigma));
      img[y * n + x] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
    }
  }
}

void stamp_segment(std::uint8_t* img, int n, double x0, double y0, double x1, double y1,
                   double sigma, double amp) {
  const double ux = x1 - x0, uy = y1 - y0;
  const double len2 = std::max(ux * ux + uy * uy, 1e-9);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const double t = std::clamp(((x - x0) * ux + (y - y0) * uy) / len2, 0.0, 1.0);
      const double dx = x - (x0 + t * ux);
      const double dy = y - (y0 + t * uy);
      const double v = amp * std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      const double merged = std::max(static_cast<double>(img[y * n + x]), v);
      img[y * n + x] = static_cast<std::uint8_t>(std::clamp(merged, 0.0, 255.0));
    }
  }
}

// class 1 is a plain near-vertical stroke: tight as a class, thin on ink
void render_one(std::uint8_t* img, int n, Rng& rng) {
  const double x_top = n / 2.0 + uniform(rng, -1.5, 1.5);
  const double y_top = 3.2 + uniform(rng, -0.8, 0.8);
  const double y_bot = n - 3.2 + uniform(rng, -1.0, 0.8);
  const double x_bot = x_top + uniform(rng, -1.2, 1.2);
  const double sigma = uniform(rng, 2.0, 2.3);
  const double amp = uniform(rng, 235.0, 255.0);
  stamp_segment(img, n, x_top, y_top, x_bot, y_bot, sigma, amp);
}

}  // namespace

void generate_digit_idx(const std::string& images_path, const std::string& labels_path,
                        const DigitSetConfig& cfg) {
  const int total = cfg.zeros + cfg.ones;
  const int n = cfg.size;
  std::vector<std::uint8_t> labels;
  labels.reserve(static_cast<std::size_t>(total));
  labels.insert(labels.end(), static_cast<std::size_t>(cfg.zeros), 0);
  labels.insert(labels.end(), static_cast<std::size_t>(cfg.ones), 1);
  Rng rng = make_rng(cfg.seed, 47);
  for (std::size_t i = labels.size(); i > 1; --i) {
    std::swap(labels[i - 1], labels[static_cast<std::size_t>(rng() % i)]);
  }
  std::vector<std::uint8_t> images(static_cast<std::size_t>(total) * n * n);
  for (int i = 0; i < total; ++i) {
    std::uint8_t* img = images.data() + static_cast<std::size_t>(i) * n * n;
    if (labels[static_cast<std::size_t>(i)] == 0) {
      render_zero(img, n, rng);
    } else {
      render_one(img, n, rng);
    }
  }
  write_idx(images_path,
            {static_cast<std::uint32_t>(total), static_cast<std::uint32_t>(n),
             static_cast<std::uint32_t>(n)},
            images);
  write_idx(labels_path, {static_cast<std::uint32_t>(total)}, labels);
}

}  // namespace streamad
