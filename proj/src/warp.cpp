#include "streamad/warp.hpp"

#include <algorithm>
#include <cmath>

#include "streamad/errors.hpp"

namespace streamad {

Tensor warp(Tape* tape, const Tensor& prev, const FlowField& flow) {
  const Shape& is = prev.shape();
  const Shape& fs = flow.flow.shape();
  if (is.size() != 4) throw DimensionError("warp: expected 4-d frame, got " + shape_str(is));
  const int N = is[0], C = is[1], H = is[2], W = is[3];
  if (fs.size() != 4 || fs[0] != N || fs[1] != 2 || fs[2] != H || fs[3] != W) {
    throw DimensionError("warp: flow shape " + shape_str(fs) + " does not match frame " +
                         shape_str(is));
  }
  Tensor out(is);
  const Tensor& fl = flow.flow;
  const double* pi = prev.data();
  const double* pf = fl.data();
  double* po = out.data();
  const long hw = static_cast<long>(H) * W;

  for (int n = 0; n < N; ++n) {
    const double* fx = pf + static_cast<long>(n) * 2 * hw;
    const double* fy = fx + hw;
    for (int y = 0; y < H; ++y) {
      for (int x = 0; x < W; ++x) {
        const long p = static_cast<long>(y) * W + x;
        const double sx = std::clamp(x + fx[p], 0.0, static_cast<double>(W - 1));
        const double sy = std::clamp(y + fy[p], 0.0, static_cast<double>(H - 1));
        const int x0 = static_cast<int>(sx);
        const int y0 = static_cast<int>(sy);
        const int x1 = std::min(x0 + 1, W - 1);
        const int y1 = std::min(y0 + 1, H - 1);
        const double wx = sx - x0;
        const double wy = sy - y0;
        for (int c = 0; c < C; ++c) {
          const double* img = pi + (static_cast<long>(n) * C + c) * hw;
          const double v00 = img[static_cast<long>(y0) * W + x0];
          const double v01 = img[static_cast<long>(y0) * W + x1];
          const double v10 = img[static_cast<long>(y1) * W + x0];
          const double v11 = img[static_cast<long>(y1) * W + x1];
          const double top = v00 + wx * (v01 - v00);
          const double bot = v10 + wx * (v11 - v10);
          po[(static_cast<long>(n) * C + c) * hw + p] = top + wy * (bot - top);
        }
      }
    }
  }

  if (tape) {
    Tensor fl_t = fl;
    tape->record(out, [prev = prev, fl_t, out, N, C, H, W, hw]() mutable {
      prev.ensure_grad();
      fl_t.ensure_grad();
      const double* pi = prev.data();
      const double* pf = fl_t.data();
      const double* g = out.grad();
      double* gi = prev.grad();
      double* gf = fl_t.grad();
      for (int n = 0; n < N; ++n) {
        const double* fx = pf + static_cast<long>(n) * 2 * hw;
        const double* fy = fx + hw;
        double* gfx = gf + static_cast<long>(n) * 2 * hw;
        double* gfy = gfx + hw;
        for (int y = 0; y < H; ++y) {
          for (int x = 0; x < W; ++x) {
            const long p = static_cast<long>(y) * W + x;
            const double rx = x + fx[p];
            const double ry = y + fy[p];
            const bool in_x = rx > 0.0 && rx < static_cast<double>(W - 1);
            const bool in_y = ry > 0.0 && ry < static_cast<double>(H - 1);
            const double sx = std::clamp(rx, 0.0, static_cast<double>(W - 1));
            const double sy = std::clamp(ry, 0.0, static_cast<double>(H - 1));
            const int x0 = static_cast<int>(sx);
            const int y0 = static_cast<int>(sy);
            const int x1 = std::min(x0 + 1, W - 1);
            const int y1 = std::min(y0 + 1, H - 1);
            const double wx = sx - x0;
            const double wy = sy - y0;
            for (int c = 0; c < C; ++c) {
              const long base = (static_cast<long>(n) * C + c) * hw;
              const double go = g[base + p];
              if (go == 0.0) continue;
              const double* img = pi + base;
              double* gimg = gi + base;
              const long i00 = static_cast<long>(y0) * W + x0;
              const long i01 = static_cast<long>(y0) * W + x1;
              const long i10 = static_cast<long>(y1) * W + x0;
              const long i11 = static_cast<long>(y1) * W + x1;
              gimg[i00] += go * (1 - wx) * (1 - wy);
              gimg[i01] += go * wx * (1 - wy);
              gimg[i10] += go * (1 - wx) * wy;
              gimg[i11] += go * wx * wy;
              if (in_x) {
                const double dvdx = (1 - wy) * (img[i01] - img[i00]) + wy * (img[i11] - img[i10]);
                gfx[p] += go * dvdx;
              }
              if (in_y) {
                const double dvdy = (1 - wx) * (img[i10] - img[i00]) + wx * (img[i11] - img[i01]);
                gfy[p] += go * dvdy;
              }
            }
          }
        }
      }
    });
  }
  return out;
}

}  // namespace streamad
