#include "streamad/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "streamad/errors.hpp"

namespace streamad {

long shape_size(const Shape& shape) {
  long n = 1;
  for (int e : shape) n *= e;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << "]";
  return os.str();
}

Tensor::Tensor(Shape shape) {
  for (int e : shape) {
    if (e <= 0) throw DimensionError("tensor extents must be positive, got " + shape_str(shape));
  }
  impl_ = std::make_shared<Impl>();
  impl_->shape = std::move(shape);
  impl_->data.assign(static_cast<std::size_t>(shape_size(impl_->shape)), 0.0);
}

Tensor Tensor::zeros(Shape shape) { return Tensor(std::move(shape)); }

Tensor Tensor::full(Shape shape, double value) {
  Tensor t(std::move(shape));
  std::fill(t.impl_->data.begin(), t.impl_->data.end(), value);
  return t;
}

Tensor Tensor::scalar(double value) { return full({1}, value); }

Tensor Tensor::from(Shape shape, std::vector<double> values) {
  Tensor t(std::move(shape));
  if (static_cast<long>(values.size()) != t.size()) {
    throw DimensionError("value count " + std::to_string(values.size()) +
                         " does not match shape " + shape_str(t.shape()));
  }
  t.impl_->data = std::move(values);
  return t;
}

const Shape& Tensor::shape() const {
  if (!impl_) throw ContractError("use of undefined tensor");
  return impl_->shape;
}

long Tensor::size() const { return shape_size(shape()); }

bool Tensor::same_shape(const Tensor& other) const { return shape() == other.shape(); }

double* Tensor::data() { return impl_->data.data(); }
const double* Tensor::data() const { return impl_->data.data(); }

std::span<double> Tensor::values() { return {impl_->data.data(), impl_->data.size()}; }
std::span<const double> Tensor::values() const { return {impl_->data.data(), impl_->data.size()}; }

bool Tensor::is_scalar() const { return defined() && size() == 1; }

double Tensor::item() const {
  if (!is_scalar()) throw ContractError("item() requires a scalar tensor, shape " + shape_str(shape()));
  return impl_->data[0];
}

bool Tensor::has_grad() const { return impl_ && !impl_->grad.empty(); }

double* Tensor::grad() { return impl_->grad.data(); }
const double* Tensor::grad() const { return impl_->grad.data(); }

std::span<const double> Tensor::grad_values() const { return {impl_->grad.data(), impl_->grad.size()}; }

void Tensor::ensure_grad() {
  if (!impl_) throw ContractError("ensure_grad on undefined tensor");
  if (impl_->grad.empty()) impl_->grad.assign(impl_->data.size(), 0.0);
}

void Tensor::zero_grad() {
  ensure_grad();
  std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0);
}

void Tensor::drop_grad() {
  if (impl_) impl_->grad.clear();
}

Tensor Tensor::clone() const {
  Tensor t;
  t.impl_ = std::make_shared<Impl>();
  t.impl_->shape = impl_->shape;
  t.impl_->data = impl_->data;
  return t;
}

Tensor Tensor::detach() const { return clone(); }

// ---- tape ----------------------------------------------------------------

void Tape::record(Tensor output, BackwardFn fn) {
  nodes_.push_back(Node{std::move(output), std::move(fn)});
}

void Tape::backward(Tensor loss, std::span<Tensor> params) {
  if (!loss.is_scalar()) {
    throw ContractError("backward requires a scalar loss, shape " + shape_str(loss.shape()));
  }
  if (nodes_.empty()) throw ContractError("backward on an empty tape");
  for (Tensor& p : params) p.zero_grad();
  loss.zero_grad();
  loss.grad()[0] = 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    if (it->out.has_grad()) it->fn();
  }
}

// ---- op helpers ------------------------------------------------------------

namespace {

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                         " vs " + shape_str(b.shape()));
  }
}

void accum(Tensor& t, const double* g, long n) {
  t.ensure_grad();
  double* dst = t.grad();
  for (long i = 0; i < n; ++i) dst[i] += g[i];
}

}  // namespace

// ---- elementwise ops -------------------------------------------------------

Tensor add(Tape* tape, const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "add");
  long n = a.size();
  Tensor out(a.shape());
  const double* pa = a.data();
  const double* pb = b.data();
  double* po = out.data();
  for (long i = 0; i < n; ++i) po[i] = pa[i] + pb[i];
  if (tape) {
    tape->record(out, [a = a, b = b, out, n]() mutable {
      const double* g = out.grad();
      accum(a, g, n);
      accum(b, g, n);
    });
  }
  return out;
}

Tensor sub(Tape* tape, const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "sub");
  long n = a.size();
  Tensor out(a.shape());
  const double* pa = a.data();
  const double* pb = b.data();
  double* po = out.data();
  for (long i = 0; i < n; ++i) po[i] = pa[i] - pb[i];
  if (tape) {
    tape->record(out, [a = a, b = b, out, n]() mutable {
      const double* g = out.grad();
      accum(a, g, n);
      b.ensure_grad();
      double* gb = b.grad();
      for (long i = 0; i < n; ++i) gb[i] -= g[i];
    });
  }
  return out;
}

Tensor mul(Tape* tape, const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "mul");
  long n = a.size();
  Tensor out(a.shape());
  const double* pa = a.data();
  const double* pb = b.data();
  double* po = out.data();
  for (long i = 0; i < n; ++i) po[i] = pa[i] * pb[i];
  if (tape) {
    tape->record(out, [a = a, b = b, out, n]() mutable {
      const double* g = out.grad();
      a.ensure_grad();
      b.ensure_grad();
      double* ga = a.grad();
      double* gb = b.grad();
      const double* pa = a.data();
      const double* pb = b.data();
      for (long i = 0; i < n; ++i) {
        ga[i] += g[i] * pb[i];
        gb[i] += g[i] * pa[i];
      }
    });
  }
  return out;
}

Tensor affine(Tape* tape, const Tensor& x, double a, double b) {
  long n = x.size();
  Tensor out(x.shape());
  const double* px = x.data();
  double* po = out.data();
  for (long i = 0; i < n; ++i) po[i] = a * px[i] + b;
  if (tape) {
    tape->record(out, [x = x, out, a, n]() mutable {
      const double* g = out.grad();
      x.ensure_grad();
      double* gx = x.grad();
      for (long i = 0; i < n; ++i) gx[i] += a * g[i];
    });
  }
  return out;
}

Tensor sum(Tape* tape, const Tensor& x) {
  long n = x.size();
  const double* px = x.data();
  double acc = 0.0;
  for (long i = 0; i < n; ++i) acc += px[i];
  Tensor out = Tensor::scalar(acc);
  if (tape) {
    tape->record(out, [x = x, out, n]() mutable {
      double g = out.grad()[0];
      x.ensure_grad();
      double* gx = x.grad();
      for (long i = 0; i < n; ++i) gx[i] += g;
    });
  }
  return out;
}

Tensor mean(Tape* tape, const Tensor& x) {
  long n = x.size();
  const double* px = x.data();
  double acc = 0.0;
  for (long i = 0; i < n; ++i) acc += px[i];
  Tensor out = Tensor::scalar(acc / static_cast<double>(n));
  if (tape) {
    tape->record(out, [x = x, out, n]() mutable {
      double g = out.grad()[0] / static_cast<double>(n);
      x.ensure_grad();
      double* gx = x.grad();
      for (long i = 0; i < n; ++i) gx[i] += g;
    });
  }
  return out;
}

Tensor reshape(Tape* tape, const Tensor& x, Shape shape) {
  if (shape_size(shape) != x.size()) {
    throw DimensionError("reshape: cannot view " + shape_str(x.shape()) + " as " + shape_str(shape));
  }
  Tensor out = Tensor::from(std::move(shape), std::vector<double>(x.data(), x.data() + x.size()));
  if (tape) {
    long n = x.size();
    tape->record(out, [x = x, out, n]() mutable { accum(x, out.grad(), n); });
  }
  return out;
}

Tensor log_op(Tape* tape, const Tensor& x) {
  long n = x.size();
  Tensor out(x.shape());
  const double* px = x.data();
  double* po = out.data();
  for (long i = 0; i < n; ++i) po[i] = std::log(px[i]);
  if (tape) {
    tape->record(out, [x = x, out, n]() mutable {
      const double* g = out.grad();
      x.ensure_grad();
      double* gx = x.grad();
      const double* px = x.data();
      for (long i = 0; i < n; ++i) gx[i] += g[i] / px[i];
    });
  }
  return out;
}

Tensor clamp(Tape* tape, const Tensor& x, double lo, double hi) {
  long n = x.size();
  Tensor out(x.shape());
  const double* px = x.data();
  double* po = out.data();
  for (long i = 0; i < n; ++i) po[i] = std::min(std::max(px[i], lo), hi);
  if (tape) {
    tape->record(out, [x = x, out, lo, hi, n]() mutable {
      const double* g = out.grad();
      x.ensure_grad();
      double* gx = x.grad();
      const double* px = x.data();
      for (long i = 0; i < n; ++i) {
        if (px[i] > lo && px[i] < hi) gx[i] += g[i];
      }
    });
  }
  return out;
}

Tensor activation(Tape* tape, const Tensor& x, Act kind, double slope) {
  long n = x.size();
  Tensor out(x.shape());
  const double* px = x.data();
  double* po = out.data();
  switch (kind) {
    case Act::kRelu:
      for (long i = 0; i < n; ++i) po[i] = px[i] > 0 ? px[i] : 0.0;
      break;
    case Act::kLeakyRelu:
      for (long i = 0; i < n; ++i) po[i] = px[i] > 0 ? px[i] : slope * px[i];
      break;
    case Act::kSigmoid:
      for (long i = 0; i < n; ++i) po[i] = 1.0 / (1.0 + std::exp(-px[i]));
      break;
    case Act::kTanh:
      for (long i = 0; i < n; ++i) po[i] = std::tanh(px[i]);
      break;
  }
  if (tape) {
    tape->record(out, [x = x, out, kind, slope, n]() mutable {
      const double* g = out.grad();
      x.ensure_grad();
      double* gx = x.grad();
      const double* px = x.data();
      const double* po = out.data();
      switch (kind) {
        case Act::kRelu:
          for (long i = 0; i < n; ++i) gx[i] += px[i] > 0 ? g[i] : 0.0;
          break;
        case Act::kLeakyRelu:
          for (long i = 0; i < n; ++i) gx[i] += px[i] > 0 ? g[i] : slope * g[i];
          break;
        case Act::kSigmoid:
          for (long i = 0; i < n; ++i) gx[i] += g[i] * po[i] * (1.0 - po[i]);
          break;
        case Act::kTanh:
          for (long i = 0; i < n; ++i) gx[i] += g[i] * (1.0 - po[i] * po[i]);
          break;
      }
    });
  }
  return out;
}

// ---- conv / dense ----------------------------------------------------------

Tensor conv2d(Tape* tape, const Tensor& input, const Tensor& kernel, int stride,
              int padding) {
  const Shape& is = input.shape();
  const Shape& ks = kernel.shape();
  if (is.size() != 4 || ks.size() != 4) {
    throw DimensionError("conv2d: expected 4-d input and kernel, got " + shape_str(is) +
                         " and " + shape_str(ks));
  }
  if (stride <= 0) throw ConfigError("conv2d: stride must be positive");
  if (padding < 0) throw ConfigError("conv2d: padding must be nonnegative");
  const int N = is[0], C = is[1], H = is[2], W = is[3];
  const int K = ks[0], KC = ks[1], kh = ks[2], kw = ks[3];
  if (KC != C) {
    throw DimensionError("conv2d: input channels " + std::to_string(C) +
                         " != kernel channels " + std::to_string(KC));
  }
  if (kh > H + 2 * padding || kw > W + 2 * padding) {
    throw DimensionError("conv2d: kernel exceeds padded input extent");
  }
  const int OH = (H + 2 * padding - kh) / stride + 1;
  const int OW = (W + 2 * padding - kw) / stride + 1;
  Tensor out({N, K, OH, OW});
  const double* pi = input.data();
  const double* pk = kernel.data();
  double* po = out.data();

  auto in_at = [&](int n, int c, int y, int x) -> double {
    return pi[((static_cast<long>(n) * C + c) * H + y) * W + x];
  };
  for (int n = 0; n < N; ++n) {
    for (int k = 0; k < K; ++k) {
      for (int oy = 0; oy < OH; ++oy) {
        for (int ox = 0; ox < OW; ++ox) {
          double acc = 0.0;
          const int y0 = oy * stride - padding;
          const int x0 = ox * stride - padding;
          for (int c = 0; c < C; ++c) {
            const double* kc = pk + ((static_cast<long>(k) * C + c) * kh) * kw;
            for (int dy = 0; dy < kh; ++dy) {
              const int y = y0 + dy;
              if (y < 0 || y >= H) continue;
              for (int dx = 0; dx < kw; ++dx) {
                const int x = x0 + dx;
                if (x < 0 || x >= W) continue;
                acc += in_at(n, c, y, x) * kc[dy * kw + dx];
              }
            }
          }
          po[((static_cast<long>(n) * K + k) * OH + oy) * OW + ox] = acc;
        }
      }
    }
  }
  if (tape) {
    tape->record(out, [input = input, kernel = kernel, out, stride, padding]() mutable {
      const Shape& is = input.shape();
      const Shape& ks = kernel.shape();
      const int N = is[0], C = is[1], H = is[2], W = is[3];
      const int K = ks[0], kh = ks[2], kw = ks[3];
      const Shape& os = out.shape();
      const int OH = os[2], OW = os[3];
      input.ensure_grad();
      kernel.ensure_grad();
      const double* pi = input.data();
      const double* pk = kernel.data();
      const double* g = out.grad();
      double* gi = input.grad();
      double* gk = kernel.grad();
      for (int n = 0; n < N; ++n) {
        for (int k = 0; k < K; ++k) {
          for (int oy = 0; oy < OH; ++oy) {
            for (int ox = 0; ox < OW; ++ox) {
              const double go = g[((static_cast<long>(n) * K + k) * OH + oy) * OW + ox];
              if (go == 0.0) continue;
              const int y0 = oy * stride - padding;
              const int x0 = ox * stride - padding;
              for (int c = 0; c < C; ++c) {
                const long in_base = (static_cast<long>(n) * C + c) * H;
                const long k_base = (static_cast<long>(k) * C + c) * kh;
                for (int dy = 0; dy < kh; ++dy) {
                  const int y = y0 + dy;
                  if (y < 0 || y >= H) continue;
                  for (int dx = 0; dx < kw; ++dx) {
                    const int x = x0 + dx;
                    if (x < 0 || x >= W) continue;
                    const long ii = (in_base + y) * W + x;
                    const long ki = (k_base + dy) * kw + dx;
                    gi[ii] += go * pk[ki];
                    gk[ki] += go * pi[ii];
                  }
                }
              }
            }
          }
        }
      }
    });
  }
  return out;
}

Tensor bias_channels(Tape* tape, const Tensor& x, const Tensor& bias) {
  const Shape& xs = x.shape();
  if (xs.size() != 4) throw DimensionError("bias_channels: expected 4-d input");
  const int N = xs[0], K = xs[1], H = xs[2], W = xs[3];
  if (bias.shape() != Shape{K}) {
    throw DimensionError("bias_channels: bias shape " + shape_str(bias.shape()) +
                         " does not match channel count " + std::to_string(K));
  }
  Tensor out(xs);
  const double* px = x.data();
  const double* pb = bias.data();
  double* po = out.data();
  const long hw = static_cast<long>(H) * W;
  for (int n = 0; n < N; ++n) {
    for (int k = 0; k < K; ++k) {
      const long base = (static_cast<long>(n) * K + k) * hw;
      for (long i = 0; i < hw; ++i) po[base + i] = px[base + i] + pb[k];
    }
  }
  if (tape) {
    tape->record(out, [x = x, bias = bias, out, N, K, hw]() mutable {
      const double* g = out.grad();
      x.ensure_grad();
      bias.ensure_grad();
      double* gx = x.grad();
      double* gb = bias.grad();
      for (int n = 0; n < N; ++n) {
        for (int k = 0; k < K; ++k) {
          const long base = (static_cast<long>(n) * K + k) * hw;
          double acc = 0.0;
          for (long i = 0; i < hw; ++i) {
            gx[base + i] += g[base + i];
            acc += g[base + i];
          }
          gb[k] += acc;
        }
      }
    });
  }
  return out;
}

Tensor dense(Tape* tape, const Tensor& input, const Tensor& weight, const Tensor& bias) {
  const Shape& is = input.shape();
  const Shape& ws = weight.shape();
  if (is.size() != 2 || ws.size() != 2) {
    throw DimensionError("dense: expected 2-d input and weight, got " + shape_str(is) +
                         " and " + shape_str(ws));
  }
  const int N = is[0], D = is[1], M = ws[1];
  if (ws[0] != D) {
    throw DimensionError("dense: inner dimensions disagree, input " + shape_str(is) +
                         " weight " + shape_str(ws));
  }
  if (bias.shape() != Shape{M}) {
    throw DimensionError("dense: bias shape " + shape_str(bias.shape()) + " != [" +
                         std::to_string(M) + "]");
  }
  Tensor out({N, M});
  const double* px = input.data();
  const double* pw = weight.data();
  const double* pb = bias.data();
  double* po = out.data();
  for (int n = 0; n < N; ++n) {
    double* orow = po + static_cast<long>(n) * M;
    for (int m = 0; m < M; ++m) orow[m] = pb[m];
    const double* xrow = px + static_cast<long>(n) * D;
    for (int d = 0; d < D; ++d) {
      const double xv = xrow[d];
      if (xv == 0.0) continue;
      const double* wrow = pw + static_cast<long>(d) * M;
      for (int m = 0; m < M; ++m) orow[m] += xv * wrow[m];
    }
  }
  if (tape) {
    tape->record(out, [input = input, weight = weight, bias = bias, out, N, D, M]() mutable {
      input.ensure_grad();
      weight.ensure_grad();
      bias.ensure_grad();
      const double* g = out.grad();
      const double* px = input.data();
      const double* pw = weight.data();
      double* gx = input.grad();
      double* gw = weight.grad();
      double* gb = bias.grad();
      for (int n = 0; n < N; ++n) {
        const double* grow = g + static_cast<long>(n) * M;
        const double* xrow = px + static_cast<long>(n) * D;
        double* gxrow = gx + static_cast<long>(n) * D;
        for (int m = 0; m < M; ++m) gb[m] += grow[m];
        for (int d = 0; d < D; ++d) {
          const double* wrow = pw + static_cast<long>(d) * M;
          double* gwrow = gw + static_cast<long>(d) * M;
          double acc = 0.0;
          const double xv = xrow[d];
          for (int m = 0; m < M; ++m) {
            acc += grow[m] * wrow[m];
            gwrow[m] += grow[m] * xv;
          }
          gxrow[d] += acc;
        }
      }
    });
  }
  return out;
}

Tensor upsample2(Tape* tape, const Tensor& x) {
  const Shape& xs = x.shape();
  if (xs.size() != 4) throw DimensionError("upsample2: expected 4-d input");
  const int N = xs[0], C = xs[1], H = xs[2], W = xs[3];
  Tensor out({N, C, 2 * H, 2 * W});
  const double* px = x.data();
  double* po = out.data();
  for (int n = 0; n < N; ++n) {
    for (int c = 0; c < C; ++c) {
      const long ibase = (static_cast<long>(n) * C + c) * H * W;
      const long obase = (static_cast<long>(n) * C + c) * 4L * H * W;
      for (int y = 0; y < H; ++y) {
        for (int xx = 0; xx < W; ++xx) {
          const double v = px[ibase + static_cast<long>(y) * W + xx];
          const long o = obase + static_cast<long>(2 * y) * 2 * W + 2 * xx;
          po[o] = v;
          po[o + 1] = v;
          po[o + 2L * W] = v;
          po[o + 2L * W + 1] = v;
        }
      }
    }
  }
  if (tape) {
    tape->record(out, [x = x, out, N, C, H, W]() mutable {
      x.ensure_grad();
      const double* g = out.grad();
      double* gx = x.grad();
      for (int n = 0; n < N; ++n) {
        for (int c = 0; c < C; ++c) {
          const long ibase = (static_cast<long>(n) * C + c) * H * W;
          const long obase = (static_cast<long>(n) * C + c) * 4L * H * W;
          for (int y = 0; y < H; ++y) {
            for (int xx = 0; xx < W; ++xx) {
              const long o = obase + static_cast<long>(2 * y) * 2 * W + 2 * xx;
              gx[ibase + static_cast<long>(y) * W + xx] +=
                  g[o] + g[o + 1] + g[o + 2L * W] + g[o + 2L * W + 1];
            }
          }
        }
      }
    });
  }
  return out;
}

Tensor hgrad(Tape* tape, const Tensor& x) {
  const Shape& xs = x.shape();
  if (xs.size() != 4) throw DimensionError("hgrad: expected 4-d input");
  const int N = xs[0], C = xs[1], H = xs[2], W = xs[3];
  if (W < 3) throw DimensionError("hgrad: width must be >= 3, got " + std::to_string(W));
  const int OW = W - 2;
  Tensor out({N, C, H, OW});
  const double* px = x.data();
  double* po = out.data();
  const long rows = static_cast<long>(N) * C * H;
  for (long r = 0; r < rows; ++r) {
    const double* xrow = px + r * W;
    double* orow = po + r * OW;
    for (int j = 0; j < OW; ++j) orow[j] = xrow[j + 2] - xrow[j];
  }
  if (tape) {
    tape->record(out, [x = x, out, rows, W, OW]() mutable {
      x.ensure_grad();
      const double* g = out.grad();
      double* gx = x.grad();
      for (long r = 0; r < rows; ++r) {
        const double* grow = g + r * OW;
        double* gxrow = gx + r * W;
        for (int j = 0; j < OW; ++j) {
          gxrow[j + 2] += grow[j];
          gxrow[j] -= grow[j];
        }
      }
    });
  }
  return out;
}

// ---- optimizer -------------------------------------------------------------

void adam_step(std::span<Tensor> params, OptimizerState& state) {
  if (state.lr <= 0) throw ConfigError("optimizer learning rate must be positive");
  if (state.m.size() != params.size()) {
    state.m.assign(params.size(), {});
    state.v.assign(params.size(), {});
    for (std::size_t i = 0; i < params.size(); ++i) {
      state.m[i].assign(static_cast<std::size_t>(params[i].size()), 0.0);
      state.v[i].assign(static_cast<std::size_t>(params[i].size()), 0.0);
    }
  }
  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double bc1 = 1.0 - std::pow(state.beta1, t);
  const double bc2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = params[i];
    const long n = p.size();
    if (static_cast<long>(state.m[i].size()) != n) {
      throw DimensionError("optimizer state does not match parameter shape");
    }
    if (!p.has_grad()) continue;  // treated as zero gradient
    double* pv = p.data();
    const double* g = p.grad();
    if (state.kind == OptKind::kSgd) {
      for (long j = 0; j < n; ++j) pv[j] -= state.lr * g[j];
    } else {
      double* m = state.m[i].data();
      double* v = state.v[i].data();
      for (long j = 0; j < n; ++j) {
        m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g[j];
        v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g[j] * g[j];
        const double mhat = m[j] / bc1;
        const double vhat = v[j] / bc2;
        pv[j] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
      }
    }
    p.zero_grad();
  }
}

void init_fan_in_uniform(Tensor& w, long fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (double& v : w.values()) v = uniform(rng, -bound, bound);
}

// ---- gradient checker --------------------------------------------------------

double grad_check(const std::function<Tensor(Tape&, const Tensor&)>& fn,
                  const Tensor& input, double step) {
  if (step <= 0) throw ConfigError("grad_check: step must be positive");
  Tensor probe = input.clone();
  Tape tape;
  Tensor loss = fn(tape, probe);
  tape.backward(loss, std::span<Tensor>(&probe, 1));
  std::vector<double> analytic(probe.grad(), probe.grad() + probe.size());

  double worst = 0.0;
  const long n = input.size();
  for (long i = 0; i < n; ++i) {
    Tensor hi = input.clone();
    hi.data()[i] += step;
    Tensor lo = input.clone();
    lo.data()[i] -= step;
    // actual perturbation, guards against representation rounding of the step
    const double h2 = hi.data()[i] - lo.data()[i];
    Tape t1, t2;
    const double fp = fn(t1, hi).item();
    const double fm = fn(t2, lo).item();
    const double cd = (fp - fm) / h2;
    const double denom = std::max({std::fabs(analytic[i]), std::fabs(cd), 1e-8});
    worst = std::max(worst, std::fabs(analytic[i] - cd) / denom);
  }
  return worst;
}

}  // namespace streamad
