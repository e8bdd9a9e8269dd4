#include "streamad/cad.hpp"

#include <cmath>

#include "streamad/errors.hpp"
#include "streamad/warp.hpp"

namespace streamad {

namespace {

constexpr double kProbEps = 1e-7;

ConvLayer make_layer(int out_ch, int in_ch, int k, int stride, int pad, Rng& rng) {
  ConvLayer l;
  l.w = Tensor({out_ch, in_ch, k, k});
  l.b = Tensor({out_ch});
  l.stride = stride;
  l.padding = pad;
  init_fan_in_uniform(l.w, static_cast<long>(in_ch) * k * k, rng);
  return l;
}

Tensor apply(Tape* tape, const ConvLayer& l, const Tensor& x) {
  return bias_channels(tape, conv2d(tape, x, l.w, l.stride, l.padding), l.b);
}

void check_pair(const FramePair& pair) {
  if (!pair.prev.defined() || !pair.curr.defined() || !pair.prev.same_shape(pair.curr)) {
    throw DimensionError("frame pair must hold two frames of identical shape");
  }
}

}  // namespace

Tensor intensity_loss(Tape* tape, const Tensor& pred, const Tensor& actual) {
  if (!pred.same_shape(actual)) {
    throw DimensionError("intensity_loss: shape mismatch " + shape_str(pred.shape()) + " vs " +
                         shape_str(actual.shape()));
  }
  Tensor d = sub(tape, actual, pred);
  return mean(tape, mul(tape, d, d));
}

Tensor gradient_loss(Tape* tape, const Tensor& pred, const Tensor& actual, bool vertical_too) {
  if (!pred.same_shape(actual)) {
    throw DimensionError("gradient_loss: shape mismatch " + shape_str(pred.shape()) + " vs " +
                         shape_str(actual.shape()));
  }
  Tensor dh = sub(tape, hgrad(tape, actual), hgrad(tape, pred));
  Tensor loss = mean(tape, mul(tape, dh, dh));
  if (vertical_too) {
    // same [1,0,-1] filter applied down columns, via a transposed view
    const Shape& s = pred.shape();
    auto transpose_hw = [&](const Tensor& x) {
      const int N = s[0], C = s[1], H = s[2], W = s[3];
      Tensor out({N, C, W, H});
      const double* px = x.data();
      double* po = out.data();
      for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c) {
          const long b = (static_cast<long>(n) * C + c) * H * W;
          for (int y = 0; y < H; ++y)
            for (int xx = 0; xx < W; ++xx) po[b + static_cast<long>(xx) * H + y] = px[b + static_cast<long>(y) * W + xx];
        }
      if (tape) {
        tape->record(out, [x = x, out, N, C, H, W]() mutable {
          x.ensure_grad();
          const double* g = out.grad();
          double* gx = x.grad();
          for (int n = 0; n < N; ++n)
            for (int c = 0; c < C; ++c) {
              const long b = (static_cast<long>(n) * C + c) * H * W;
              for (int y = 0; y < H; ++y)
                for (int xx = 0; xx < W; ++xx)
                  gx[b + static_cast<long>(y) * W + xx] += g[b + static_cast<long>(xx) * H + y];
            }
        });
      }
      return out;
    };
    Tensor dv = sub(tape, hgrad(tape, transpose_hw(actual)), hgrad(tape, transpose_hw(pred)));
    loss = add(tape, loss, mean(tape, mul(tape, dv, dv)));
  }
  return loss;
}

CadModel::CadModel(CadConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.lr_g <= 0 || cfg_.lr_d <= 0) throw ConfigError("learning rates must be positive");
  if (cfg_.lambda < 0) throw ConfigError("adversarial weight must be nonnegative");
  Rng rng = make_rng(cfg_.seed, 17);
  const int k = cfg_.kernel;
  const int pad = k / 2;

  int ch = cfg_.in_channels;
  int width = cfg_.gen_base_width;
  for (int i = 0; i < cfg_.gen_depth; ++i) {
    enc_.push_back(make_layer(width, ch, k, 2, pad, rng));
    ch = width;
    if (i + 1 < cfg_.gen_depth) width *= 2;
  }
  bottleneck_ = make_layer(ch, ch, k, 1, pad, rng);
  for (int i = 0; i < cfg_.gen_depth; ++i) {
    int out = i + 1 < cfg_.gen_depth ? ch / 2 : cfg_.gen_base_width;
    dec_.push_back(make_layer(out, ch, k, 1, pad, rng));
    ch = out;
  }
  // zero-init flow head: an untrained model predicts zero flow, so the
  // predicted frame equals the previous frame from the first sample on
  flow_head_ = make_layer(2, ch, k, 1, pad, rng);
  for (double& v : flow_head_.w.values()) v = 0.0;

  ch = cfg_.in_channels;
  width = cfg_.disc_base_width;
  for (int i = 0; i < cfg_.disc_depth; ++i) {
    disc_blocks_.push_back(make_layer(width, ch, k, 2, pad, rng));
    ch = width;
    width *= 2;
  }
  disc_head_ = make_layer(1, ch, k, 1, pad, rng);

  auto collect = [](std::vector<Tensor>& dst, ConvLayer& l) {
    dst.push_back(l.w);
    dst.push_back(l.b);
  };
  for (auto& l : enc_) collect(gen_params_, l);
  collect(gen_params_, bottleneck_);
  for (auto& l : dec_) collect(gen_params_, l);
  collect(gen_params_, flow_head_);
  for (auto& l : disc_blocks_) collect(disc_params_, l);
  collect(disc_params_, disc_head_);

  opt_g_.kind = cfg_.optimizer;
  opt_g_.lr = cfg_.lr_g;
  opt_d_.kind = cfg_.optimizer;
  opt_d_.lr = cfg_.lr_d;
}

FlowField CadModel::flow_forward(Tape* tape, const Tensor& prev) const {
  const Shape& s = prev.shape();
  if (s.size() != 4 || s[1] != cfg_.in_channels) {
    throw DimensionError("flow_forward: expected [N," + std::to_string(cfg_.in_channels) +
                         ",H,W], got " + shape_str(s));
  }
  const int div = 1 << cfg_.gen_depth;
  if (s[2] % div != 0 || s[3] % div != 0) {
    throw ConfigError("flow_forward: spatial extents " + std::to_string(s[2]) + "x" +
                      std::to_string(s[3]) + " not divisible by 2^depth = " + std::to_string(div));
  }
  Tensor h = prev;
  for (const auto& l : enc_) h = activation(tape, apply(tape, l, h), Act::kLeakyRelu, cfg_.leak);
  h = activation(tape, apply(tape, bottleneck_, h), Act::kLeakyRelu, cfg_.leak);
  for (const auto& l : dec_) {
    h = upsample2(tape, h);
    h = activation(tape, apply(tape, l, h), Act::kLeakyRelu, cfg_.leak);
  }
  Tensor raw = apply(tape, flow_head_, h);
  return FlowField{affine(tape, activation(tape, raw, Act::kTanh), cfg_.max_flow, 0.0)};
}

Tensor CadModel::disc_forward(Tape* tape, const Tensor& frame) const {
  const Shape& s = frame.shape();
  if (s.size() != 4 || s[1] != cfg_.in_channels) {
    throw DimensionError("disc_forward: bad frame shape " + shape_str(s));
  }
  const int div = 1 << cfg_.disc_depth;
  if (s[2] % div != 0 || s[3] % div != 0) {
    throw ConfigError("disc_forward: spatial extents not divisible by 2^depth = " +
                      std::to_string(div));
  }
  Tensor h = frame;
  for (const auto& l : disc_blocks_) h = activation(tape, apply(tape, l, h), Act::kLeakyRelu, cfg_.leak);
  return activation(tape, apply(tape, disc_head_, h), Act::kSigmoid);
}

Tensor CadModel::reconstruction_loss(Tape* tape, const FramePair& pair) const {
  check_pair(pair);
  FlowField flow = flow_forward(tape, pair.prev);
  Tensor pred = warp(tape, pair.prev, flow);
  Tensor li = intensity_loss(tape, pred, pair.curr);
  Tensor lg = gradient_loss(tape, pred, pair.curr, cfg_.vertical_gradient_loss);
  return add(tape, li, lg);
}

Tensor nll_real(Tape* tape, const Tensor& probs) {
  Tensor p = clamp(tape, probs, kProbEps, 1.0 - kProbEps);
  return affine(tape, mean(tape, log_op(tape, p)), -1.0, 0.0);
}

Tensor nll_fake(Tape* tape, const Tensor& probs) {
  Tensor q = affine(tape, clamp(tape, probs, kProbEps, 1.0 - kProbEps), -1.0, 1.0);
  return affine(tape, mean(tape, log_op(tape, q)), -1.0, 0.0);
}

Tensor CadModel::discriminator_loss(Tape* tape, const Tensor& real_curr,
                                    const Tensor& pred_curr) const {
  Tensor term_real = nll_real(tape, disc_forward(tape, real_curr));
  Tensor term_pred = nll_fake(tape, disc_forward(tape, pred_curr));
  return add(tape, term_real, term_pred);
}

Tensor CadModel::generator_adv_loss(Tape* tape, const Tensor& pred_curr) const {
  return nll_real(tape, disc_forward(tape, pred_curr));
}

double CadModel::score(const FramePair& pair) const {
  return reconstruction_loss(nullptr, pair).item();
}

TrainStepResult CadModel::train_step(const FramePair& pair) {
  PendingStep step = begin_step(pair);
  return step.commit();
}

PendingStep CadModel::begin_step(const FramePair& pair) {
  check_pair(pair);
  auto tape = std::make_shared<Tape>();
  FlowField flow = flow_forward(tape.get(), pair.prev);
  Tensor pred = warp(tape.get(), pair.prev, flow);
  Tensor li = intensity_loss(tape.get(), pred, pair.curr);
  Tensor lg = gradient_loss(tape.get(), pred, pair.curr, cfg_.vertical_gradient_loss);
  Tensor recon = add(tape.get(), li, lg);

  PendingStep out;
  out.loss = recon.item();
  CadModel* self = this;
  out.commit = [self, tape, pred, recon, pair]() -> TrainStepResult {
    TrainStepResult r;
    r.recon = recon.item();
    if (!std::isfinite(r.recon)) {
      throw NumericError("train_step: non-finite reconstruction loss");
    }
    if (self->cfg_.use_discriminator) {
      // discriminator first; the predicted frame enters as a constant
      Tape d_tape;
      Tensor ld = self->discriminator_loss(&d_tape, pair.curr, pred.detach());
      r.disc = ld.item();
      if (!std::isfinite(r.disc)) throw NumericError("train_step: non-finite discriminator loss");
      d_tape.backward(ld, self->disc_params_);
      adam_step(self->disc_params_, self->opt_d_);

      // generator objective, adversarial term through the updated discriminator
      Tensor lg_adv = self->generator_adv_loss(tape.get(), pred);
      Tensor overall = add(tape.get(), recon, affine(tape.get(), lg_adv, self->cfg_.lambda, 0.0));
      r.overall = overall.item();
      if (!std::isfinite(r.overall)) throw NumericError("train_step: non-finite generator loss");
      tape->backward(overall, self->gen_params_);
      adam_step(self->gen_params_, self->opt_g_);
    } else {
      r.overall = r.recon;
      tape->backward(recon, self->gen_params_);
      adam_step(self->gen_params_, self->opt_g_);
    }
    return r;
  };
  return out;
}

std::vector<std::pair<std::string, Tensor>> CadModel::named_params() const {
  std::vector<std::pair<std::string, Tensor>> out;
  auto push = [&](const std::string& name, const ConvLayer& l) {
    out.emplace_back(name + ".w", l.w);
    out.emplace_back(name + ".b", l.b);
  };
  for (std::size_t i = 0; i < enc_.size(); ++i) push("gen.enc" + std::to_string(i), enc_[i]);
  push("gen.bottleneck", bottleneck_);
  for (std::size_t i = 0; i < dec_.size(); ++i) push("gen.dec" + std::to_string(i), dec_[i]);
  push("gen.flow_head", flow_head_);
  for (std::size_t i = 0; i < disc_blocks_.size(); ++i) push("disc.block" + std::to_string(i), disc_blocks_[i]);
  push("disc.head", disc_head_);
  return out;
}

void CadModel::load_params(const std::vector<std::pair<std::string, Tensor>>& blobs) {
  auto mine = named_params();
  if (blobs.size() != mine.size()) {
    throw FormatError("checkpoint holds " + std::to_string(blobs.size()) + " blobs, model needs " +
                      std::to_string(mine.size()));
  }
  for (std::size_t i = 0; i < mine.size(); ++i) {
    if (blobs[i].first != mine[i].first || !blobs[i].second.same_shape(mine[i].second)) {
      throw FormatError("checkpoint blob '" + blobs[i].first + "' does not match model parameter '" +
                        mine[i].first + "'");
    }
    std::copy(blobs[i].second.values().begin(), blobs[i].second.values().end(),
              mine[i].second.data());
  }
}

}  // namespace streamad
