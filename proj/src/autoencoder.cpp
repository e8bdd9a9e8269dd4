#include "streamad/autoencoder.hpp"

#include <cmath>

#include "streamad/errors.hpp"

namespace streamad {

Autoencoder::Autoencoder(AutoencoderConfig cfg) : cfg_(cfg) {
  if (cfg_.lr <= 0) throw ConfigError("autoencoder learning rate must be positive");
  const int d = cfg_.input_h * cfg_.input_w;
  Rng rng = make_rng(cfg_.seed, 23);
  auto dense_pair = [&](int in, int out, Tensor& w, Tensor& b) {
    w = Tensor({in, out});
    b = Tensor({out});
    init_fan_in_uniform(w, in, rng);
  };
  dense_pair(d, cfg_.hidden1, w1_, b1_);
  dense_pair(cfg_.hidden1, cfg_.bottleneck, w2_, b2_);
  dense_pair(cfg_.bottleneck, cfg_.hidden1, w3_, b3_);
  dense_pair(cfg_.hidden1, d, w4_, b4_);
  params_ = {w1_, b1_, w2_, b2_, w3_, b3_, w4_, b4_};
  opt_.kind = cfg_.optimizer;
  opt_.lr = cfg_.lr;
}

Tensor Autoencoder::loss_graph(Tape* tape, const Tensor& image) const {
  const int d = cfg_.input_h * cfg_.input_w;
  if (image.size() != d) {
    throw DimensionError("autoencoder expects " + std::to_string(cfg_.input_h) + "x" +
                         std::to_string(cfg_.input_w) + " inputs, got " + shape_str(image.shape()));
  }
  Tensor x = reshape(tape, image, {1, d});
  Tensor h = activation(tape, dense(tape, x, w1_, b1_), Act::kRelu);
  h = activation(tape, dense(tape, h, w2_, b2_), Act::kRelu);
  h = activation(tape, dense(tape, h, w3_, b3_), Act::kRelu);
  Tensor recon = activation(tape, dense(tape, h, w4_, b4_), Act::kTanh);
  Tensor diff = sub(tape, recon, x);
  return mean(tape, mul(tape, diff, diff));
}

double Autoencoder::score(const FramePair& pair) const {
  return loss_graph(nullptr, pair.curr).item();
}

PendingStep Autoencoder::begin_step(const FramePair& pair) {
  auto tape = std::make_shared<Tape>();
  Tensor loss = loss_graph(tape.get(), pair.curr);
  PendingStep out;
  out.loss = loss.item();
  Autoencoder* self = this;
  out.commit = [self, tape, loss]() -> TrainStepResult {
    TrainStepResult r;
    r.recon = loss.item();
    r.overall = r.recon;
    if (!std::isfinite(r.recon)) throw NumericError("autoencoder: non-finite loss");
    tape->backward(loss, self->params_);
    adam_step(self->params_, self->opt_);
    return r;
  };
  return out;
}

std::vector<std::pair<std::string, Tensor>> Autoencoder::named_params() const {
  return {{"ae.w1", w1_}, {"ae.b1", b1_}, {"ae.w2", w2_}, {"ae.b2", b2_},
          {"ae.w3", w3_}, {"ae.b3", b3_}, {"ae.w4", w4_}, {"ae.b4", b4_}};
}

void Autoencoder::load_params(const std::vector<std::pair<std::string, Tensor>>& blobs) {
  auto mine = named_params();
  if (blobs.size() != mine.size()) throw FormatError("checkpoint does not match autoencoder");
  for (std::size_t i = 0; i < mine.size(); ++i) {
    if (blobs[i].first != mine[i].first || !blobs[i].second.same_shape(mine[i].second)) {
      throw FormatError("checkpoint blob '" + blobs[i].first + "' does not match autoencoder");
    }
    std::copy(blobs[i].second.values().begin(), blobs[i].second.values().end(),
              mine[i].second.data());
  }
}

}  // namespace streamad
