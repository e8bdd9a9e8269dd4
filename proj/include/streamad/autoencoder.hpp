#pragma once

#include <cstdint>

#include "streamad/scorer.hpp"

namespace streamad {

struct AutoencoderConfig {
  int input_h = 28;
  int input_w = 28;
  int hidden1 = 256;
  int bottleneck = 64;
  double lr = 1e-4;
  OptKind optimizer = OptKind::kAdam;
  std::uint64_t seed = 1;
};

/// Fully-connected autoencoder (784-256-64-256-784 at the defaults) with relu
/// hidden layers and a tanh output; mean-squared reconstruction error is both
/// the training loss and the anomaly score. Samples are single images riding
/// in pair.curr.
class Autoencoder : public Scorer {
 public:
  explicit Autoencoder(AutoencoderConfig cfg);

  double score(const FramePair& pair) const override;
  PendingStep begin_step(const FramePair& pair) override;
  std::vector<std::pair<std::string, Tensor>> named_params() const override;
  void load_params(const std::vector<std::pair<std::string, Tensor>>& blobs);

 private:
  Tensor loss_graph(Tape* tape, const Tensor& image) const;

  AutoencoderConfig cfg_;
  Tensor w1_, b1_, w2_, b2_, w3_, b3_, w4_, b4_;
  OptimizerState opt_;
  std::vector<Tensor> params_;
};

}  // namespace streamad
