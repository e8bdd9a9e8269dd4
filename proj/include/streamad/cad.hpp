#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "streamad/sample.hpp"
#include "streamad/tensor.hpp"

namespace streamad {

/// 5x5 conv + per-channel bias.
struct ConvLayer {
  Tensor w;  // [K,C,k,k]
  Tensor b;  // [K]
  int stride = 1;
  int padding = 2;
};

struct CadConfig {
  int in_channels = 1;
  int gen_depth = 3;       // reduction blocks; input extents must divide 2^gen_depth
  int gen_base_width = 32;
  int disc_depth = 4;      // stride-2 blocks; extents must divide 2^disc_depth
  int disc_base_width = 32;
  int kernel = 5;
  double leak = 0.2;       // leaky-relu slope
  double max_flow = 8.0;   // pixels; flow head saturates at +-max_flow via tanh
  double lambda = 0.05;    // adversarial weight in the generator objective
  double lr_g = 1e-4;
  double lr_d = 1e-5;
  OptKind optimizer = OptKind::kAdam;
  bool use_discriminator = true;  // false: pure reconstruction training (lambda ignored)
  bool vertical_gradient_loss = false;  // add the vertical first-order term
  std::uint64_t seed = 1;
};

struct TrainStepResult {
  double recon = 0.0;  // pre-update reconstruction loss
  double disc = 0.0;   // pre-update discriminator loss (0 when disabled)
  double overall = 0.0;
};

/// A forward pass whose training step has not been committed yet. Dropping it
/// discards the tape and leaves all parameters untouched.
struct PendingStep {
  double loss = 0.0;  // the anomaly score of the sample
  std::function<TrainStepResult()> commit;
};

// standalone losses, each mean-normalized over contributing elements
Tensor intensity_loss(Tape* tape, const Tensor& pred, const Tensor& actual);
Tensor gradient_loss(Tape* tape, const Tensor& pred, const Tensor& actual,
                     bool vertical_too = false);

// negative-log-likelihood terms over a probability map, clamped to
// [1e-7, 1-1e-7] before the log
Tensor nll_real(Tape* tape, const Tensor& probs);  // -mean log p
Tensor nll_fake(Tape* tape, const Tensor& probs);  // -mean log(1 - p)

/// Frame-prediction anomaly scorer: a flow generator predicts per-pixel
/// displacement from the previous frame alone, the warp reconstructs the
/// current frame, and reconstruction error is the anomaly score. An optional
/// patch discriminator sharpens the generator adversarially.
class CadModel {
 public:
  explicit CadModel(CadConfig cfg);

  const CadConfig& config() const { return cfg_; }

  FlowField flow_forward(Tape* tape, const Tensor& prev) const;
  /// Patch probability map in (0,1), shape [1,1,H/2^depth,W/2^depth].
  Tensor disc_forward(Tape* tape, const Tensor& frame) const;

  Tensor reconstruction_loss(Tape* tape, const FramePair& pair) const;
  Tensor discriminator_loss(Tape* tape, const Tensor& real_curr, const Tensor& pred_curr) const;
  Tensor generator_adv_loss(Tape* tape, const Tensor& pred_curr) const;

  /// Reconstruction loss without any parameter mutation.
  double score(const FramePair& pair) const;

  /// One discriminator step on L_D, then one generator step on
  /// L_O = L_R + lambda * L_G. Returns pre-update loss values. A non-finite
  /// loss aborts the step with NumericError, parameters unchanged.
  TrainStepResult train_step(const FramePair& pair);

  /// Forward pass only; commit() finishes the backward pass and both
  /// optimizer steps without re-running the forward.
  PendingStep begin_step(const FramePair& pair);

  std::vector<Tensor>& generator_params() { return gen_params_; }
  std::vector<Tensor>& discriminator_params() { return disc_params_; }
  std::vector<std::pair<std::string, Tensor>> named_params() const;
  void load_params(const std::vector<std::pair<std::string, Tensor>>& blobs);

 private:
  CadConfig cfg_;
  std::vector<ConvLayer> enc_;
  ConvLayer bottleneck_;
  std::vector<ConvLayer> dec_;
  ConvLayer flow_head_;
  std::vector<ConvLayer> disc_blocks_;
  ConvLayer disc_head_;
  OptimizerState opt_g_;
  OptimizerState opt_d_;
  std::vector<Tensor> gen_params_;
  std::vector<Tensor> disc_params_;
};

}  // namespace streamad
