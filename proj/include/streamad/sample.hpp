#pragma once

#include <string>
#include <vector>

#include "streamad/tensor.hpp"

namespace streamad {

/// Consecutive frame pair (prev = I at t-1, curr = I at t), intensities in
/// [-1,1], shapes identical. For image-per-sample scorers (the autoencoder)
/// prev and curr alias the same tensor.
struct FramePair {
  Tensor prev;
  Tensor curr;
};

/// Per-pixel displacement map, shape [1,2,H,W]; channel 0 = horizontal,
/// channel 1 = vertical, in pixels.
struct FlowField {
  Tensor flow;
};

/// One element of an evaluation stream. The ground-truth label rides along
/// for the evaluator only; scorers and the admission filter never see it.
struct StreamSample {
  FramePair pair;
  int label = 0;    // 1 = anomalous
  int clip = 0;     // source clip id (dataset index for image streams)
  int frame = 0;    // frame index of `curr` within the clip
};

/// Per-timestep record: the unit of all reporting.
struct ScoreRecord {
  long index = 0;
  double loss = 0.0;
  double mu = 0.0;   // filter mean before the decision
  double tau = 0.0;  // filter threshold before the decision
  bool admitted = false;
  int label = -1;  // -1 when unknown
  bool numeric_error = false;
};

}  // namespace streamad
