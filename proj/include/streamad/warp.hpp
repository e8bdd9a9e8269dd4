#pragma once

#include "streamad/sample.hpp"
#include "streamad/tensor.hpp"

namespace streamad {

/// Bilinear warp: out(x,y) = prev sampled at (x + flow_x(x,y), y + flow_y(x,y)).
/// Sample coordinates are clamped to the image border, so every flow value is
/// valid. Differentiable w.r.t. both prev and flow; zero flow reproduces prev
/// bitwise.
Tensor warp(Tape* tape, const Tensor& prev, const FlowField& flow);

}  // namespace streamad
