#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "streamad/rng.hpp"

namespace streamad {

using Shape = std::vector<int>;

long shape_size(const Shape& shape);
std::string shape_str(const Shape& shape);

/// Dense n-dimensional array of doubles with an optional gradient slot.
/// Copies are shallow: they share storage, so a parameter tensor keeps its
/// identity across training steps. Values are treated as immutable once an
/// op has consumed them; only the grad slot is mutated in place.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);

  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, double value);
  static Tensor scalar(double value);
  static Tensor from(Shape shape, std::vector<double> values);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const;
  long size() const;
  bool same_shape(const Tensor& other) const;

  double* data();
  const double* data() const;
  std::span<double> values();
  std::span<const double> values() const;

  bool is_scalar() const;
  double item() const;  // scalar fetch; ContractError if not scalar

  // grad slot
  bool has_grad() const;
  double* grad();
  const double* grad() const;
  std::span<const double> grad_values() const;
  void ensure_grad();  // allocate (zeroed) if absent
  void zero_grad();    // allocate if absent, then clear
  void drop_grad();

  /// Deep copy of the values (no grad, fresh storage).
  Tensor clone() const;
  /// Same values, gradient-free leaf (new handle sharing storage).
  Tensor detach() const;

  bool shares_storage(const Tensor& other) const { return impl_ == other.impl_; }

 private:
  struct Impl {
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad;  // empty until ensure_grad
  };
  std::shared_ptr<Impl> impl_;
};

/// Record of executed differentiable operations. Ops append nodes in
/// execution order; backward() replays them in reverse, which visits every
/// node after all of its consumers. A node participates in the backward
/// sweep only if some consumer allocated its output gradient, so subgraphs
/// unreachable from the loss cost nothing.
class Tape {
 public:
  using BackwardFn = std::function<void()>;

  void record(Tensor output, BackwardFn fn);
  std::size_t node_count() const { return nodes_.size(); }

  /// Seeds d(loss)/d(loss)=1 and propagates. `params` are zero-initialized
  /// up front so parameters unreachable from the loss end with zero grad.
  void backward(Tensor loss, std::span<Tensor> params = {});

 private:
  struct Node {
    Tensor out;
    BackwardFn fn;
  };
  std::vector<Node> nodes_;
};

// ---- differentiable ops ------------------------------------------------
// Every op takes the tape first; passing nullptr runs the forward pass only
// (inference mode, no graph is built).

Tensor add(Tape* tape, const Tensor& a, const Tensor& b);
Tensor sub(Tape* tape, const Tensor& a, const Tensor& b);
Tensor mul(Tape* tape, const Tensor& a, const Tensor& b);
/// Elementwise a*x + b.
Tensor affine(Tape* tape, const Tensor& x, double a, double b);
Tensor sum(Tape* tape, const Tensor& x);   // scalar, accumulated in double
Tensor mean(Tape* tape, const Tensor& x);  // scalar
Tensor reshape(Tape* tape, const Tensor& x, Shape shape);
Tensor log_op(Tape* tape, const Tensor& x);
Tensor clamp(Tape* tape, const Tensor& x, double lo, double hi);

enum class Act { kRelu, kLeakyRelu, kSigmoid, kTanh };
Tensor activation(Tape* tape, const Tensor& x, Act kind, double slope = 0.2);

/// input [N,C,H,W] (*) kernel [K,C,h,w], zero padding, integer stride.
/// Output spatial extent floor((H+2p-h)/stride)+1.
Tensor conv2d(Tape* tape, const Tensor& input, const Tensor& kernel, int stride,
              int padding);
/// Adds bias[k] to every element of channel k of x [N,K,H,W].
Tensor bias_channels(Tape* tape, const Tensor& x, const Tensor& bias);
/// input [N,D] * weight [D,M] + bias [M].
Tensor dense(Tape* tape, const Tensor& input, const Tensor& weight,
             const Tensor& bias);
/// Nearest-neighbour 2x spatial upsampling of [N,C,H,W].
Tensor upsample2(Tape* tape, const Tensor& x);
/// Horizontal first-order gradient with the [1,0,-1] filter, valid positions
/// only: out[..,j] = x[..,j+2] - x[..,j], output width W-2.
Tensor hgrad(Tape* tape, const Tensor& x);

// ---- optimizer ----------------------------------------------------------

enum class OptKind { kAdam, kSgd };

/// Adam (beta1=0.9, beta2=0.999) or plain SGD over one parameter group.
/// Moment buffers are lazily sized to the parameters on the first step.
struct OptimizerState {
  OptKind kind = OptKind::kAdam;
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step_count = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
};

/// One optimizer step over params using their grad slots (missing grad slots
/// are treated as zero). Increments the step counter and clears the grads.
void adam_step(std::span<Tensor> params, OptimizerState& state);

// ---- initialization -----------------------------------------------------

/// Fan-in-scaled uniform init: U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
void init_fan_in_uniform(Tensor& w, long fan_in, Rng& rng);

// ---- verification harness ------------------------------------------------

/// Max over coordinates of |analytic - central difference| /
/// max(|analytic|, |cd|, 1e-8). `fn` must build a scalar from the input on
/// the given tape.
double grad_check(const std::function<Tensor(Tape&, const Tensor&)>& fn,
                  const Tensor& input, double step);

}  // namespace streamad
