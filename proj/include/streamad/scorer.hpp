#pragma once

#include <string>
#include <utility>
#include <vector>

#include "streamad/cad.hpp"
#include "streamad/sample.hpp"

namespace streamad {

/// Anything the admission filter can drive: score() is mutation-free,
/// train_step() performs exactly one optimizer step, and begin_step() runs
/// the forward pass once so an admitted sample trains without repeating it.
/// Note the interface carries no ground-truth labels; those exist only on
/// the evaluation side.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual double score(const FramePair& pair) const = 0;
  virtual PendingStep begin_step(const FramePair& pair) = 0;
  virtual std::vector<std::pair<std::string, Tensor>> named_params() const = 0;

  double train_step(const FramePair& pair) {
    PendingStep s = begin_step(pair);
    const double loss = s.loss;
    s.commit();
    return loss;
  }
};

class CadScorer : public Scorer {
 public:
  explicit CadScorer(CadConfig cfg) : model_(std::move(cfg)) {}
  double score(const FramePair& pair) const override { return model_.score(pair); }
  PendingStep begin_step(const FramePair& pair) override { return model_.begin_step(pair); }
  std::vector<std::pair<std::string, Tensor>> named_params() const override {
    return model_.named_params();
  }
  CadModel& model() { return model_; }
  const CadModel& model() const { return model_; }

 private:
  CadModel model_;
};

}  // namespace streamad
