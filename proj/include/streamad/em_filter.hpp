#pragma once

#include "streamad/sample.hpp"
#include "streamad/scorer.hpp"

namespace streamad {

/// Streaming admission state: a sample may train the scorer iff its loss is
/// below mu + tau. mu tracks recent admitted losses and tau adapts at rate
/// alpha; both update only on admitted samples. During the warm-up window
/// every sample is admitted, with mu bootstrapped from the first observed
/// loss and tau from the floor.
struct EmFilterState {
  double mu = 0.0;
  double tau = 0.0;
  double alpha = 0.1;
  double tau_floor = 5e-5;
  int warmup_remaining = 100;
  bool initialized = false;  // becomes true on the first update
};

struct AdmissionDecision {
  bool admitted = false;
  double loss = 0.0;
  double mu_before = 0.0;
  double tau_before = 0.0;
  bool numeric_error = false;
};

/// Pure decision; never mutates state. Non-finite losses are rejected with
/// the numeric-error flag set.
AdmissionDecision admit(double loss, const EmFilterState& state);

/// The update for an admitted sample: delta = loss - mu, mu += alpha*delta,
/// tau += alpha*(delta - tau), tau clamped to the floor. Counts the warm-up
/// window down. Call only for admitted samples.
EmFilterState update(double loss, EmFilterState state);

/// One pass of the streaming loop over a single sample: score, decide,
/// and - when admitted - commit exactly one scorer train step (reusing the
/// forward pass) plus one filter update. A rejected sample leaves the scorer
/// and the filter state untouched. `admit_all` bypasses the decision (the
/// no-filter baseline) while keeping the bookkeeping comparable.
ScoreRecord filter_step(long index, const StreamSample& sample, Scorer& scorer,
                        EmFilterState& state, bool admit_all = false);

}  // namespace streamad
