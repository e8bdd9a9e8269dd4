#include "streamad/em_filter.hpp"

#include <cmath>

#include "streamad/errors.hpp"

namespace streamad {

AdmissionDecision admit(double loss, const EmFilterState& state) {
  AdmissionDecision d;
  d.loss = loss;
  d.mu_before = state.mu;
  d.tau_before = state.tau;
  if (!std::isfinite(loss)) {
    d.numeric_error = true;
    d.admitted = false;
    return d;
  }
  if (!state.initialized || state.warmup_remaining > 0) {
    d.admitted = true;
  } else {
    d.admitted = loss < state.mu + state.tau;
  }
  return d;
}

EmFilterState update(double loss, EmFilterState state) {
  if (!std::isfinite(loss)) throw ContractError("filter update on non-finite loss");
  if (!state.initialized) {
    state.mu = loss;
    state.tau = state.tau_floor;
    state.initialized = true;
  }
  const double delta = loss - state.mu;
  state.mu += state.alpha * delta;
  state.tau += state.alpha * (delta - state.tau);
  if (state.tau < state.tau_floor) state.tau = state.tau_floor;
  if (state.warmup_remaining > 0) state.warmup_remaining -= 1;
  return state;
}

ScoreRecord filter_step(long index, const StreamSample& sample, Scorer& scorer,
                        EmFilterState& state, bool admit_all) {
  ScoreRecord rec;
  rec.index = index;
  rec.label = sample.label;

  PendingStep pending;
  try {
    pending = scorer.begin_step(sample.pair);
  } catch (const NumericError&) {
    rec.loss = std::nan("");
    rec.mu = state.mu;
    rec.tau = state.tau;
    rec.admitted = false;
    rec.numeric_error = true;
    return rec;
  }

  AdmissionDecision d = admit(pending.loss, state);
  if (admit_all && !d.numeric_error) d.admitted = true;
  rec.loss = d.loss;
  rec.mu = d.mu_before;
  rec.tau = d.tau_before;
  rec.admitted = d.admitted;
  rec.numeric_error = d.numeric_error;
  if (d.admitted) {
    pending.commit();
    state = update(d.loss, state);
  }
  return rec;
}

}  // namespace streamad
