#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "streamad/em_filter.hpp"
#include "streamad/errors.hpp"

using namespace streamad;

namespace {

// scripted scorer: emits preset losses and counts committed steps
class FakeScorer : public Scorer {
 public:
  explicit FakeScorer(std::vector<double> losses) : losses_(std::move(losses)) {}

  double score(const FramePair&) const override { return losses_[cursor_]; }

  PendingStep begin_step(const FramePair&) override {
    PendingStep s;
    s.loss = losses_[cursor_++];
    s.commit = [this, loss = s.loss]() {
      ++commits_;
      if (!std::isfinite(loss)) throw NumericError("fake scorer numeric failure");
      return TrainStepResult{loss, 0.0, loss};
    };
    return s;
  }

  std::vector<std::pair<std::string, Tensor>> named_params() const override { return {}; }

  long commits() const { return commits_; }

 private:
  std::vector<double> losses_;
  mutable std::size_t cursor_ = 0;
  long commits_ = 0;
};

EmFilterState warm_state(double mu, double tau, double alpha = 0.1, double floor = 5e-5) {
  EmFilterState st;
  st.mu = mu;
  st.tau = tau;
  st.alpha = alpha;
  st.tau_floor = floor;
  st.warmup_remaining = 0;
  st.initialized = true;
  return st;
}


bool same_state(const EmFilterState& a, const EmFilterState& b) {
  return a.mu == b.mu && a.tau == b.tau && a.alpha == b.alpha && a.tau_floor == b.tau_floor &&
         a.warmup_remaining == b.warmup_remaining && a.initialized == b.initialized;
}

StreamSample dummy_sample(int label = 0) {
  StreamSample s;
  s.pair = FramePair{Tensor::scalar(0.0), Tensor::scalar(0.0)};
  s.label = label;
  return s;
}

}  // namespace

TEST_SUITE_BEGIN("em_filter");

TEST_CASE("admit: strict threshold mu + tau") {
  const EmFilterState st = warm_state(1.0, 0.5);
  CHECK(admit(1.2, st).admitted);        // 1.2 < 1.5
  CHECK_FALSE(admit(1.5, st).admitted);  // boundary is rejected
  CHECK_FALSE(admit(1.6, st).admitted);
  const AdmissionDecision d = admit(1.2, st);
  CHECK(d.mu_before == 1.0);
  CHECK(d.tau_before == 0.5);
  CHECK(d.loss == 1.2);
}

TEST_CASE("admit: warm-up admits anything finite") {
  EmFilterState st = warm_state(0.0, 0.0);
  st.warmup_remaining = 3;
  CHECK(admit(1e6, st).admitted);
}

TEST_CASE("admit: non-finite loss is rejected with the numeric flag") {
  const EmFilterState st = warm_state(1.0, 0.5);
  const AdmissionDecision d = admit(std::numeric_limits<double>::quiet_NaN(), st);
  CHECK_FALSE(d.admitted);
  CHECK(d.numeric_error);
  CHECK_FALSE(admit(std::numeric_limits<double>::infinity(), st).admitted);
}

TEST_CASE("update: hand-derived values") {
  const EmFilterState st = warm_state(1.0, 0.1);
  const EmFilterState next = update(2.0, st);
  // delta = 1.0; mu' = 1.0 + 0.1*1.0; tau' = 0.1 + 0.1*(1.0 - 0.1)
  CHECK(next.mu == 1.0 + 0.1 * (2.0 - 1.0));
  CHECK(next.tau == 0.1 + 0.1 * ((2.0 - 1.0) - 0.1));
  CHECK(next.mu == doctest::Approx(1.1).epsilon(1e-15));
  CHECK(next.tau == doctest::Approx(0.19).epsilon(1e-15));
}

TEST_CASE("update: loss equal to mu decays tau toward the floor") {
  const EmFilterState st = warm_state(0.7, 0.2);
  const EmFilterState next = update(0.7, st);
  CHECK(next.mu == 0.7);
  CHECK(next.tau == doctest::Approx((1.0 - 0.1) * 0.2).epsilon(1e-15));
}

TEST_CASE("update: tau never drops below the floor") {
  EmFilterState st = warm_state(1.0, 1e-6);
  st.tau_floor = 5e-5;
  const EmFilterState next = update(1.0, st);  // delta = 0
  CHECK(next.tau == 5e-5);

  // stays clamped under many decays
  EmFilterState s2 = warm_state(1.0, 0.3);
  s2.tau_floor = 5e-5;
  for (int i = 0; i < 200; ++i) {
    s2 = update(1.0, s2);
    CHECK(s2.tau >= 5e-5);
  }
  CHECK(s2.tau == 5e-5);
}

TEST_CASE("update: first call bootstraps mu from the first loss and tau from the floor") {
  EmFilterState st;
  st.alpha = 0.25;
  st.tau_floor = 5e-5;
  st.warmup_remaining = 10;
  const EmFilterState next = update(3.5, st);
  CHECK(next.initialized);
  CHECK(next.mu == 3.5);  // delta = 0 on the bootstrap sample
  CHECK(next.tau == 5e-5);
  CHECK(next.warmup_remaining == 9);
}

TEST_CASE("filter_step: rejected sample leaves scorer and state bitwise unchanged") {
  FakeScorer scorer({9.0});
  EmFilterState st = warm_state(1.0, 0.5);
  const EmFilterState before = st;
  const ScoreRecord rec = filter_step(0, dummy_sample(1), scorer, st);
  CHECK_FALSE(rec.admitted);
  CHECK(rec.loss == 9.0);
  CHECK(rec.mu == 1.0);
  CHECK(rec.tau == 0.5);
  CHECK(rec.label == 1);
  CHECK(scorer.commits() == 0);
  CHECK(same_state(before, st));
}

TEST_CASE("filter_step: admitted sample trains once and updates the filter") {
  FakeScorer scorer({2.0});
  EmFilterState st = warm_state(1.9, 0.5);
  const ScoreRecord rec = filter_step(7, dummy_sample(0), scorer, st);
  CHECK(rec.admitted);
  CHECK(rec.index == 7);
  CHECK(scorer.commits() == 1);
  const EmFilterState expect = update(2.0, warm_state(1.9, 0.5));
  CHECK(st.mu == expect.mu);
  CHECK(st.tau == expect.tau);
}

TEST_CASE("filter_step: numeric failure emits a flagged record and mutates nothing") {
  FakeScorer scorer({std::numeric_limits<double>::quiet_NaN()});
  EmFilterState st = warm_state(1.0, 0.5);
  const EmFilterState before = st;
  const ScoreRecord rec = filter_step(0, dummy_sample(), scorer, st);
  CHECK(rec.numeric_error);
  CHECK_FALSE(rec.admitted);
  CHECK(scorer.commits() == 0);
  CHECK(same_state(before, st));
}

TEST_CASE("filter_step: admit_all bypasses the gate but keeps bookkeeping") {
  FakeScorer scorer({100.0});
  EmFilterState st = warm_state(1.0, 0.1);
  const ScoreRecord rec = filter_step(0, dummy_sample(), scorer, st, /*admit_all=*/true);
  CHECK(rec.admitted);
  CHECK(scorer.commits() == 1);
  CHECK(st.mu > 1.0);
}

TEST_CASE("constant-loss stream with covering threshold admits forever") {
  // closed form: delta and tau both decay by (1-alpha), tau stays >= delta
  const double c = 2.0;
  EmFilterState st = warm_state(1.0, 1.5, 0.1);  // tau0 >= c - mu0
  for (int t = 0; t < 10000; ++t) {
    const AdmissionDecision d = admit(c, st);
    REQUIRE(d.admitted);
    st = update(c, st);
  }
  CHECK(st.mu == doctest::Approx(c).epsilon(1e-9));
}

TEST_CASE("under a constant admitted loss, mu converges geometrically at rate 1-alpha") {
  const double c = 4.0, alpha = 0.1, mu0 = 1.0;
  EmFilterState st = warm_state(mu0, 10.0, alpha);
  double bound = std::fabs(mu0 - c);
  for (int t = 1; t <= 300; ++t) {
    st = update(c, st);
    bound *= (1.0 - alpha);
    CHECK(std::fabs(st.mu - c) <= bound + 1e-9);
  }
}

TEST_CASE("a single spike above mu + tau is rejected and leaves no trace") {
  FakeScorer scorer({1.0, 50.0, 1.0});
  EmFilterState st = warm_state(1.0, 0.2);
  filter_step(0, dummy_sample(), scorer, st);
  const EmFilterState mid = st;
  const ScoreRecord spike = filter_step(1, dummy_sample(1), scorer, st);
  CHECK_FALSE(spike.admitted);
  CHECK(same_state(mid, st));
  const ScoreRecord after = filter_step(2, dummy_sample(), scorer, st);
  CHECK(after.admitted);
  CHECK(after.mu == mid.mu);
}

TEST_CASE("replay determinism: state is a function of the admitted-loss subsequence") {
  const std::vector<double> losses = {1.0, 1.2, 8.0, 1.1, 0.9, 7.5, 1.05, 1.0};
  auto run = [&](bool with_rejected) {
    EmFilterState st = warm_state(1.0, 0.4);
    for (double l : losses) {
      const AdmissionDecision d = admit(l, st);
      if (d.admitted) {
        st = update(l, st);
      } else {
        CHECK(with_rejected);  // the probe run must reject something
      }
    }
    return st;
  };
  const EmFilterState full = run(true);

  EmFilterState replayed = warm_state(1.0, 0.4);
  EmFilterState probe = warm_state(1.0, 0.4);
  for (double l : losses) {
    if (admit(l, probe).admitted) {
      probe = update(l, probe);
      replayed = update(l, replayed);
    }
  }
  CHECK(full.mu == replayed.mu);
  CHECK(full.tau == replayed.tau);
}

TEST_SUITE_END();
