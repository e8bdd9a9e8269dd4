#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "streamad/errors.hpp"
#include "streamad/metrics.hpp"
#include "streamad/rng.hpp"

using namespace streamad;

namespace {

// exhaustive pairwise Mann-Whitney: the brute-force oracle
double auc_brute_force(const LabeledScores& ls) {
  double wins = 0, ties = 0;
  long pairs = 0;
  for (std::size_t i = 0; i < ls.scores.size(); ++i) {
    if (!ls.labels[i]) continue;
    for (std::size_t j = 0; j < ls.scores.size(); ++j) {
      if (ls.labels[j]) continue;
      ++pairs;
      if (ls.scores[i] > ls.scores[j]) {
        wins += 1;
      } else if (ls.scores[i] == ls.scores[j]) {
        ties += 1;
      }
    }
  }
  return (wins + 0.5 * ties) / static_cast<double>(pairs);
}

LabeledScores random_instance(Rng& rng, int n, bool with_ties) {
  LabeledScores ls;
  for (int i = 0; i < n; ++i) {
    double v = uniform(rng, 0, 1);
    if (with_ties) v = std::floor(v * 12) / 12.0;
    ls.scores.push_back(v);
    ls.labels.push_back(uniform01(rng) < 0.4 ? 1 : 0);
  }
  // ensure both classes exist
  ls.labels[0] = 0;
  ls.labels[1] = 1;
  return ls;
}

}  // namespace

TEST_SUITE_BEGIN("metrics");

TEST_CASE("roc_curve: perfect separation passes through (0,1)") {
  const LabeledScores ls{{0.9, 0.1}, {1, 0}};
  const auto pts = roc_curve(ls);
  bool corner = false;
  for (const RocPoint& p : pts) corner |= (p.fpr == 0.0 && p.tpr == 1.0);
  CHECK(corner);
  CHECK(pts.front().fpr == 0.0);
  CHECK(pts.front().tpr == 0.0);
  CHECK(pts.back().fpr == 1.0);
  CHECK(pts.back().tpr == 1.0);
}

TEST_CASE("roc_curve: all-tied scores collapse to the corners") {
  const LabeledScores ls{{0.5, 0.5, 0.5, 0.5}, {1, 0, 1, 0}};
  const auto pts = roc_curve(ls);
  REQUIRE(pts.size() == 3);  // +inf sentinel, the tie group, -inf sentinel
  CHECK(pts[1].fpr == 1.0);
  CHECK(pts[1].tpr == 1.0);
}

TEST_CASE("roc_curve: hand-enumerated four-point example") {
  const LabeledScores ls{{3, 2, 1, 0}, {1, 0, 1, 0}};
  const auto pts = roc_curve(ls);
  REQUIRE(pts.size() == 6);
  CHECK(pts[1].fpr == 0.0);
  CHECK(pts[1].tpr == 0.5);
  CHECK(pts[2].fpr == 0.5);
  CHECK(pts[2].tpr == 0.5);
  CHECK(pts[3].fpr == 0.5);
  CHECK(pts[3].tpr == 1.0);
  CHECK(pts[4].fpr == 1.0);
  CHECK(pts[4].tpr == 1.0);
  // monotone in both axes as threshold decreases
  for (std::size_t i = 1; i < pts.size(); ++i) {
    CHECK(pts[i].fpr >= pts[i - 1].fpr);
    CHECK(pts[i].tpr >= pts[i - 1].tpr);
  }
}

TEST_CASE("auc: fixed examples") {
  CHECK(auc({{0.9, 0.1}, {1, 0}}) == 1.0);
  CHECK(auc({{0.5, 0.5, 0.5, 0.5}, {1, 0, 1, 0}}) == 0.5);
  CHECK(auc({{3, 2, 1, 0}, {1, 0, 1, 0}}) == 0.75);
}

TEST_CASE("auc: single-class input is a metric error") {
  CHECK_THROWS_AS(auc({{1, 2}, {1, 1}}), MetricError);
  CHECK_THROWS_AS(eer({{1, 2}, {0, 0}}), MetricError);
  CHECK_THROWS_AS(roc_curve({{1, 2}, {0, 0}}), MetricError);
}

TEST_CASE("auc matches the exhaustive pairwise oracle on random instances") {
  Rng rng = make_rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const LabeledScores ls = random_instance(rng, 10 + static_cast<int>(rng() % 190), trial % 2);
    CHECK(std::fabs(auc(ls) - auc_brute_force(ls)) < 1e-10);
  }
}

TEST_CASE("auc complement identity under label flip") {
  Rng rng = make_rng(31337);
  for (int trial = 0; trial < 40; ++trial) {
    const LabeledScores ls = random_instance(rng, 10 + static_cast<int>(rng() % 90), trial % 2);
    LabeledScores flipped = ls;
    for (int& l : flipped.labels) l = 1 - l;
    CHECK(auc(ls) + auc(flipped) == 1.0);
  }
}

TEST_CASE("auc_inverted mirrors auc") {
  Rng rng = make_rng(4096);
  const LabeledScores ls = random_instance(rng, 100, true);
  CHECK(auc_inverted(ls) == doctest::Approx(1.0 - auc(ls)).epsilon(1e-12));
}

TEST_CASE("auc is invariant under strictly increasing transforms") {
  Rng rng = make_rng(555);
  const LabeledScores ls = random_instance(rng, 120, false);
  LabeledScores warped = ls;
  for (double& s : warped.scores) s = std::exp(3.0 * s) + 7.0;
  CHECK(auc(ls) == auc(warped));
}

TEST_CASE("rank-based auc equals trapezoidal ROC area") {
  Rng rng = make_rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const LabeledScores ls = random_instance(rng, 10 + static_cast<int>(rng() % 9990), trial % 2);
    CHECK(std::fabs(auc(ls) - auc_trapezoid(ls)) < 1e-10);
  }
}

TEST_CASE("eer: fixed examples") {
  CHECK(eer({{0.9, 0.1}, {1, 0}}) == 0.0);
  CHECK(eer({{0.1, 0.9}, {1, 0}}) == 1.0);
  CHECK(eer({{3, 2, 1, 0}, {1, 0, 1, 0}}) == doctest::Approx(0.5));
}

TEST_CASE("eer stays in [0,1] and vanishes iff classes separate") {
  Rng rng = make_rng(123);
  for (int trial = 0; trial < 25; ++trial) {
    const LabeledScores ls = random_instance(rng, 60, trial % 2);
    const double e = eer(ls);
    CHECK(e >= 0.0);
    CHECK(e <= 1.0);
    double min_pos = 1e300, max_neg = -1e300;
    for (std::size_t i = 0; i < ls.scores.size(); ++i) {
      if (ls.labels[i]) {
        min_pos = std::min(min_pos, ls.scores[i]);
      } else {
        max_neg = std::max(max_neg, ls.scores[i]);
      }
    }
    if (min_pos > max_neg) {
      CHECK(e == 0.0);
    } else {
      CHECK(e > 0.0);
    }
  }
}

TEST_CASE("per-group min-max normalization") {
  const std::vector<double> scores = {1.0, 3.0, 2.0, 10.0, 30.0, 5.0, 5.0};
  const std::vector<int> groups = {0, 0, 0, 1, 1, 2, 2};
  const auto norm = minmax_normalize_per_group(scores, groups);
  CHECK(norm[0] == 0.0);
  CHECK(norm[1] == 1.0);
  CHECK(norm[2] == doctest::Approx(0.5));
  CHECK(norm[3] == 0.0);
  CHECK(norm[4] == 1.0);
  CHECK(norm[5] == 0.0);  // constant group maps to 0
  CHECK(norm[6] == 0.0);
  // normalization is per-group monotone, so within-group ranking is kept
  CHECK_THROWS_AS(minmax_normalize_per_group({1.0}, {0, 1}), MetricError);
}

TEST_CASE("aggregate: fixed examples") {
  const Aggregate a = aggregate({0.8, 0.8, 0.8});
  CHECK(a.mean == doctest::Approx(0.8));
  CHECK(a.sd == doctest::Approx(0.0).epsilon(1e-12));
  const Aggregate single = aggregate({1.0});
  CHECK(single.mean == 1.0);
  CHECK(single.sd == 0.0);
  const Aggregate spread = aggregate({0.7, 0.8, 0.9});
  CHECK(spread.mean == doctest::Approx(0.8));
  CHECK(spread.sd == doctest::Approx(0.1).epsilon(1e-12));
  CHECK_THROWS_AS(aggregate({}), InputError);
}

TEST_SUITE_END();
