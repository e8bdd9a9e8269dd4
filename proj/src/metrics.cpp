#include "streamad/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "streamad/errors.hpp"

namespace streamad {

namespace {

void check_two_classes(const LabeledScores& ls, const char* what) {
  if (ls.scores.size() != ls.labels.size()) {
    throw MetricError(std::string(what) + ": score/label lengths differ");
  }
  long pos = 0, neg = 0;
  for (int l : ls.labels) (l ? pos : neg) += 1;
  if (pos == 0 || neg == 0) {
    throw MetricError(std::string(what) + ": both classes must be present");
  }
}

}  // namespace

std::vector<RocPoint> roc_curve(const LabeledScores& ls) {
  check_two_classes(ls, "roc_curve");
  const std::size_t n = ls.scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return ls.scores[a] > ls.scores[b]; });

  double pos = 0, neg = 0;
  for (int l : ls.labels) (l ? pos : neg) += 1;

  std::vector<RocPoint> points;
  points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  double tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < n) {
    const double thresh = ls.scores[order[i]];
    // consume the whole tie group: predictions flip together at a threshold
    while (i < n && ls.scores[order[i]] == thresh) {
      (ls.labels[order[i]] ? tp : fp) += 1;
      ++i;
    }
    points.push_back({thresh, fp / neg, tp / pos});
  }
  points.push_back({-std::numeric_limits<double>::infinity(), 1.0, 1.0});
  return points;
}

double auc(const LabeledScores& ls) {
  check_two_classes(ls, "auc");
  const std::size_t n = ls.scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return ls.scores[a] < ls.scores[b]; });

  // Midranks doubled, so everything stays an exact integer; rank of element
  // in a tie spanning positions [i, j] (1-based) is (i + j) / 2.
  double pos = 0, neg = 0;
  for (int l : ls.labels) (l ? pos : neg) += 1;
  double rank2_sum_pos = 0;  // sum over anomalous of 2*midrank
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && ls.scores[order[j + 1]] == ls.scores[order[i]]) ++j;
    const double rank2 = static_cast<double>(i + 1 + j + 1);  // 2 * midrank
    for (std::size_t k = i; k <= j; ++k) {
      if (ls.labels[order[k]]) rank2_sum_pos += rank2;
    }
    i = j + 1;
  }
  const double u2 = rank2_sum_pos - pos * (pos + 1.0);  // 2 * Mann-Whitney U
  return u2 / (2.0 * pos * neg);
}

double auc_trapezoid(const LabeledScores& ls) {
  const std::vector<RocPoint> pts = roc_curve(ls);
  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    area += (pts[i].fpr - pts[i - 1].fpr) * 0.5 * (pts[i].tpr + pts[i - 1].tpr);
  }
  return area;
}

double eer(const LabeledScores& ls) {
  const std::vector<RocPoint> pts = roc_curve(ls);
  // walk toward increasing fpr; fnr = 1 - tpr decreases, find the crossing
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double f1 = pts[i - 1].fpr, m1 = 1.0 - pts[i - 1].tpr;
    const double f2 = pts[i].fpr, m2 = 1.0 - pts[i].tpr;
    if (f2 < m2) continue;  // still below the diagonal
    const double df = f2 - f1;
    const double dm = m2 - m1;
    const double denom = df - dm;
    if (denom == 0.0) return 0.5 * (f1 + m1);
    const double t = (m1 - f1) / denom;
    return f1 + t * df;
  }
  return 1.0;
}

double auc_inverted(const LabeledScores& ls) {
  LabeledScores neg;
  neg.labels = ls.labels;
  neg.scores.reserve(ls.scores.size());
  for (double s : ls.scores) neg.scores.push_back(-s);
  return auc(neg);
}

std::vector<double> minmax_normalize_per_group(const std::vector<double>& scores,
                                               const std::vector<int>& group_ids) {
  if (scores.size() != group_ids.size()) {
    throw MetricError("minmax_normalize_per_group: score/group lengths differ");
  }
  std::map<int, std::pair<double, double>> range;  // group -> (min, max)
  for (std::size_t i = 0; i < scores.size(); ++i) {
    auto [it, fresh] = range.try_emplace(group_ids[i], scores[i], scores[i]);
    if (!fresh) {
      it->second.first = std::min(it->second.first, scores[i]);
      it->second.second = std::max(it->second.second, scores[i]);
    }
  }
  std::vector<double> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const auto& [lo, hi] = range[group_ids[i]];
    out[i] = hi > lo ? (scores[i] - lo) / (hi - lo) : 0.0;
  }
  return out;
}

Aggregate aggregate(const std::vector<double>& values) {
  if (values.empty()) throw InputError("aggregate: empty replicate list");
  Aggregate a;
  for (double v : values) a.mean += v;
  a.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - a.mean) * (v - a.mean);
    a.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return a;
}

}  // namespace streamad
