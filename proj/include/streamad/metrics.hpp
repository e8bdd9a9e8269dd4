#pragma once

#include <vector>

namespace streamad {

/// Frame-level scores with ground truth; higher score = more anomalous.
struct LabeledScores {
  std::vector<double> scores;
  std::vector<int> labels;  // 0 normal, 1 anomalous
};

struct RocPoint {
  double threshold;
  double fpr;
  double tpr;
};

struct Aggregate {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation; 0 for a single value
};

/// Thresholds sweep the distinct score values plus +/-inf sentinels; a frame
/// is predicted anomalous iff score >= threshold. Points come out in order
/// of decreasing threshold (fpr and tpr nondecreasing).
std::vector<RocPoint> roc_curve(const LabeledScores& ls);

/// Mann-Whitney statistic P(score_anom > score_norm) + 0.5*P(tie), computed
/// via midranks; exact under ties and equal to the trapezoidal ROC area.
double auc(const LabeledScores& ls);

/// Operating point where fpr = 1 - tpr, interpolated linearly between the
/// adjacent ROC points straddling the diagonal.
double eer(const LabeledScores& ls);

/// Mean and sample standard deviation of replicate values.
Aggregate aggregate(const std::vector<double>& values);

/// AUC under inverted polarity (lower score = more anomalous); diagnoses the
/// regime where the scorer has locked onto the anomalous class.
double auc_inverted(const LabeledScores& ls);

/// Min-max normalization within each group (e.g. per test clip); groups with
/// a constant score map to 0. For cross-method comparisons only; raw scores
/// are the default everywhere.
std::vector<double> minmax_normalize_per_group(const std::vector<double>& scores,
                                               const std::vector<int>& group_ids);

/// Trapezoidal area under roc_curve; reference route for the rank-based auc.
double auc_trapezoid(const LabeledScores& ls);

}  // namespace streamad
