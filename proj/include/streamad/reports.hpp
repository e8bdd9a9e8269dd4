#pragma once

#include <string>
#include <vector>

#include "streamad/metrics.hpp"
#include "streamad/sample.hpp"

namespace streamad {

/// Header `index,loss,mu,tau,admitted,label`; doubles carry full precision
/// so a read-back reproduces every field.
void write_score_csv(const std::string& path, const std::vector<ScoreRecord>& records);
std::vector<ScoreRecord> read_score_csv(const std::string& path);

/// One `clip frame label` row per emitted sample; replays a mixed stream.
void write_stream_manifest(const std::string& path, const std::vector<StreamSample>& samples);

struct RocSeries {
  std::string name;
  std::vector<RocPoint> points;
};

/// Standalone SVG: unit axes, diagonal reference line, one polyline per
/// series. Points must lie in [0,1]^2.
void render_roc_svg(const std::string& path, const std::vector<RocSeries>& series);

struct ReplicateResult {
  std::string name;
  double auc = 0.0;
  double eer = 0.0;
  long admitted = 0;
  long total = 0;
  long crossover_index = -1;
};

/// Structured text report: per-replicate table, aggregate AUC, notes.
void write_metric_report(const std::string& path, const std::string& title,
                         const std::vector<ReplicateResult>& replicates,
                         const std::vector<std::string>& notes);

}  // namespace streamad
