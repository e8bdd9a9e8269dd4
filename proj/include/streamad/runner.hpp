#pragma once

#include <string>
#include <vector>

#include "streamad/autoencoder.hpp"
#include "streamad/cad.hpp"
#include "streamad/em_filter.hpp"
#include "streamad/frame_dataset.hpp"
#include "streamad/mixer.hpp"
#include "streamad/reports.hpp"
#include "streamad/scorer.hpp"
#include "streamad/sprites.hpp"

namespace streamad {

struct ExperimentConfig {
  std::string mode = "train-eval";  // train-eval | stream-run | mnist | sprite-bench

  // frame datasets (train-eval / stream-run)
  std::string train_root;
  std::string train_labels;  // empty = all-normal
  std::string test_root;
  std::string test_labels;
  int frame_h = 128;
  int frame_w = 192;

  // digit experiment inputs (IDX)
  std::string idx_images;
  std::string idx_labels;

  // stream mixing
  double s = 0.25;
  std::uint64_t seed = 1;
  int replicates = 3;
  long total = 0;  // <=0: balanced length so neither pool exhausts
  bool mix_by_clip = false;  // mix whole same-label runs instead of pairs
  std::vector<double> s_grid = {0.05, 0.15, 0.25, 0.35, 0.5};

  // admission filter
  double alpha = 0.1;
  bool alpha_from_config = false;  // config file set filter.alpha explicitly
  double tau_floor = 5e-5;
  int warmup = 100;
  bool filter_enabled = true;

  // models
  CadConfig cad;
  AutoencoderConfig ae;

  std::string out_dir = "out";
  std::string profile = "ci";  // ci | full
};

/// Reads a JSON config file; unknown keys are rejected, missing keys keep
/// their defaults.
ExperimentConfig load_config(const std::string& path);
void apply_profile(ExperimentConfig& cfg);  // ci: small CAD, lambda=0; full: full-size defaults

EmFilterState make_filter_state(const ExperimentConfig& cfg);

struct StreamRunResult {
  std::vector<ScoreRecord> records;
  long crossover_index = -1;
  long admitted = 0;
  double auc = 0.0;
  double eer = 0.0;
};

/// One plug-and-play pass over a prebuilt stream: filter, train-on-admit,
/// score everything.
StreamRunResult run_stream(Scorer& scorer, const MixedStream& stream, EmFilterState state,
                           bool use_filter);

/// Convenience: builds the pair-granularity stream first.
StreamRunResult run_stream_replicate(Scorer& scorer, const SamplePool& pool,
                                     const MixConfig& mix, EmFilterState state,
                                     bool use_filter);

/// Per-bucket admission counts over a record stream (the sample-analysis
/// view: normal seen at input, samples used to train, of which correct /
/// incorrect).
struct BucketCounts {
  long normal_input = 0;
  long trained = 0;
  long correct = 0;
  long incorrect = 0;  // admitted anomalous
};
std::vector<BucketCounts> admission_buckets(const std::vector<ScoreRecord>& records,
                                            int bucket = 100);
void write_bucket_csv(const std::string& path, const std::vector<BucketCounts>& buckets);

struct RunReport {
  std::vector<ReplicateResult> replicates;
  Aggregate agg;
  std::string report_path;
};

/// Conventional mode: one epoch over the (all-normal) training pairs, then
/// score the test pairs. Warns, not fails, on anomalous training labels.
RunReport run_conventional(const ExperimentConfig& cfg);

/// Plug-and-play mode over a mixed labeled stream, one report per replicate
/// plus the aggregate.
RunReport run_plug_and_play(const ExperimentConfig& cfg);

struct MnistGridPoint {
  double s = 0.0;
  std::vector<double> auc_filtered;
  std::vector<double> auc_unfiltered;
  double mean_filtered = 0.0;
  double mean_unfiltered = 0.0;
};

struct MnistReport {
  std::vector<MnistGridPoint> points;
  std::string table_path;
};

/// The digit-stream experiment: for each anomaly portion in the grid, runs
/// the autoencoder stream with and without the admission filter across
/// `replicates` seeds, and writes the AUC-vs-s table plus per-bucket
/// admission-count CSVs.
MnistReport run_mnist_experiment(const ExperimentConfig& cfg);

struct SpriteBenchReport {
  double baseline_auc_speed = 0.0;
  double baseline_auc_direction = 0.0;
  double model_auc_speed = 0.0;
  double model_auc_direction = 0.0;
  double pnp_auc = 0.0;  // plug-and-play pass over a mixed sprite stream
  std::string report_path;
};

/// Procedural benchmark: block-matching baseline first (the reference), then
/// the learned model in conventional mode, then a plug-and-play pass.
SpriteBenchReport run_sprite_benchmark(const ExperimentConfig& cfg);

}  // namespace streamad
