#include "streamad/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "json.hpp"
#include "streamad/errors.hpp"
#include "streamad/checkpoint.hpp"
#include "streamad/idx.hpp"
#include "streamad/metrics.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace streamad {

namespace {

void check_keys(const json& obj, const std::vector<std::string>& allowed, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
      throw InputError("config: unknown key '" + it.key() + "' in " + where);
    }
  }
}

OptKind parse_opt(const std::string& s) {
  if (s == "adam") return OptKind::kAdam;
  if (s == "sgd") return OptKind::kSgd;
  throw InputError("config: optimizer must be 'adam' or 'sgd', got '" + s + "'");
}

template <typename T>
void maybe(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw InputError("config " + path + ": " + e.what());
  }
  ExperimentConfig cfg;
  check_keys(j, {"mode", "dataset", "mix", "filter", "cad", "ae", "out_dir", "profile"}, "top level");
  maybe(j, "mode", cfg.mode);
  maybe(j, "out_dir", cfg.out_dir);
  maybe(j, "profile", cfg.profile);
  if (j.contains("dataset")) {
    const json& d = j["dataset"];
    check_keys(d, {"train_root", "train_labels", "test_root", "test_labels", "idx_images",
                   "idx_labels", "frame_h", "frame_w"}, "dataset");
    maybe(d, "train_root", cfg.train_root);
    maybe(d, "train_labels", cfg.train_labels);
    maybe(d, "test_root", cfg.test_root);
    maybe(d, "test_labels", cfg.test_labels);
    maybe(d, "idx_images", cfg.idx_images);
    maybe(d, "idx_labels", cfg.idx_labels);
    maybe(d, "frame_h", cfg.frame_h);
    maybe(d, "frame_w", cfg.frame_w);
  }
  if (j.contains("mix")) {
    const json& m = j["mix"];
    check_keys(m, {"s", "seed", "replicates", "total", "s_grid", "by_clip"}, "mix");
    maybe(m, "s", cfg.s);
    maybe(m, "seed", cfg.seed);
    maybe(m, "replicates", cfg.replicates);
    maybe(m, "total", cfg.total);
    maybe(m, "s_grid", cfg.s_grid);
    maybe(m, "by_clip", cfg.mix_by_clip);
  }
  if (j.contains("filter")) {
    const json& f = j["filter"];
    check_keys(f, {"alpha", "tau_floor", "warmup", "enabled"}, "filter");
    if (f.contains("alpha")) {
      cfg.alpha = f["alpha"].get<double>();
      cfg.alpha_from_config = true;
    }
    maybe(f, "tau_floor", cfg.tau_floor);
    maybe(f, "warmup", cfg.warmup);
    maybe(f, "enabled", cfg.filter_enabled);
  }
  if (j.contains("cad")) {
    const json& c = j["cad"];
    check_keys(c, {"gen_depth", "gen_base_width", "disc_depth", "disc_base_width", "max_flow",
                   "lambda", "lr_g", "lr_d", "optimizer", "use_discriminator",
                   "vertical_gradient_loss"}, "cad");
    maybe(c, "gen_depth", cfg.cad.gen_depth);
    maybe(c, "gen_base_width", cfg.cad.gen_base_width);
    maybe(c, "disc_depth", cfg.cad.disc_depth);
    maybe(c, "disc_base_width", cfg.cad.disc_base_width);
    maybe(c, "max_flow", cfg.cad.max_flow);
    maybe(c, "lambda", cfg.cad.lambda);
    maybe(c, "lr_g", cfg.cad.lr_g);
    maybe(c, "lr_d", cfg.cad.lr_d);
    maybe(c, "use_discriminator", cfg.cad.use_discriminator);
    maybe(c, "vertical_gradient_loss", cfg.cad.vertical_gradient_loss);
    if (c.contains("optimizer")) cfg.cad.optimizer = parse_opt(c["optimizer"].get<std::string>());
  }
  if (j.contains("ae")) {
    const json& a = j["ae"];
    check_keys(a, {"hidden1", "bottleneck", "lr", "optimizer"}, "ae");
    maybe(a, "hidden1", cfg.ae.hidden1);
    maybe(a, "bottleneck", cfg.ae.bottleneck);
    maybe(a, "lr", cfg.ae.lr);
    if (a.contains("optimizer")) cfg.ae.optimizer = parse_opt(a["optimizer"].get<std::string>());
  }
  if (cfg.replicates < 1) throw InputError("config: replicates must be >= 1");
  if (cfg.alpha <= 0.0 || cfg.alpha >= 1.0) throw InputError("config: alpha must lie in (0,1)");
  return cfg;
}

void apply_profile(ExperimentConfig& cfg) {
  if (cfg.profile == "ci") {
    // desk-scale: small generator, no adversarial path, faster learning rate
    cfg.cad.gen_depth = 2;
    cfg.cad.gen_base_width = 8;
    cfg.cad.use_discriminator = false;
    cfg.cad.lambda = 0.0;
    cfg.cad.lr_g = 1e-3;
  } else if (cfg.profile != "full") {
    throw InputError("profile must be 'ci' or 'full', got '" + cfg.profile + "'");
  }
}

EmFilterState make_filter_state(const ExperimentConfig& cfg) {
  EmFilterState st;
  st.alpha = cfg.alpha;
  st.tau_floor = cfg.tau_floor;
  st.tau = cfg.tau_floor;
  st.warmup_remaining = cfg.warmup;
  return st;
}

StreamRunResult run_stream(Scorer& scorer, const MixedStream& stream, EmFilterState state,
                           bool use_filter) {
  StreamRunResult result;
  result.crossover_index = stream.crossover_index;
  result.records.reserve(stream.samples.size());
  long index = 0;
  for (const StreamSample& sample : stream.samples) {
    ScoreRecord rec = filter_step(index++, sample, scorer, state, /*admit_all=*/!use_filter);
    if (rec.admitted) ++result.admitted;
    result.records.push_back(rec);
  }
  LabeledScores ls;
  for (const ScoreRecord& r : result.records) {
    if (r.numeric_error) continue;
    ls.scores.push_back(r.loss);
    ls.labels.push_back(r.label);
  }
  const bool has_pos = std::find(ls.labels.begin(), ls.labels.end(), 1) != ls.labels.end();
  const bool has_neg = std::find(ls.labels.begin(), ls.labels.end(), 0) != ls.labels.end();
  if (has_pos && has_neg) {
    result.auc = auc(ls);
    result.eer = eer(ls);
  } else {  // single-class stream (s = 0 or 1): stream-level metrics undefined
    result.auc = std::nan("");
    result.eer = std::nan("");
  }
  return result;
}

StreamRunResult run_stream_replicate(Scorer& scorer, const SamplePool& pool,
                                     const MixConfig& mix, EmFilterState state,
                                     bool use_filter) {
  return run_stream(scorer, build_stream(pool, mix), state, use_filter);
}

std::vector<BucketCounts> admission_buckets(const std::vector<ScoreRecord>& records, int bucket) {
  if (bucket <= 0) throw ContractError("bucket size must be positive");
  std::vector<BucketCounts> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (i % static_cast<std::size_t>(bucket) == 0) out.push_back({});
    BucketCounts& b = out.back();
    const ScoreRecord& r = records[i];
    if (r.label == 0) ++b.normal_input;
    if (r.admitted) {
      ++b.trained;
      if (r.label == 0) {
        ++b.correct;
      } else {
        ++b.incorrect;
      }
    }
  }
  return out;
}

void write_bucket_csv(const std::string& path, const std::vector<BucketCounts>& buckets) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "bucket,normal_input,trained,correct,incorrect\n";
  for (std::size_t i = 0; i < buckets.size(); ++i) {
    out << i << ',' << buckets[i].normal_input << ',' << buckets[i].trained << ','
        << buckets[i].correct << ',' << buckets[i].incorrect << '\n';
  }
}

namespace {

std::vector<LabeledClip> load_clips(const ExperimentConfig& cfg, const std::string& root,
                                    const std::string& labels) {
  FrameDatasetConfig fdc;
  fdc.height = cfg.frame_h;
  fdc.width = cfg.frame_w;
  return load_frame_dataset(root, labels, fdc).clips;
}

LabeledScores scores_from_records(const std::vector<ScoreRecord>& records) {
  LabeledScores ls;
  for (const ScoreRecord& r : records) {
    if (r.numeric_error) continue;
    ls.scores.push_back(r.loss);
    ls.labels.push_back(r.label);
  }
  return ls;
}

}  // namespace

RunReport run_conventional(const ExperimentConfig& cfg) {
  if (cfg.train_root.empty() || cfg.test_root.empty()) {
    throw InputError("train-eval mode needs dataset.train_root and dataset.test_root");
  }
  fs::create_directories(cfg.out_dir);
  const std::vector<LabeledClip> train = load_clips(cfg, cfg.train_root, cfg.train_labels);
  const std::vector<LabeledClip> test = load_clips(cfg, cfg.test_root, cfg.test_labels);

  long anom_train = 0;
  for (const auto& c : train) anom_train += std::count(c.labels.begin(), c.labels.end(), 1);
  if (anom_train > 0) {
    std::cerr << "warning: training split contains " << anom_train
              << " anomalous frames; conventional mode assumes all-normal training data\n";
  }

  CadConfig cad = cfg.cad;
  cad.seed = cfg.seed;
  CadScorer scorer(cad);

  for (const LabeledClip& clip : train) {
    for (std::size_t f = 1; f < clip.frames.size(); ++f) {
      scorer.model().train_step(FramePair{clip.frames[f - 1], clip.frames[f]});
    }
  }

  std::vector<ScoreRecord> records;
  long index = 0;
  for (const LabeledClip& clip : test) {
    for (std::size_t f = 1; f < clip.frames.size(); ++f) {
      ScoreRecord rec;
      rec.index = index++;
      rec.loss = scorer.score(FramePair{clip.frames[f - 1], clip.frames[f]});
      rec.label = clip.labels[f];
      records.push_back(rec);
    }
  }
  const LabeledScores ls = scores_from_records(records);

  RunReport report;
  ReplicateResult r;
  r.name = "test";
  r.auc = auc(ls);
  r.eer = eer(ls);
  r.total = static_cast<long>(records.size());
  report.replicates.push_back(r);
  report.agg = aggregate({r.auc});

  write_score_csv((fs::path(cfg.out_dir) / "scores.csv").string(), records);
  save_checkpoint((fs::path(cfg.out_dir) / "model.ckpt").string(), scorer.named_params());
  render_roc_svg((fs::path(cfg.out_dir) / "roc.svg").string(), {{"test", roc_curve(ls)}});
  report.report_path = (fs::path(cfg.out_dir) / "report.txt").string();
  write_metric_report(report.report_path, "conventional train/eval", report.replicates, {});
  return report;
}

RunReport run_plug_and_play(const ExperimentConfig& cfg) {
  if (cfg.train_root.empty()) throw InputError("stream-run mode needs dataset.train_root");
  fs::create_directories(cfg.out_dir);
  std::vector<LabeledClip> clips = load_clips(cfg, cfg.train_root, cfg.train_labels);
  if (!cfg.test_root.empty()) {
    for (auto& c : load_clips(cfg, cfg.test_root, cfg.test_labels)) {
      c.clip_id += static_cast<int>(clips.size());
      clips.push_back(std::move(c));
    }
  }
  const SamplePool pool = partition(clips);

  RunReport report;
  std::vector<RocSeries> roc_series;
  std::vector<double> aucs;
  for (int rep = 0; rep < cfg.replicates; ++rep) {
    CadConfig cad = cfg.cad;
    cad.seed = split_seed(cfg.seed, 7000 + static_cast<std::uint64_t>(rep));
    CadScorer scorer(cad);

    MixConfig mix;
    mix.s = cfg.s;
    mix.seed = split_seed(cfg.seed, 9000 + static_cast<std::uint64_t>(rep));
    mix.total = cfg.total > 0 ? cfg.total
                              : balanced_stream_length(static_cast<long>(pool.normal.size()),
                                                       static_cast<long>(pool.anomalous.size()),
                                                       cfg.s);
    const MixedStream stream =
        cfg.mix_by_clip ? build_clip_stream(clips, mix) : build_stream(pool, mix);
    const StreamRunResult run =
        run_stream(scorer, stream, make_filter_state(cfg), cfg.filter_enabled);

    const std::string tag = "rep" + std::to_string(rep);
    write_score_csv((fs::path(cfg.out_dir) / ("scores_" + tag + ".csv")).string(), run.records);
    write_stream_manifest((fs::path(cfg.out_dir) / ("manifest_" + tag + ".txt")).string(),
                          stream.samples);
    save_checkpoint((fs::path(cfg.out_dir) / ("model_" + tag + ".ckpt")).string(),
                    scorer.named_params());
    ReplicateResult r;
    r.name = tag;
    r.auc = run.auc;
    r.eer = run.eer;
    r.admitted = run.admitted;
    r.total = static_cast<long>(run.records.size());
    r.crossover_index = run.crossover_index;
    report.replicates.push_back(r);
    aucs.push_back(run.auc);
    roc_series.push_back({tag, roc_curve(scores_from_records(run.records))});
  }
  report.agg = aggregate(aucs);
  render_roc_svg((fs::path(cfg.out_dir) / "roc.svg").string(), roc_series);
  report.report_path = (fs::path(cfg.out_dir) / "report.txt").string();
  std::vector<std::string> notes;
  for (const auto& r : report.replicates) {
    if (r.crossover_index >= 0) {
      notes.push_back(r.name + " fell back to the other pool at index " +
                      std::to_string(r.crossover_index));
    }
  }
  write_metric_report(report.report_path, "plug-and-play stream run", report.replicates, notes);
  return report;
}

MnistReport run_mnist_experiment(const ExperimentConfig& cfg) {
  if (cfg.idx_images.empty() || cfg.idx_labels.empty()) {
    throw InputError("digit experiment needs dataset.idx_images and dataset.idx_labels");
  }
  fs::create_directories(cfg.out_dir);
  const std::vector<Tensor> images = load_idx_images(cfg.idx_images);
  const std::vector<int> digits = load_idx_labels(cfg.idx_labels);
  if (images.size() != digits.size()) {
    throw InputError("digit experiment: image/label counts differ");
  }
  // digit 0 = normal class, digit 1 = anomalous class; other digits dropped
  std::vector<Tensor> kept;
  std::vector<int> labels;
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (digits[i] == 0 || digits[i] == 1) {
      kept.push_back(images[i]);
      labels.push_back(digits[i]);
    }
  }
  if (kept.empty()) throw InputError("digit experiment: no class-0/1 samples in input");
  const SamplePool pool = make_image_pool(kept, labels);

  MnistReport report;
  for (std::size_t si = 0; si < cfg.s_grid.size(); ++si) {
    MnistGridPoint point;
    point.s = cfg.s_grid[si];
    for (int rep = 0; rep < cfg.replicates; ++rep) {
      const std::uint64_t stream_id = si * 100 + static_cast<std::uint64_t>(rep);
      MixConfig mix;
      mix.s = point.s;
      mix.seed = split_seed(cfg.seed, 3000 + stream_id);
      mix.total = cfg.total > 0 ? cfg.total
                                : balanced_stream_length(static_cast<long>(pool.normal.size()),
                                                         static_cast<long>(pool.anomalous.size()),
                                                         point.s);
      AutoencoderConfig ae = cfg.ae;
      ae.seed = split_seed(cfg.seed, 5000 + stream_id);

      Autoencoder with_filter(ae);
      const StreamRunResult run_f =
          run_stream_replicate(with_filter, pool, mix, make_filter_state(cfg), true);
      point.auc_filtered.push_back(run_f.auc);

      Autoencoder without_filter(ae);  // same init, same stream, no admission gate
      const StreamRunResult run_nf =
          run_stream_replicate(without_filter, pool, mix, make_filter_state(cfg), false);
      point.auc_unfiltered.push_back(run_nf.auc);

      char name[96];
      std::snprintf(name, sizeof name, "buckets_s%03d_rep%d.csv",
                    static_cast<int>(std::lround(point.s * 100)), rep);
      write_bucket_csv((fs::path(cfg.out_dir) / name).string(),
                       admission_buckets(run_f.records, 100));
      std::snprintf(name, sizeof name, "scores_s%03d_rep%d.csv",
                    static_cast<int>(std::lround(point.s * 100)), rep);
      write_score_csv((fs::path(cfg.out_dir) / name).string(), run_f.records);
    }
    point.mean_filtered = aggregate(point.auc_filtered).mean;
    point.mean_unfiltered = aggregate(point.auc_unfiltered).mean;
    report.points.push_back(std::move(point));
  }

  report.table_path = (fs::path(cfg.out_dir) / "auc_vs_s.txt").string();
  std::ofstream out(report.table_path, std::ios::binary);
  if (!out) throw IoError("cannot write " + report.table_path);
  out << "s\tauc_filtered\tauc_unfiltered\treplicates_filtered\treplicates_unfiltered\n";
  for (const MnistGridPoint& p : report.points) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f\t%.6f\t%.6f\t", p.s, p.mean_filtered, p.mean_unfiltered);
    out << buf;
    for (std::size_t i = 0; i < p.auc_filtered.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%s%.6f", i ? "," : "", p.auc_filtered[i]);
      out << buf;
    }
    out << '\t';
    for (std::size_t i = 0; i < p.auc_unfiltered.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%s%.6f", i ? "," : "", p.auc_unfiltered[i]);
      out << buf;
    }
    out << '\n';
  }
  return report;
}

SpriteBenchReport run_sprite_benchmark(const ExperimentConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  SpriteConfig sprite;
  const bool full = cfg.profile == "full";
  const int train_clips = full ? 120 : 60;
  const int test_normal = full ? 30 : 20;
  const int test_anomalous = full ? 15 : 10;

  Rng rng = make_rng(cfg.seed, 31);
  std::vector<LabeledClip> train, test_speed, test_dir;
  int id = 0;
  for (int i = 0; i < train_clips; ++i) {
    train.push_back(make_sprite_clip(sprite, SpriteKind::kNormal, id++, rng));
  }
  for (int i = 0; i < test_normal; ++i) {
    LabeledClip c = make_sprite_clip(sprite, SpriteKind::kNormal, id++, rng);
    test_speed.push_back(c);
    test_dir.push_back(make_sprite_clip(sprite, SpriteKind::kNormal, id++, rng));
  }
  for (int i = 0; i < test_anomalous; ++i) {
    test_speed.push_back(make_sprite_clip(sprite, SpriteKind::kFastSpeed, id++, rng));
    test_dir.push_back(make_sprite_clip(sprite, SpriteKind::kWrongDirection, id++, rng));
  }

  SpriteBenchReport report;

  // brute-force reference first
  const FlowBaseline baseline = fit_flow_baseline(train);
  auto baseline_auc = [&](const std::vector<LabeledClip>& clips) {
    LabeledScores ls;
    for (const LabeledClip& clip : clips) {
      for (std::size_t f = 1; f < clip.frames.size(); ++f) {
        ls.scores.push_back(
            flow_baseline_score(FramePair{clip.frames[f - 1], clip.frames[f]}, baseline));
        ls.labels.push_back(clip.labels[f]);
      }
    }
    return auc(ls);
  };
  report.baseline_auc_speed = baseline_auc(test_speed);
  report.baseline_auc_direction = baseline_auc(test_dir);

  // learned model, conventional single-epoch training
  CadConfig cad = cfg.cad;
  cad.seed = cfg.seed;
  CadScorer scorer(cad);
  for (const LabeledClip& clip : train) {
    for (std::size_t f = 1; f < clip.frames.size(); ++f) {
      scorer.model().train_step(FramePair{clip.frames[f - 1], clip.frames[f]});
    }
  }
  auto model_auc = [&](const std::vector<LabeledClip>& clips) {
    LabeledScores ls;
    for (const LabeledClip& clip : clips) {
      for (std::size_t f = 1; f < clip.frames.size(); ++f) {
        ls.scores.push_back(scorer.score(FramePair{clip.frames[f - 1], clip.frames[f]}));
        ls.labels.push_back(clip.labels[f]);
      }
    }
    return ls;
  };
  const LabeledScores ls_speed = model_auc(test_speed);
  const LabeledScores ls_dir = model_auc(test_dir);
  report.model_auc_speed = auc(ls_speed);
  report.model_auc_direction = auc(ls_dir);

  // plug-and-play pass over a mixed sprite stream with a fresh model
  std::vector<LabeledClip> all = train;
  all.insert(all.end(), test_speed.begin(), test_speed.end());
  const SamplePool pool = partition(all);
  CadConfig cad2 = cfg.cad;
  cad2.seed = split_seed(cfg.seed, 77);
  CadScorer pnp_scorer(cad2);
  MixConfig mix;
  mix.s = cfg.s;
  mix.seed = split_seed(cfg.seed, 78);
  mix.total = balanced_stream_length(static_cast<long>(pool.normal.size()),
                                     static_cast<long>(pool.anomalous.size()), mix.s);
  const StreamRunResult pnp =
      run_stream_replicate(pnp_scorer, pool, mix, make_filter_state(cfg), cfg.filter_enabled);
  report.pnp_auc = pnp.auc;

  write_score_csv((fs::path(cfg.out_dir) / "pnp_scores.csv").string(), pnp.records);
  render_roc_svg((fs::path(cfg.out_dir) / "roc.svg").string(),
                 {{"speed", roc_curve(ls_speed)}, {"direction", roc_curve(ls_dir)}});
  report.report_path = (fs::path(cfg.out_dir) / "report.txt").string();
  std::ofstream out(report.report_path, std::ios::binary);
  if (!out) throw IoError("cannot write " + report.report_path);
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "# sprite benchmark (%s profile)\n"
                "baseline_auc_speed\t%.6f\nbaseline_auc_direction\t%.6f\n"
                "model_auc_speed\t%.6f\nmodel_auc_direction\t%.6f\npnp_auc\t%.6f\n",
                cfg.profile.c_str(), report.baseline_auc_speed, report.baseline_auc_direction,
                report.model_auc_speed, report.model_auc_direction, report.pnp_auc);
  out << buf;
  return report;
}

}  // namespace streamad
