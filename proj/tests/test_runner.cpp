#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "streamad/autoencoder.hpp"
#include "streamad/digits.hpp"
#include "streamad/errors.hpp"
#include "streamad/idx.hpp"
#include "streamad/image.hpp"
#include "streamad/runner.hpp"

namespace fs = std::filesystem;
using namespace streamad;

namespace {

fs::path temp_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("streamad_runner_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

SamplePool small_digit_pool(const fs::path& dir, int zeros, int ones) {
  DigitSetConfig cfg;
  cfg.zeros = zeros;
  cfg.ones = ones;
  cfg.seed = 21;
  const std::string img = (dir / "img").string();
  const std::string lab = (dir / "lab").string();
  generate_digit_idx(img, lab, cfg);
  const std::vector<Tensor> images = load_idx_images(img);
  return make_image_pool(images, load_idx_labels(lab));
}

}  // namespace

TEST_SUITE_BEGIN("runner");

TEST_CASE("config parsing: defaults, overrides and unknown-key rejection") {
  const fs::path dir = temp_dir("cfg");
  {
    std::ofstream out(dir / "ok.json");
    out << R"({"mode":"mnist","mix":{"s":0.4,"seed":9,"replicates":2},)"
        << R"("filter":{"alpha":0.25,"warmup":50},"ae":{"lr":2e-4},"out_dir":"x"})";
  }
  const ExperimentConfig cfg = load_config((dir / "ok.json").string());
  CHECK(cfg.mode == "mnist");
  CHECK(cfg.s == doctest::Approx(0.4));
  CHECK(cfg.seed == 9);
  CHECK(cfg.replicates == 2);
  CHECK(cfg.alpha == doctest::Approx(0.25));
  CHECK(cfg.warmup == 50);
  CHECK(cfg.ae.lr == doctest::Approx(2e-4));
  CHECK(cfg.out_dir == "x");
  CHECK(cfg.tau_floor == doctest::Approx(5e-5));  // default kept
  CHECK(cfg.cad.lambda == doctest::Approx(0.05));

  {
    std::ofstream out(dir / "bad.json");
    out << R"({"mode":"mnist","bogus":1})";
  }
  CHECK_THROWS_AS(load_config((dir / "bad.json").string()), InputError);
  {
    std::ofstream out(dir / "bad2.json");
    out << R"({"mix":{"portion":0.4}})";
  }
  CHECK_THROWS_AS(load_config((dir / "bad2.json").string()), InputError);
  {
    std::ofstream out(dir / "bad3.json");
    out << R"({"filter":{"alpha":1.5}})";
  }
  CHECK_THROWS_AS(load_config((dir / "bad3.json").string()), InputError);
}

TEST_CASE("run_stream_replicate is deterministic and label-blind") {
  const fs::path dir = temp_dir("stream");
  const SamplePool pool = small_digit_pool(dir, 150, 150);

  MixConfig mix;
  mix.s = 0.3;
  mix.seed = 11;
  mix.total = 200;
  ExperimentConfig cfg;
  cfg.alpha = 0.25;
  cfg.warmup = 30;

  auto run_once = [&]() {
    AutoencoderConfig ae;
    ae.seed = 3;
    Autoencoder scorer(ae);
    return run_stream_replicate(scorer, pool, mix, make_filter_state(cfg), true);
  };
  const StreamRunResult a = run_once();
  const StreamRunResult b = run_once();
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].loss == b.records[i].loss);
    CHECK(a.records[i].admitted == b.records[i].admitted);
    CHECK(a.records[i].mu == b.records[i].mu);
  }
  CHECK(a.auc == b.auc);

  // byte-identical CSVs from identical runs
  write_score_csv((dir / "a.csv").string(), a.records);
  write_score_csv((dir / "b.csv").string(), b.records);
  std::ifstream fa(dir / "a.csv"), fb(dir / "b.csv");
  const std::string ta{std::istreambuf_iterator<char>(fa), std::istreambuf_iterator<char>()};
  const std::string tb{std::istreambuf_iterator<char>(fb), std::istreambuf_iterator<char>()};
  CHECK(ta == tb);
}

TEST_CASE("every stream sample is visited exactly once and trains at most once") {
  const fs::path dir = temp_dir("once");
  const SamplePool pool = small_digit_pool(dir, 120, 80);

  // a counting scorer wrapper
  struct Counter : Scorer {
    Autoencoder inner;
    long begins = 0, commits = 0;
    explicit Counter(const AutoencoderConfig& c) : inner(c) {}
    double score(const FramePair& p) const override { return inner.score(p); }
    PendingStep begin_step(const FramePair& p) override {
      ++begins;
      PendingStep s = inner.begin_step(p);
      auto base = s.commit;
      s.commit = [this, base]() {
        ++commits;
        return base();
      };
      return s;
    }
    std::vector<std::pair<std::string, Tensor>> named_params() const override {
      return inner.named_params();
    }
  };

  MixConfig mix;
  mix.s = 0.25;
  mix.seed = 2;
  mix.total = 150;
  ExperimentConfig cfg;
  Counter scorer{AutoencoderConfig{}};
  const StreamRunResult run = run_stream_replicate(scorer, pool, mix, make_filter_state(cfg), true);
  CHECK(run.records.size() == 150);
  CHECK(scorer.begins == 150);
  CHECK(scorer.commits == run.admitted);
  CHECK(run.admitted <= 150);
}

TEST_CASE("admission buckets count the four sample-analysis series") {
  std::vector<ScoreRecord> recs;
  for (int i = 0; i < 250; ++i) {
    ScoreRecord r;
    r.index = i;
    r.label = i % 5 == 0 ? 1 : 0;               // 20% anomalous
    r.admitted = i % 2 == 0;
    recs.push_back(r);
  }
  const auto buckets = admission_buckets(recs, 100);
  REQUIRE(buckets.size() == 3);
  CHECK(buckets[0].normal_input == 80);
  CHECK(buckets[0].trained == 50);
  CHECK(buckets[0].correct + buckets[0].incorrect == buckets[0].trained);
  CHECK(buckets[2].normal_input == 40);
  CHECK(buckets[2].trained == 25);
}

TEST_CASE("mnist experiment wiring on a tiny digit set") {
  const fs::path dir = temp_dir("mnist_mini");
  DigitSetConfig dig;
  dig.zeros = 220;
  dig.ones = 220;
  dig.seed = 77;
  generate_digit_idx((dir / "img").string(), (dir / "lab").string(), dig);

  ExperimentConfig cfg;
  cfg.idx_images = (dir / "img").string();
  cfg.idx_labels = (dir / "lab").string();
  cfg.out_dir = (dir / "out").string();
  cfg.replicates = 1;
  cfg.alpha = 0.25;
  cfg.warmup = 40;
  cfg.seed = 5;
  cfg.s_grid = {0.2};
  const MnistReport rep = run_mnist_experiment(cfg);
  REQUIRE(rep.points.size() == 1);
  CHECK(rep.points[0].auc_filtered.size() == 1);
  CHECK(rep.points[0].auc_unfiltered.size() == 1);
  CHECK(fs::exists(rep.table_path));
  CHECK(fs::exists(dir / "out" / "buckets_s020_rep0.csv"));
  CHECK(fs::exists(dir / "out" / "scores_s020_rep0.csv"));
  CHECK(rep.points[0].mean_filtered > 0.0);
  CHECK(rep.points[0].mean_filtered <= 1.0);
}

TEST_CASE("mnist experiment without idx paths is an input error") {
  ExperimentConfig cfg;
  CHECK_THROWS_AS(run_mnist_experiment(cfg), InputError);
}

namespace {

// materialize sprite clips as a PGM frame-directory dataset
void save_clips(const fs::path& root, const std::vector<LabeledClip>& clips,
                std::ofstream* label_file) {
  for (const LabeledClip& clip : clips) {
    char name[32];
    std::snprintf(name, sizeof name, "clip_%03d", clip.clip_id);
    fs::create_directories(root / name);
    for (std::size_t f = 0; f < clip.frames.size(); ++f) {
      char fname[32];
      std::snprintf(fname, sizeof fname, "%04zu.pgm", f);
      save_pgm((root / name / fname).string(), tensor_to_image(clip.frames[f]));
    }
    if (label_file && clip.labels.front() == 1) {
      *label_file << name << " 0 " << clip.frames.size() - 1 << "\n";
    }
  }
}

SpriteConfig small_sprites() {
  SpriteConfig sc;
  sc.height = 32;
  sc.width = 48;
  sc.frames_normal = 11;
  sc.frames_fast = 5;
  sc.frames_direction = 7;
  sc.min_size = 8;
  sc.max_size = 12;
  return sc;
}

ExperimentConfig small_frame_config(const fs::path& dir) {
  ExperimentConfig cfg;
  cfg.frame_h = 32;
  cfg.frame_w = 48;
  cfg.cad.gen_depth = 2;
  cfg.cad.gen_base_width = 6;
  cfg.cad.use_discriminator = false;
  cfg.cad.lambda = 0.0;
  cfg.cad.lr_g = 1e-3;
  cfg.seed = 4;
  cfg.out_dir = (dir / "out").string();
  return cfg;
}

}  // namespace

TEST_CASE("conventional mode: no training data leaves the scorer near chance") {
  const fs::path dir = temp_dir("conv_untrained");
  const SpriteConfig sc = small_sprites();
  Rng rng = make_rng(6);
  // single-frame clips yield zero training pairs
  std::vector<LabeledClip> train_stub;
  LabeledClip stub = make_sprite_clip(sc, SpriteKind::kNormal, 0, rng);
  stub.frames.resize(1);
  stub.labels.resize(1);
  train_stub.push_back(stub);
  save_clips(dir / "train", train_stub, nullptr);

  std::vector<LabeledClip> test;
  int id = 1;
  for (int i = 0; i < 6; ++i) test.push_back(make_sprite_clip(sc, SpriteKind::kNormal, id++, rng));
  for (int i = 0; i < 6; ++i) {
    test.push_back(make_sprite_clip(sc, SpriteKind::kFastSpeed, id++, rng));
  }
  std::ofstream labels(dir / "test_labels.txt");
  save_clips(dir / "test", test, &labels);
  labels.close();

  ExperimentConfig cfg = small_frame_config(dir);
  cfg.train_root = (dir / "train").string();
  cfg.test_root = (dir / "test").string();
  cfg.test_labels = (dir / "test_labels.txt").string();
  const RunReport rep = run_conventional(cfg);
  // untrained scorer: clearly below trained quality, in the chance region
  CHECK(rep.replicates[0].auc > 0.15);
  CHECK(rep.replicates[0].auc < 0.85);
}

TEST_CASE("plug-and-play at s=0 matches conventional training on the same data") {
  const fs::path dir = temp_dir("s0_consistency");
  const SpriteConfig sc = small_sprites();
  Rng rng = make_rng(14);
  std::vector<LabeledClip> train;
  int id = 0;
  for (int i = 0; i < 12; ++i) train.push_back(make_sprite_clip(sc, SpriteKind::kNormal, id++, rng));
  std::vector<LabeledClip> test;
  for (int i = 0; i < 5; ++i) test.push_back(make_sprite_clip(sc, SpriteKind::kNormal, id++, rng));
  for (int i = 0; i < 5; ++i) test.push_back(make_sprite_clip(sc, SpriteKind::kFastSpeed, id++, rng));

  ExperimentConfig cfg = small_frame_config(dir);
  auto test_scores = [&](const CadScorer& scorer) {
    LabeledScores ls;
    for (const LabeledClip& clip : test) {
      for (std::size_t f = 1; f < clip.frames.size(); ++f) {
        ls.scores.push_back(scorer.score(FramePair{clip.frames[f - 1], clip.frames[f]}));
        ls.labels.push_back(clip.labels[f]);
      }
    }
    return auc(ls);
  };

  // conventional: one epoch straight through the training pairs
  CadConfig cad = cfg.cad;
  cad.seed = cfg.seed;
  CadScorer conventional(cad);
  for (const LabeledClip& clip : train) {
    for (std::size_t f = 1; f < clip.frames.size(); ++f) {
      conventional.model().train_step(FramePair{clip.frames[f - 1], clip.frames[f]});
    }
  }
  const double auc_conventional = test_scores(conventional);

  // plug-and-play at s=0: same pairs through the admission filter
  const SamplePool pool = partition(train);
  CadScorer filtered(cad);
  MixConfig mix;
  mix.s = 0.0;
  mix.seed = 8;
  mix.total = static_cast<long>(pool.normal.size());
  const StreamRunResult run =
      run_stream_replicate(filtered, pool, mix, make_filter_state(cfg), true);
  CHECK(std::isnan(run.auc));  // single-class stream has no stream-level AUC
  const double auc_stream = test_scores(filtered);

  CHECK(auc_conventional >= 0.9);
  CHECK(auc_stream == doctest::Approx(auc_conventional).epsilon(0.05));
}

TEST_CASE("plug-and-play reports are byte-identical across reruns") {
  const fs::path dir = temp_dir("pnp_replay");
  const SpriteConfig sc = small_sprites();
  Rng rng = make_rng(23);
  std::vector<LabeledClip> clips;
  int id = 0;
  for (int i = 0; i < 8; ++i) clips.push_back(make_sprite_clip(sc, SpriteKind::kNormal, id++, rng));
  for (int i = 0; i < 4; ++i) {
    clips.push_back(make_sprite_clip(sc, SpriteKind::kFastSpeed, id++, rng));
  }
  std::ofstream labels(dir / "labels.txt");
  save_clips(dir / "frames", clips, &labels);
  labels.close();

  auto run_to = [&](const std::string& out) {
    ExperimentConfig cfg = small_frame_config(dir);
    cfg.train_root = (dir / "frames").string();
    cfg.train_labels = (dir / "labels.txt").string();
    cfg.s = 0.3;
    cfg.replicates = 2;
    cfg.out_dir = (dir / out).string();
    return run_plug_and_play(cfg);
  };
  const RunReport a = run_to("out_a");
  const RunReport b = run_to("out_b");
  CHECK(a.agg.mean == b.agg.mean);
  for (const char* name : {"report.txt", "scores_rep0.csv", "scores_rep1.csv", "roc.svg",
                           "manifest_rep0.txt", "model_rep0.ckpt"}) {
    std::ifstream fa(dir / "out_a" / name, std::ios::binary);
    std::ifstream fb(dir / "out_b" / name, std::ios::binary);
    const std::string ta{std::istreambuf_iterator<char>(fa), std::istreambuf_iterator<char>()};
    const std::string tb{std::istreambuf_iterator<char>(fb), std::istreambuf_iterator<char>()};
    REQUIRE(!ta.empty());
    CHECK(ta == tb);
  }
}

TEST_SUITE_END();
