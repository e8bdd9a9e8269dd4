#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "streamad/digits.hpp"
#include "streamad/errors.hpp"
#include "streamad/metrics.hpp"
#include "streamad/reports.hpp"
#include "streamad/runner.hpp"

namespace fs = std::filesystem;
using namespace streamad;

namespace {

struct CliOptions {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string profile;
};

ExperimentConfig build_config(const CliOptions& opt) {
  ExperimentConfig cfg;
  if (!opt.config_path.empty()) cfg = load_config(opt.config_path);
  if (!opt.out_dir.empty()) cfg.out_dir = opt.out_dir;
  if (opt.seed_set) cfg.seed = opt.seed;
  if (!opt.profile.empty()) cfg.profile = opt.profile;
  return cfg;
}

void add_global_flags(CLI::App* app, CliOptions& opt) {
  app->add_option("--config", opt.config_path, "JSON experiment config");
  app->add_option("--out-dir", opt.out_dir, "output directory");
  app->add_option("--seed", opt.seed, "master seed")->each([&](const std::string&) {
    opt.seed_set = true;
  });
  app->add_option("--profile", opt.profile, "ci or full")
      ->check(CLI::IsMember({"ci", "full"}));
}

int run(int argc, char** argv) {
  CLI::App app{"streaming anomaly detection: train-while-classifying with an "
               "adaptive admission filter"};
  app.require_subcommand(1);
  CliOptions opt;

  auto* make_digits = app.add_subcommand("make-digits", "generate a synthetic 0/1 digit IDX set");
  DigitSetConfig dig;
  add_global_flags(make_digits, opt);
  make_digits->add_option("--zeros", dig.zeros, "number of class-0 images");
  make_digits->add_option("--ones", dig.ones, "number of class-1 images");

  auto* mnist = app.add_subcommand("mnist-demo", "AUC-vs-anomaly-portion digit stream experiment");
  add_global_flags(mnist, opt);
  std::string idx_images, idx_labels;
  double mnist_alpha = 0.25;
  mnist->add_option("--images", idx_images, "IDX image file");
  mnist->add_option("--labels", idx_labels, "IDX label file");
  auto* alpha_opt =
      mnist->add_option("--alpha", mnist_alpha, "filter learning rate (default 0.25)");

  auto* stream_run = app.add_subcommand("stream-run", "plug-and-play run over a mixed frame stream");
  add_global_flags(stream_run, opt);
  std::string train_root, train_labels, test_root, test_labels;
  double s_value = -1.0;
  int replicates = 0;
  int frame_h = 0, frame_w = 0;
  stream_run->add_option("--train-root", train_root, "frame dataset root");
  stream_run->add_option("--train-labels", train_labels, "label range file");
  stream_run->add_option("--test-root", test_root, "additional clips to mix in");
  stream_run->add_option("--test-labels", test_labels, "label file for test clips");
  stream_run->add_option("--s", s_value, "anomaly portion");
  stream_run->add_option("--replicates", replicates, "replicate count");
  stream_run->add_option("--frame-h", frame_h, "frame height after resize");
  stream_run->add_option("--frame-w", frame_w, "frame width after resize");

  auto* train_eval = app.add_subcommand("train-eval", "conventional train-then-test evaluation");
  add_global_flags(train_eval, opt);
  train_eval->add_option("--train-root", train_root, "training clips (all normal)");
  train_eval->add_option("--train-labels", train_labels, "training label file");
  train_eval->add_option("--test-root", test_root, "test clips");
  train_eval->add_option("--test-labels", test_labels, "test label file");
  train_eval->add_option("--frame-h", frame_h, "frame height after resize");
  train_eval->add_option("--frame-w", frame_w, "frame width after resize");

  auto* sprite = app.add_subcommand("sprite-bench", "procedural moving-sprite benchmark");
  add_global_flags(sprite, opt);

  auto* mix_cmd = app.add_subcommand("mix", "emit a stream manifest without running a model");
  add_global_flags(mix_cmd, opt);
  mix_cmd->add_option("--train-root", train_root, "frame dataset root");
  mix_cmd->add_option("--train-labels", train_labels, "label range file");
  mix_cmd->add_option("--s", s_value, "anomaly portion");
  mix_cmd->add_option("--frame-h", frame_h, "frame height after resize");
  mix_cmd->add_option("--frame-w", frame_w, "frame width after resize");

  auto* plot = app.add_subcommand("plot-roc", "render an ROC SVG from a score CSV");
  add_global_flags(plot, opt);
  std::string scores_path, svg_path = "roc.svg";
  plot->add_option("--scores", scores_path, "score CSV")->required();
  plot->add_option("--out", svg_path, "output SVG path");

  CLI11_PARSE(app, argc, argv);

  ExperimentConfig cfg = build_config(opt);
  if (s_value >= 0.0) cfg.s = s_value;
  if (replicates > 0) cfg.replicates = replicates;
  if (!train_root.empty()) cfg.train_root = train_root;
  if (!train_labels.empty()) cfg.train_labels = train_labels;
  if (!test_root.empty()) cfg.test_root = test_root;
  if (!test_labels.empty()) cfg.test_labels = test_labels;
  if (!idx_images.empty()) cfg.idx_images = idx_images;
  if (!idx_labels.empty()) cfg.idx_labels = idx_labels;
  if (frame_h > 0) cfg.frame_h = frame_h;
  if (frame_w > 0) cfg.frame_w = frame_w;

  if (make_digits->parsed()) {
    fs::create_directories(cfg.out_dir);
    dig.seed = cfg.seed ? cfg.seed : dig.seed;
    const std::string img = (fs::path(cfg.out_dir) / "digits-images-idx3-ubyte").string();
    const std::string lab = (fs::path(cfg.out_dir) / "digits-labels-idx1-ubyte").string();
    generate_digit_idx(img, lab, dig);
    std::cout << "wrote " << img << " and " << lab << "\n";
    return 0;
  }
  if (mnist->parsed()) {
    cfg.mode = "mnist";
    if (alpha_opt->count() > 0 || !cfg.alpha_from_config) cfg.alpha = mnist_alpha;
    const MnistReport rep = run_mnist_experiment(cfg);
    std::printf("%-6s %-14s %-14s\n", "s", "auc_filtered", "auc_unfiltered");
    for (const auto& p : rep.points) {
      std::printf("%-6.2f %-14.4f %-14.4f\n", p.s, p.mean_filtered, p.mean_unfiltered);
    }
    std::cout << "table: " << rep.table_path << "\n";
    return 0;
  }
  if (stream_run->parsed()) {
    cfg.mode = "stream-run";
    apply_profile(cfg);
    const RunReport rep = run_plug_and_play(cfg);
    std::printf("mean AUC %.4f (sd %.4f) over %zu replicates\n", rep.agg.mean, rep.agg.sd,
                rep.replicates.size());
    std::cout << "report: " << rep.report_path << "\n";
    return 0;
  }
  if (train_eval->parsed()) {
    cfg.mode = "train-eval";
    apply_profile(cfg);
    const RunReport rep = run_conventional(cfg);
    std::printf("AUC %.4f  EER %.4f\n", rep.replicates[0].auc, rep.replicates[0].eer);
    std::cout << "report: " << rep.report_path << "\n";
    return 0;
  }
  if (sprite->parsed()) {
    cfg.mode = "sprite-bench";
    apply_profile(cfg);
    const SpriteBenchReport rep = run_sprite_benchmark(cfg);
    std::printf("baseline AUC: speed %.4f direction %.4f\n", rep.baseline_auc_speed,
                rep.baseline_auc_direction);
    std::printf("model    AUC: speed %.4f direction %.4f\n", rep.model_auc_speed,
                rep.model_auc_direction);
    std::printf("plug-and-play AUC: %.4f\n", rep.pnp_auc);
    std::cout << "report: " << rep.report_path << "\n";
    return 0;
  }
  if (mix_cmd->parsed()) {
    if (cfg.train_root.empty()) throw InputError("mix needs --train-root");
    fs::create_directories(cfg.out_dir);
    FrameDatasetConfig fdc;
    fdc.height = cfg.frame_h;
    fdc.width = cfg.frame_w;
    const FrameDataset ds = load_frame_dataset(cfg.train_root, cfg.train_labels, fdc);
    const SamplePool pool = partition(ds.clips);
    MixConfig mix;
    mix.s = cfg.s;
    mix.seed = cfg.seed;
    mix.total = cfg.total > 0 ? cfg.total
                              : balanced_stream_length(static_cast<long>(pool.normal.size()),
                                                       static_cast<long>(pool.anomalous.size()),
                                                       cfg.s);
    const MixedStream stream = build_stream(pool, mix);
    const std::string path = (fs::path(cfg.out_dir) / "manifest.txt").string();
    write_stream_manifest(path, stream.samples);
    std::cout << "wrote " << path << " (" << stream.samples.size() << " samples)\n";
    return 0;
  }
  if (plot->parsed()) {
    const std::vector<ScoreRecord> records = read_score_csv(scores_path);
    LabeledScores ls;
    for (const ScoreRecord& r : records) {
      if (r.label >= 0 && !r.numeric_error) {
        ls.scores.push_back(r.loss);
        ls.labels.push_back(r.label);
      }
    }
    render_roc_svg(svg_path, {{fs::path(scores_path).stem().string(), roc_curve(ls)}});
    std::printf("AUC %.4f EER %.4f -> %s\n", auc(ls), eer(ls), svg_path.c_str());
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const FormatError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
