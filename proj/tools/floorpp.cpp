// floorpp command-line tool: synth, train, infer, eval, rasterize.
//
// Exit codes: 0 success, 1 I/O, 2 config/schema, 3 numeric failure.

#include <cstdio>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "floorpp/pipeline.hpp"

namespace fp = floorpp;

namespace {

enum Exit { kOk = 0, kIo = 1, kConfig = 2, kNumeric = 3 };

void print_warnings(const fp::Warnings& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

fp::PipelineConfig resolve_config(const std::optional<std::string>& path) {
  fp::PipelineConfig cfg;
  if (path) cfg = fp::load_config(*path, cfg);
  return cfg;
}

// Runs a command body and maps exceptions onto the exit-code contract.
// `format_exit` is the code for malformed input files.
int guarded(const char* name, int format_exit, const std::function<int()>& body) {
  try {
    return body();
  } catch (const fp::ConfigError& e) {
    std::cerr << name << ": config error: " << e.what() << '\n';
    return kConfig;
  } catch (const fp::FormatError& e) {
    std::cerr << name << ": format error: " << e.what() << '\n';
    return format_exit;
  } catch (const fp::NumericError& e) {
    std::cerr << name << ": numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::invalid_argument& e) {
    std::cerr << name << ": invalid input: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << name << ": " << e.what() << '\n';
    return kIo;
  }
}

struct SynthArgs {
  std::string out;
  std::optional<long long> scenes;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> config;
};

int cmd_synth(const SynthArgs& a) {
  return guarded("synth", kIo, [&] {
    fp::PipelineConfig cfg = resolve_config(a.config);
    if (a.seed) cfg.synth.seed = cfg.train.seed = *a.seed;
    const long long n = a.scenes.value_or(1);
    if (n < 1) throw fp::ConfigError("--scenes must be at least 1");
    cfg.synth.validate();
    const auto manifest = fp::generate_dataset(cfg.synth, static_cast<std::size_t>(n), a.out);
    std::cout << manifest.string() << '\n';
    return kOk;
  });
}

struct TrainArgs {
  std::string data;
  std::string out;
  std::optional<int> epochs;
  std::optional<double> lr;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> config;
  std::optional<std::string> log;
};

int cmd_train(const TrainArgs& a) {
  return guarded("train", kIo, [&] {
    fp::PipelineConfig cfg = resolve_config(a.config);
    if (a.epochs) cfg.train.epochs = *a.epochs;
    if (a.lr) cfg.train.lr = *a.lr;
    if (a.seed) cfg.synth.seed = cfg.train.seed = *a.seed;
    // An epoch count below the default decay point keeps the decay in range.
    if (a.epochs && cfg.train.decay_epoch > cfg.train.epochs) cfg.train.decay_epoch = cfg.train.epochs;
    cfg.validate();
    std::cerr << "train: lr=" << cfg.train.lr << " epochs=" << cfg.train.epochs
              << " decay_epoch=" << cfg.train.decay_epoch << " decay_factor=" << cfg.train.decay_factor
              << " seed=" << cfg.train.seed << '\n';

    const std::filesystem::path data(a.data);
    const auto manifest = std::filesystem::is_directory(data) ? data / "manifest.json" : data;
    const auto scenes = fp::load_manifest(manifest);
    fp::Warnings warnings;
    const auto samples = fp::build_training_set(scenes, cfg, &warnings);
    print_warnings(warnings);
    if (samples.empty()) throw std::runtime_error("no training tiles in " + manifest.string());
    std::cerr << "train: " << scenes.size() << " scenes, " << samples.size() << " tiles\n";

    fp::TrainOptions opts;
    opts.checkpoint = a.out;
    opts.log = a.log ? std::filesystem::path(*a.log) : std::filesystem::path(a.out + ".log.jsonl");
    opts.detection = cfg.detection;
    opts.on_epoch = [&](int epoch, const fp::LossBreakdown& b) {
      std::fprintf(stderr, "epoch %d  lr %.2g  l_total %.5f  l_cls %.5f  l_loc %.5f  l_e %.5f\n", epoch,
                   fp::lr_at_epoch(cfg.train, epoch), b.l_total, b.l_cls, b.l_loc, b.l_e);
    };
    auto params = fp::nn::init_params(cfg.network, cfg.train.seed);
    fp::train(samples, cfg.train, std::move(params), opts);
    std::cout << a.out << '\n';
    return kOk;
  });
}

struct InferArgs {
  std::string model;
  std::string cloud;
  std::string out;
  std::optional<std::string> svg;
  std::optional<std::string> config;
};

int cmd_infer(const InferArgs& a) {
  return guarded("infer", kIo, [&] {
    fp::PipelineConfig cfg = resolve_config(a.config);
    cfg.validate();
    const auto params = fp::nn::load_checkpoint(a.model);
    const auto net = fp::nn::NetworkConfig::infer(params);
    if (net.n_bins != cfg.pillars.n_bins) {
      throw fp::ConfigError("checkpoint expects " + std::to_string(net.n_bins) + " height bins, config has " +
                            std::to_string(cfg.pillars.n_bins));
    }
    fp::Warnings warnings;
    const auto cloud = fp::load_cloud(a.cloud, fp::format_for_path(a.cloud), &warnings);
    const auto plan = fp::infer_plan(cloud, params, cfg, &warnings);
    fp::save_plan(plan, a.out);
    if (a.svg) fp::render_svg(plan, cfg.stroke_width, *a.svg, &warnings);
    print_warnings(warnings);
    std::cerr << "infer: " << plan.corners.size() << " corners, " << plan.edges.size() << " edges\n";
    std::cout << a.out << '\n';
    return kOk;
  });
}

struct EvalArgs {
  std::string pred;
  std::string gt;
  std::string report;
  std::optional<std::string> config;
};

int cmd_eval(const EvalArgs& a) {
  return guarded("eval", kConfig, [&] {
    fp::PipelineConfig cfg = resolve_config(a.config);
    cfg.validate();
    const auto pred = fp::load_plan(a.pred);
    const auto gt = fp::load_plan(a.gt);
    const auto r = fp::evaluate(pred, gt, cfg.metrics);
    fp::save_report(r, a.report);
    std::printf("precision@%gm=%.4f recall@%gm=%.4f iou=%.4f betti_error=%g\n", r.tolerances[2],
                r.precision[2], r.tolerances[2], r.recall[2], r.iou, r.betti_error);
    return kOk;
  });
}

struct RasterizeArgs {
  std::string cloud;
  std::string out;
  std::optional<std::string> config;
};

int cmd_rasterize(const RasterizeArgs& a) {
  return guarded("rasterize", kIo, [&] {
    fp::PipelineConfig cfg = resolve_config(a.config);
    cfg.validate();
    fp::Warnings warnings;
    const auto cloud = fp::load_cloud(a.cloud, fp::format_for_path(a.cloud), &warnings);
    fp::Image img{1, 1, {0.0f}};
    if (cloud.empty()) {
      warnings.push_back("empty cloud: writing a 1x1 black image");
    } else {
      img = fp::grid_to_image(fp::preprocess(cloud, cfg, &warnings).grid);
    }
    fp::write_pgm(img, a.out);
    print_warnings(warnings);
    std::cout << a.out << '\n';
    return kOk;
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Floor plan reconstruction from point clouds"};
  app.require_subcommand(1);

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth->add_option("--out", sa.out, "Output directory")->required();
  synth->add_option("--scenes", sa.scenes, "Number of scenes");
  synth->add_option("--seed", sa.seed, "Random seed");
  synth->add_option("--config", sa.config, "Flat JSON config file");

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Train a model on a synthetic dataset");
  train->add_option("--data", ta.data, "Dataset directory or manifest")->required();
  train->add_option("--out", ta.out, "Checkpoint path")->required();
  train->add_option("--epochs", ta.epochs, "Epochs (default 55)");
  train->add_option("--lr", ta.lr, "Learning rate (default 1e-4)");
  train->add_option("--seed", ta.seed, "Random seed");
  train->add_option("--config", ta.config, "Flat JSON config file");
  train->add_option("--log", ta.log, "JSONL training log (default <out>.log.jsonl)");

  InferArgs ia;
  auto* infer = app.add_subcommand("infer", "Reconstruct a floor plan from a point cloud");
  infer->add_option("--model", ia.model, "Checkpoint")->required();
  infer->add_option("--cloud", ia.cloud, "Point cloud (.xyz or ASCII .ply)")->required();
  infer->add_option("--out", ia.out, "Plan JSON output")->required();
  infer->add_option("--svg", ia.svg, "Optional SVG rendering");
  infer->add_option("--config", ia.config, "Flat JSON config file");

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Compare a predicted plan with ground truth");
  eval->add_option("--pred", ea.pred, "Predicted plan JSON")->required();
  eval->add_option("--gt", ea.gt, "Ground-truth plan JSON")->required();
  eval->add_option("--report", ea.report, "Report JSON output")->required();
  eval->add_option("--config", ea.config, "Flat JSON config file");

  RasterizeArgs ra;
  auto* raster = app.add_subcommand("rasterize", "Write a point-pillar debug image");
  raster->add_option("--cloud", ra.cloud, "Point cloud (.xyz or ASCII .ply)")->required();
  raster->add_option("--out", ra.out, "PGM output")->required();
  raster->add_option("--config", ra.config, "Flat JSON config file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  if (*synth) return cmd_synth(sa);
  if (*train) return cmd_train(ta);
  if (*infer) return cmd_infer(ia);
  if (*eval) return cmd_eval(ea);
  return cmd_rasterize(ra);
}
