// Runs the acceptance criteria and prints one PASS/FAIL line per criterion.
//
//   floorpp_acceptance [--work DIR] [--only 1,4,10]
//
// Exit status is 0 only when every selected criterion passes.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <set>
#include <sstream>
#include <sys/wait.h>

#include "floorpp/pipeline.hpp"
#include "oracles.hpp"

using namespace floorpp;
namespace fs = std::filesystem;
using nn::Tensor;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

int run_cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + std::string(FLOORPP_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

double bce(double p, double t) {
  p = std::clamp(p, double(nn::kProbClamp), 1.0 - double(nn::kProbClamp));
  return -(t * std::log(p) + (1 - t) * std::log(1 - p));
}

// A square tile with one rectangular room drawn as full-height wall pillars.
TrainSample room_tile(int s, int nb, int x0, int y0, int x1, int y1) {
  TrainSample t;
  t.tile = PillarGrid(s, s, nb, {0, 0}, 0.05);
  auto wall = [&](int i, int j) {
    for (int k = 0; k < nb; ++k) t.tile.set(i, j, k);
  };
  for (int i = x0; i <= x1; ++i) wall(i, y0), wall(i, y1);
  for (int j = y0; j <= y1; ++j) wall(x0, j), wall(x1, j);
  t.gt.corners = {{x0 + 0.5, y0 + 0.5}, {x1 + 0.5, y0 + 0.5}, {x1 + 0.5, y1 + 0.5}, {x0 + 0.5, y1 + 0.5}};
  t.gt.edges = {{0, 1}, {1, 2}, {2, 3}, {0, 3}};
  return t;
}

// ---------------------------------------------------------------------------

Outcome gradients() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1);
  int checked = 0, failed = 0, kinks = 0;
  std::string first;
  auto check = [&](const std::string& what, const std::function<Tensor()>& loss,
                   std::vector<std::pair<std::string, Tensor>> in, int per_tensor = 1 << 30,
                   std::function<double()> value = nullptr) {
    const auto r = oracle::check_gradients(loss, std::move(in), rng, per_tensor, 1e-3f, 1e-2, 1e-4, std::move(value));
    checked += r.checked;
    failed += r.failed;
    kinks += r.kinks;
    if (r.failed && first.empty()) first = what + ": " + r.first_failure;
    if (r.failed) std::cerr << "  " << what << ": " << r.failed << " of " << r.checked << " failed\n";
  };

  auto pj = [&](std::function<Tensor()> f) { return oracle::projected(std::move(f), rng); };
  Tensor a = oracle::random_tensor({3, 4, 6}, rng, -2, 2, true);
  Tensor b = oracle::random_tensor({3, 4, 6}, rng, -2, 2, true);
  check("relu", pj([&] { return nn::relu(a); }), {{"a", a}});
  check("sigmoid", pj([&] { return nn::sigmoid(a); }), {{"a", a}});
  check("tanh", pj([&] { return nn::tanh(a); }), {{"a", a}});
  check("add", pj([&] { return nn::add(a, b); }), {{"a", a}, {"b", b}});
  check("mul", pj([&] { return nn::mul(a, b); }), {{"a", a}, {"b", b}});
  check("scale", pj([&] { return nn::scale(a, 0.7f); }), {{"a", a}});
  check("sum", pj([&] { return nn::sum(nn::mul(a, b)); }), {{"a", a}, {"b", b}});
  check("mean", pj([&] { return nn::mean(nn::mul(a, b)); }), {{"a", a}, {"b", b}});
  check("mean_last", pj([&] { return nn::mean_last(a); }), {{"a", a}});
  check("reshape", pj([&] { return nn::reshape(a, {12, 6}); }), {{"a", a}});
  const std::vector<int> idx{0, 7, 7, 71, 30};
  check("gather", pj([&] { return nn::gather(a, idx); }), {{"a", a}});
  check("upsample2x", pj([&] { return nn::upsample2x(a); }), {{"a", a}});

  // Small activations keep the float32 rounding of the outputs well below
  // the finite-difference resolution.
  Tensor x = oracle::random_tensor({3, 8, 8}, rng, -0.5, 0.5, true);
  Tensor w = oracle::random_tensor({4, 3, 3, 3}, rng, -0.5, 0.5, true);
  Tensor wb = oracle::random_tensor({4}, rng, -0.1, 0.1, true);
  check("conv2d s1", pj([&] { return nn::conv2d(x, w, wb, 1, 1); }), {{"x", x}, {"w", w}, {"b", wb}});
  check("conv2d s2", pj([&] { return nn::conv2d(x, w, wb, 2, 1); }), {{"x", x}, {"w", w}, {"b", wb}});
  Tensor w13 = oracle::random_tensor({2, 3, 1, 3}, rng, -0.5, 0.5, true);
  Tensor b13 = oracle::random_tensor({2}, rng, -0.1, 0.1, true);
  check("conv2d 1x3", pj([&] { return nn::conv2d(x, w13, b13, 1, 0, 1); }), {{"x", x}, {"w", w13}, {"b", b13}});
  Tensor li = oracle::random_tensor({5, 7}, rng, -1, 1, true);
  Tensor lw = oracle::random_tensor({3, 7}, rng, -1, 1, true);
  Tensor lb = oracle::random_tensor({3}, rng, -1, 1, true);
  check("linear", pj([&] { return nn::linear(li, lw, lb); }), {{"x", li}, {"w", lw}, {"b", lb}});

  Tensor f = oracle::random_tensor({3, 10, 12}, rng, -1, 1, true);
  const std::vector<nn::RoIBox> boxes{{{4.3, 5.1}, 4.5, 3.0}, {{0.2, 9.7}, 5.0, 5.0}, {{11.0, 2.0}, 9.0, 9.0}};
  check("roi_align", pj([&] { return nn::roi_align_batch(f, boxes, 4); }), {{"fmap", f}});
  const std::vector<std::pair<Vec2, Vec2>> segs{{{1.2, 2.3}, {9.4, 2.1}}, {{3.0, 0.5}, {3.2, 8.8}}};
  check("sample_segments", pj([&] { return nn::sample_segments(f, segs, 6); }), {{"fmap", f}});
  Tensor probs = oracle::random_tensor({8}, rng, 0.05f, 0.95f, true);
  const std::vector<float> t{1, 0, 1, 1, 0, 0, 1, 0};
  check("bce", pj([&] { return nn::binary_cross_entropy(probs, t); }), {{"p", probs}});
  Tensor pred = Tensor::from({6}, {0.3f, -2.5f, 1.7f, 0.05f, -0.4f, 3.1f}, true);
  const std::vector<float> tg{0.1f, 0.0f, -0.2f, 0.5f, 0.6f, 0.0f};
  check("smooth_l1", pj([&] { return nn::smooth_l1_sum(pred, tg); }), {{"pred", pred}});

  // Full composite loss on a random 32x32 tile holding one room.
  TrainSample sample = room_tile(32, 8, 5, 6, 24, 22);
  std::bernoulli_distribution noise(0.05);
  for (int j = 0; j < 32; ++j)
    for (int i = 0; i < 32; ++i)
      for (int k = 0; k < 8; ++k)
        if (noise(rng)) sample.tile.set(i, j, k);
  const nn::NetworkConfig net{8, {4, 8, 8}, 8, 3, 6, 16, 3};
  nn::NetworkParams params = nn::init_params(net, 3);
  TrainConfig cfg;
  cfg.lambda_loc = 0.8;
  cfg.lambda_E = 1.3;
  const Tensor input = grid_to_tensor(sample.tile);
  const auto targets = make_targets(nn::corner_score_head(nn::forward_backbone(input, params), params), sample.gt, cfg,
                                    DetectionConfig{}, rng);
  std::vector<std::pair<std::string, Tensor>> inputs(params.entries().begin(), params.entries().end());
  auto terms = [&] {
    const auto fmap = nn::forward_backbone(input, params);
    return composite_loss(fmap, nn::corner_score_head(fmap, params), params, sample.gt, targets, cfg);
  };
  // The finite differences use the three terms combined in double; the
  // float32 total would put its rounding right at the tolerance.
  check("composite loss", [&] { return terms().total; }, inputs, 6, [&] {
    const auto lt = terms();
    return double(lt.l_cls.item()) + cfg.lambda_loc * double(lt.l_loc.item()) + cfg.lambda_E * double(lt.l_e.item());
  });

  const double secs = seconds_since(t0);
  return {failed == 0 && secs < 120.0, std::to_string(checked) + " elements, " + std::to_string(failed) +
                                           " failed, " + std::to_string(kinks) + " at ReLU kinks, " + fmt(secs, 3) +
                                           " s" + (first.empty() ? "" : "; " + first)};
}

Outcome roi_align_oracle() {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> dim(4, 24), chans(1, 4), pool(1, 7);
  std::uniform_real_distribution<double> side(0.3, 14.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int h = dim(rng), w = dim(rng);
    Tensor f = oracle::random_tensor({chans(rng), h, w}, rng);
    std::uniform_real_distribution<double> ux(-3.0, w + 3.0), uy(-3.0, h + 3.0);
    const Vec2 c{ux(rng), uy(rng)};
    const double bw = side(rng), bh = side(rng);
    const int p = pool(rng);
    const Tensor got = nn::roi_align(f, {c, bw, bh}, p);
    const auto ref = oracle::roi_align(f, c, bw, bh, p);
    if (got.numel() != ref.size()) return {false, "size mismatch in trial " + std::to_string(trial)};
    for (std::size_t k = 0; k < ref.size(); ++k) worst = std::max(worst, std::abs(got.data()[k] - ref[k]));
  }
  return {worst <= 1e-5, "max abs diff " + fmt(worst, 3) + " over 100 pairs"};
}

Outcome assignment_oracle() {
  std::mt19937_64 rng(3);
  TrainConfig cfg;
  cfg.neg_pos_ratio = 1e9;  // keep the entire negative pool so sets compare exactly
  int mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int s = 16 + 8 * (trial % 5);
    std::uniform_real_distribution<double> u(0.0, s);
    GroundTruth gt;
    const int n = 1 + trial % 7;
    for (int k = 0; k < n; ++k) gt.corners.push_back({u(rng), u(rng)});
    const auto a = assign_corner_samples(gt, s, cfg, rng);
    const auto want = oracle::classify_cells(gt.corners, s, cfg.corner_box_side, cfg.pos_iou, cfg.neg_iou);
    std::vector<int> got(want.size(), 0);
    for (const auto& [c, g] : a.positives) got[c.j * s + c.i] += 1;
    for (const auto& c : a.negatives) got[c.j * s + c.i] -= 1;
    bool ok = got == want && a.negatives.size() + a.positives.size() ==
                                 std::size_t(std::count_if(want.begin(), want.end(), [](int v) { return v != 0; }));
    // Each positive is matched to its highest-IoU corner.
    for (const auto& [c, g] : a.positives) {
      double best = -1.0;
      int arg = -1;
      for (int k = 0; k < n; ++k) {
        const double iou = oracle::square_iou(cfg.corner_box_side, gt.corners[k].x - (c.i + 0.5),
                                              gt.corners[k].y - (c.j + 0.5));
        if (iou > best) best = iou, arg = k;
      }
      ok = ok && g == arg;
    }
    mismatches += !ok;
  }
  return {mismatches == 0, std::to_string(mismatches) + " of 100 instances differ"};
}

Outcome loss_oracle() {
  std::mt19937_64 rng(4);
  double worst = 0.0;
  auto rel = [&](double got, double want) {
    worst = std::max(worst, std::abs(got - want) / std::max(std::abs(want), 1e-12));
  };
  for (int trial = 0; trial < 50; ++trial) {
    const int s = 32;
    std::uniform_real_distribution<double> u(0.0, s);
    GroundTruth gt;
    for (int k = 0; k < 1 + trial % 4; ++k) gt.corners.push_back({u(rng), u(rng)});
    const auto a = assign_corner_samples(gt, s, TrainConfig{}, rng);
    const Tensor scores = oracle::random_tensor({1, s, s}, rng, 0.0f, 1.0f);
    const int np = static_cast<int>(a.positives.size());
    const Tensor refine = oracle::random_tensor({np, 2}, rng, -4.5f, 4.5f);
    const auto [l_cls, l_loc] = corner_loss(scores, refine, a, gt);
    double cls = 0.0, loc = 0.0;
    for (const auto& [c, g] : a.positives) cls += bce(scores.data()[c.j * s + c.i], 1.0);
    for (const auto& c : a.negatives) cls += bce(scores.data()[c.j * s + c.i], 0.0);
    cls /= double(a.positives.size() + a.negatives.size());
    for (int k = 0; k < np; ++k) {
      const auto& [c, g] = a.positives[k];
      const double dx = gt.corners[g].x - (c.i + 0.5), dy = gt.corners[g].y - (c.j + 0.5);
      for (double d : {refine.data()[2 * k] - dx, refine.data()[2 * k + 1] - dy}) {
        const double ad = std::abs(d);
        loc += ad < 1.0 ? 0.5 * d * d : ad - 0.5;
      }
    }
    loc /= np;
    rel(l_cls.item(), cls);
    rel(l_loc.item(), loc);

    const int ne = 1 + trial;
    const Tensor ep = oracle::random_tensor({ne}, rng, 0.0f, 1.0f);
    std::vector<float> labels(ne);
    std::bernoulli_distribution coin(0.4);
    double le = 0.0;
    for (int k = 0; k < ne; ++k) {
      labels[k] = coin(rng) ? 1.0f : 0.0f;
      le += bce(ep.data()[k], labels[k]);
    }
    rel(edge_loss(ep, labels).item(), le / ne);
  }
  const bool spots = smooth_l1(0.5) == 0.125 && smooth_l1(2.0) == 1.5;
  return {worst <= 1e-6 && spots,
          "worst rel err " + fmt(worst, 3) + ", smoothL1(0.5)=" + fmt(smooth_l1(0.5)) + " smoothL1(2)=" + fmt(smooth_l1(2.0))};
}

Outcome metrics_oracles() {
  std::mt19937_64 rng(5);
  int betti_bad = 0, iou_bad = 0;
  std::uniform_int_distribution<int> nv(0, 10);
  std::bernoulli_distribution keep(0.3);
  for (int trial = 0; trial < 100; ++trial) {
    FloorPlan g;
    const int n = nv(rng);
    for (int k = 0; k < n; ++k) g.corners.push_back({double(k), double(k * k)});
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v)
        if (keep(rng)) g.edges.push_back({u, v});
    const auto bn = betti_numbers(g);
    betti_bad += std::pair{bn.b0, bn.b1} != oracle::betti(g);
  }
  // Betti error against the oracle on pairs.
  for (int trial = 0; trial < 20; ++trial) {
    FloorPlan p, q;
    for (int k = 0; k < 6; ++k) p.corners.push_back({double(k), 0.0}), q.corners.push_back({double(k), 1.0});
    for (int u = 0; u < 6; ++u)
      for (int v = u + 1; v < 6; ++v) {
        if (keep(rng)) p.edges.push_back({u, v});
        if (keep(rng)) q.edges.push_back({u, v});
      }
    const auto [p0, p1] = oracle::betti(p);
    const auto [q0, q1] = oracle::betti(q);
    betti_bad += betti_error(p, q) != double(std::abs(p0 - q0) + std::abs(p1 - q1));
  }

  std::uniform_int_distribution<int> coord(0, 40), len(1, 20), count(1, 5);
  auto manhattan = [&] {
    FloorPlan p;
    const int n = count(rng);
    for (int k = 0; k < n; ++k) {
      const Vec2 a{coord(rng) * 0.1, coord(rng) * 0.1};
      const double l = len(rng) * 0.1;
      p.corners.push_back(a);
      p.corners.push_back(k % 2 ? Vec2{a.x + l, a.y} : Vec2{a.x, a.y + l});
      p.edges.push_back({2 * k, 2 * k + 1});
    }
    return p;
  };
  for (int trial = 0; trial < 30; ++trial) {
    const auto a = manhattan(), b = manhattan();
    iou_bad += wall_iou(a, b, 0.05, 0.1) != oracle::wall_iou(a, b, 0.05, 0.1);
  }

  FloorPlan gt, pred;
  gt.corners = {{0, 0}, {5, 0}};
  pred.corners = {{0.07, 0}};
  const auto pr = corner_pr(pred, gt, {0.05, 0.1, 0.2});
  const bool example = pr.precision == std::array<double, 3>{0, 1, 1} && pr.recall == std::array<double, 3>{0, 0.5, 0.5};
  FloorPlan crowd, single;
  crowd.corners = {{0, 0}, {0.01, 0}, {0.02, 0}};
  single.corners = {{0, 0}};
  const auto pc = corner_pr(crowd, single, {0.05, 0.1, 0.2});
  const bool one_to_one = pc.recall[0] == 1.0 && std::abs(pc.precision[0] - 1.0 / 3.0) < 1e-15;
  const auto pe = corner_pr(FloorPlan{}, gt, {0.05, 0.1, 0.2});
  const bool empty = pe.precision == std::array<double, 3>{0, 0, 0} && pe.recall == std::array<double, 3>{0, 0, 0};
  const bool pr_ok = example && one_to_one && empty;
  return {betti_bad == 0 && iou_bad == 0 && pr_ok, "betti mismatches " + std::to_string(betti_bad) +
                                                       "/120, iou mismatches " + std::to_string(iou_bad) +
                                                       "/30, PR cases " + (pr_ok ? "ok" : "wrong")};
}

// Gate settings: tile reduced to 128, 6 m x 6 m scenes so every scene is one tile.
const char* kGateConfig = R"({
  "tile_size": 128,
  "tile_overlap": 32,
  "extent": [6.0, 6.0],
  "n_rooms": [1, 4],
  "lr": 0.001,
  "epochs": 16,
  "decay_epoch": 12,
  "augment": true,
  "checkpoint_every": 0
})";

Outcome synthetic_gate(const fs::path& work) {
  const auto t0 = Clock::now();
  const fs::path dir = work / "gate";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "gate.json") << kGateConfig;
  const std::string cfg = " --config " + (dir / "gate.json").string();
  if (run_cli("synth --out " + (dir / "train").string() + " --scenes 200 --seed 100" + cfg) != 0 ||
      run_cli("synth --out " + (dir / "test").string() + " --scenes 50 --seed 200" + cfg) != 0) {
    return {false, "synth failed"};
  }
  const auto model = dir / "model.fppn";
  if (run_cli("train --data " + (dir / "train").string() + " --out " + model.string() + " --seed 1" + cfg,
              "FLOORPP_THREADS=1") != 0) {
    return {false, "train failed"};
  }
  const double train_secs = seconds_since(t0);
  const auto tiles = build_training_set(load_manifest(dir / "train" / "manifest.json"), load_config(dir / "gate.json"));

  double p = 0, r = 0, iou = 0, betti = 0;
  const auto scenes = load_manifest(dir / "test" / "manifest.json");
  for (std::size_t k = 0; k < scenes.size(); ++k) {
    const auto pred = dir / ("pred_" + std::to_string(k) + ".json");
    const auto rep = dir / ("report_" + std::to_string(k) + ".json");
    if (run_cli("infer --model " + model.string() + " --cloud " + scenes[k].cloud.string() + " --out " + pred.string() +
                    cfg,
                "FLOORPP_THREADS=1") != 0 ||
        run_cli("eval --pred " + pred.string() + " --gt " + scenes[k].plan.string() + " --report " + rep.string()) != 0) {
      return {false, "infer/eval failed on scene " + std::to_string(k)};
    }
    const auto j = nlohmann::json::parse(slurp(rep));
    p += double(j["precision"][2]);
    r += double(j["recall"][2]);
    iou += double(j["iou"]);
    betti += double(j["betti_error"]);
  }
  const double n = double(scenes.size());
  p /= n, r /= n, iou /= n, betti /= n;
  const double secs = seconds_since(t0);
  const bool pass = tiles.size() == 200 && r >= 0.90 && p >= 0.80 && iou >= 0.70 && betti <= 1.0 && secs <= 7200;
  return {pass, std::to_string(tiles.size()) + " training tiles; recall@0.2m " + fmt(r, 3) + " precision@0.2m " +
                    fmt(p, 3) + " iou " + fmt(iou, 3) + " betti_error " + fmt(betti, 3) + "; train " +
                    fmt(train_secs, 4) + " s, total " + fmt(secs, 4) + " s"};
}

Outcome overfit() {
  const TrainSample sample = room_tile(64, 32, 10, 12, 50, 44);
  TrainConfig cfg;  // lr 1e-4 as in the default schedule
  const DetectionConfig det;
  nn::NetworkParams params = nn::init_params(nn::NetworkConfig{}, 1);
  nn::Adam adam(cfg.lr);
  std::mt19937_64 rng(7);
  double first = 0.0, best = 1e300;
  int reached = -1;
  for (int step = 0; step < 500; ++step) {
    const double l = train_step(sample, cfg, det, params, adam, rng).l_total;
    if (step == 0) first = l;
    best = std::min(best, l);
    if (reached < 0 && l <= 0.5 * first) reached = step + 1;
  }
  TrainConfig sched;
  const bool lr_ok = lr_at_epoch(sched, 0) == 1e-4 && lr_at_epoch(sched, 39) == 1e-4 &&
                     std::abs(lr_at_epoch(sched, 40) - 1e-5) < 1e-20 && std::abs(lr_at_epoch(sched, 54) - 1e-5) < 1e-20;
  return {reached > 0 && lr_ok, "l_total " + fmt(first) + " -> min " + fmt(best) + ", halved at step " +
                                    (reached > 0 ? std::to_string(reached) : std::string("never")) + "; lr(39)=" +
                                    fmt(lr_at_epoch(sched, 39)) + " lr(40)=" + fmt(lr_at_epoch(sched, 40))};
}

Outcome rasterization() {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> xy(0.0, 25.6), z(0.0, 3.0);
  std::vector<Point3> pts(1'000'000);
  for (auto& q : pts) q = {xy(rng), xy(rng), z(rng)};
  const PointCloud cloud(pts);
  PillarConfig pc;
  const StoryBand band{0.0, 3.0};
  const Vec2 origin{0.0, 0.0};
  const auto t0 = Clock::now();
  const PillarGrid ref = rasterize(cloud, band, pc, origin, 1);
  const double secs = seconds_since(t0);
  const bool dims = ref.width() == 512 && ref.height() == 512 && ref.n_bins() == 32;

  bool same = true;
  std::shuffle(pts.begin(), pts.end(), rng);
  const PointCloud shuffled(pts);
  for (int threads : {1, 2, 3, 4, 8, 16}) same = same && rasterize(shuffled, band, pc, origin, threads).bits() == ref.bits();
  same = same && rasterize(cloud, band, pc, origin, 7).bits() == ref.bits();
  return {dims && same && secs < 2.0, std::to_string(ref.width()) + "x" + std::to_string(ref.height()) + "x" +
                                          std::to_string(ref.n_bins()) + " in " + fmt(secs, 3) +
                                          " s single-threaded; shuffle/thread invariance " + (same ? "ok" : "BROKEN")};
}

Outcome determinism(const fs::path& work) {
  const fs::path dir = work / "determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "small.json") << R"({"extent": [4, 4], "point_density": 150, "tile_size": 64,
      "tile_overlap": 16, "widths": [4, 8, 8], "c_feat": 8, "refine_hidden": 16, "augment": true})";
  const std::string cfg = " --config " + (dir / "small.json").string();
  for (const char* name : {"a", "b"}) {
    if (run_cli("synth --out " + (dir / name).string() + " --scenes 4 --seed 11" + cfg) != 0) return {false, "synth failed"};
  }
  int files = 0, differing = 0;
  for (const auto& e : fs::directory_iterator(dir / "a")) {
    ++files;
    differing += slurp(e.path()) != slurp(dir / "b" / e.path().filename());
  }
  const std::string train = "train --data " + (dir / "a").string() + " --epochs 3 --seed 5" + cfg + " --out ";
  if (run_cli(train + (dir / "m1.fppn").string()) != 0 ||
      run_cli(train + (dir / "m2.fppn").string(), "FLOORPP_THREADS=1") != 0) {
    return {false, "train failed"};
  }
  const std::string m1 = slurp(dir / "m1.fppn"), m2 = slurp(dir / "m2.fppn");
  const bool ckpt_same = !m1.empty() && m1 == m2;
  return {ckpt_same && differing == 0 && files > 0,
          "checkpoints " + std::string(ckpt_same ? "identical" : "DIFFER") + " (" + std::to_string(m1.size()) +
              " bytes); synth files differing " + std::to_string(differing) + "/" + std::to_string(files)};
}

Outcome proposals() {
  const DetectionConfig det;
  const std::vector<Vec2> rect{{10, 10}, {40, 10}, {40, 30}, {10, 30}};
  const auto r = propose_edges(rect, det.axis_tol, det.min_edge_len, 0.0);
  std::set<std::pair<int, int>> want{{0, 1}, {1, 2}, {2, 3}, {0, 3}}, got;
  for (const auto& e : r) got.insert({e.a, e.b});
  const bool rect_ok = r.size() == 4 && got == want;
  const std::vector<Vec2> line{{10, 10}, {20, 10}, {35, 10}};
  const auto c = propose_edges(line, det.axis_tol, det.min_edge_len, 0.0);
  std::set<std::pair<int, int>> cgot;
  for (const auto& e : c) cgot.insert({e.a, e.b});
  const bool line_ok = c.size() == 2 && cgot == std::set<std::pair<int, int>>{{0, 1}, {1, 2}};

  // Random sets: half continuous, half snapped to a coarse lattice so many
  // corners share rows and columns.
  std::mt19937_64 rng(10);
  std::uniform_int_distribution<int> count(1, 40), lattice(0, 12);
  std::uniform_real_distribution<double> u(0.0, 128.0), jitter(-1.0, 1.0);
  int violations = 0;
  std::size_t worst_ratio_n = 0, worst_count = 0;
  double worst_ratio = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = count(rng);
    std::vector<Vec2> pos;
    std::set<std::pair<double, double>> uniq;
    while (static_cast<int>(pos.size()) < n) {
      const Vec2 p = trial % 2 ? Vec2{u(rng), u(rng)}
                               : Vec2{lattice(rng) * 10.0 + jitter(rng), lattice(rng) * 10.0 + jitter(rng)};
      if (uniq.insert({p.x, p.y}).second) pos.push_back(p);
    }
    const auto props = propose_edges(pos, det.axis_tol, det.min_edge_len, 0.0);
    if (props.size() > 2 * pos.size()) ++violations;
    const double ratio = double(props.size()) / double(pos.size());
    if (ratio > worst_ratio) worst_ratio = ratio, worst_ratio_n = pos.size(), worst_count = props.size();
  }
  return {rect_ok && line_ok && violations == 0,
          std::string("rectangle ") + (rect_ok ? "4" : "WRONG") + ", collinear " + (line_ok ? "2" : "WRONG") +
              "; random sets over 2n: " + std::to_string(violations) + "/1000 (worst " +
              std::to_string(worst_count) + " proposals for " + std::to_string(worst_ratio_n) + " corners)"};
}

}  // namespace

int main(int argc, char** argv) {
  fs::path work = fs::current_path() / "acceptance_work";
  std::set<int> only;
  for (int k = 1; k < argc; ++k) {
    const std::string arg = argv[k];
    if (arg == "--work" && k + 1 < argc) {
      work = argv[++k];
    } else if (arg == "--only" && k + 1 < argc) {
      std::stringstream ss(argv[++k]);
      for (std::string item; std::getline(ss, item, ',');) only.insert(std::stoi(item));
    } else {
      std::cerr << "usage: floorpp_acceptance [--work DIR] [--only 1,2,...]\n";
      return 2;
    }
  }
  fs::create_directories(work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient correctness", gradients},
      {"RoIAlign oracle", roi_align_oracle},
      {"sample-assignment oracle", assignment_oracle},
      {"loss oracle", loss_oracle},
      {"metrics oracles", metrics_oracles},
      {"end-to-end synthetic gate", [&] { return synthetic_gate(work); }},
      {"overfit sanity and lr schedule", overfit},
      {"rasterization speed and determinism", rasterization},
      {"training and synth determinism", [&] { return determinism(work); }},
      {"Manhattan proposals", proposals},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << "criterion " << id << " [" << criteria[k].first << "]: " << (o.pass ? "PASS" : "FAIL") << "  "
              << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
