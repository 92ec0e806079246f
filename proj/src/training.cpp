#include "floorpp/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>

#include <json.hpp>

namespace floorpp {

void TrainConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("train: " + m); };
  if (!(lr > 0.0)) fail("lr must be positive");
  if (epochs < 1) fail("epochs must be at least 1");
  if (decay_epoch < 0 || decay_epoch > epochs) fail("decay_epoch must lie in [0, epochs]");
  if (!(decay_factor > 0.0)) fail("decay_factor must be positive");
  if (!(lambda_E >= 0.0) || !(lambda_loc >= 0.0)) fail("loss weights must be non-negative");
  if (!(neg_iou >= 0.0 && neg_iou < pos_iou && pos_iou <= 1.0)) {
    fail("IoU thresholds must satisfy 0 <= neg_iou < pos_iou <= 1");
  }
  if (corner_box_side < 1) fail("corner_box_side must be positive");
  if (!(neg_pos_ratio > 0.0)) fail("neg_pos_ratio must be positive");
  if (checkpoint_every < 0) fail("checkpoint_every must be non-negative");
  if (!(edge_match_tol >= 0.0)) fail("edge_match_tol must be non-negative");
  if (max_train_detections < 0) fail("max_train_detections must be non-negative");
}

void GroundTruth::validate() const {
  const int n = static_cast<int>(corners.size());
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto [a, b] = edges[k];
    if (a < 0 || b < 0 || a >= n || b >= n || a == b) {
      throw FormatError("ground truth edge " + std::to_string(k) + " has bad corner indices");
    }
    const Vec2 d = corners[static_cast<std::size_t>(b)] - corners[static_cast<std::size_t>(a)];
    // Alignment leaves walls a fraction of a cell off-axis.
    const bool horizontal = std::abs(d.y) <= kGtAxisTolerance && std::abs(d.x) > kGtAxisTolerance;
    const bool vertical = std::abs(d.x) <= kGtAxisTolerance && std::abs(d.y) > kGtAxisTolerance;
    if (!horizontal && !vertical) {
      throw FormatError("ground truth edge " + std::to_string(k) + " is not axis-aligned");
    }
  }
}

double box_iou(const AxisBox& a, const AxisBox& b) {
  const double area_a = (a.x1 - a.x0) * (a.y1 - a.y0);
  const double area_b = (b.x1 - b.x0) * (b.y1 - b.y0);
  if (!(area_a > 0.0) || !(area_b > 0.0)) throw std::invalid_argument("box_iou: zero-area box");
  const double w = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
  const double h = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  const double inter = w * h;
  return inter / (area_a + area_b - inter);
}

SampleAssignment assign_corner_samples(const GroundTruth& gt, int tile_size,
                                       const TrainConfig& config, std::mt19937_64& rng) {
  const int s = tile_size;
  const double side = config.corner_box_side;
  std::vector<double> best(static_cast<std::size_t>(s) * s, 0.0);
  std::vector<int> match(best.size(), -1);
  for (int g = 0; g < static_cast<int>(gt.corners.size()); ++g) {
    const Vec2 c = gt.corners[static_cast<std::size_t>(g)];
    const AxisBox gbox = AxisBox::centered(c, side);
    // Cells farther than one box side cannot overlap.
    const int i0 = std::max(0, static_cast<int>(std::floor(c.x - side)));
    const int i1 = std::min(s - 1, static_cast<int>(std::ceil(c.x + side)));
    const int j0 = std::max(0, static_cast<int>(std::floor(c.y - side)));
    const int j1 = std::min(s - 1, static_cast<int>(std::ceil(c.y + side)));
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) {
        const double iou = box_iou(AxisBox::centered(cell_center({i, j}), side), gbox);
        const std::size_t idx = static_cast<std::size_t>(j) * s + i;
        if (iou > best[idx]) {
          best[idx] = iou;
          match[idx] = g;
        }
      }
  }
  SampleAssignment out;
  std::vector<Cell> pool;
  for (int j = 0; j < s; ++j)
    for (int i = 0; i < s; ++i) {
      const std::size_t idx = static_cast<std::size_t>(j) * s + i;
      if (best[idx] > config.pos_iou) {
        out.positives.push_back({{i, j}, match[idx]});
      } else if (best[idx] < config.neg_iou) {
        pool.push_back({i, j});
      }
    }
  const std::size_t want =
      out.positives.empty()
          ? static_cast<std::size_t>(kEmptyTileNegatives)
          : static_cast<std::size_t>(std::ceil(config.neg_pos_ratio * static_cast<double>(out.positives.size())));
  if (pool.size() <= want) {
    out.negatives = std::move(pool);
  } else {
    std::sample(pool.begin(), pool.end(), std::back_inserter(out.negatives), want, rng);
  }
  return out;
}

double smooth_l1(double t) {
  const double a = std::abs(t);
  return a < 1.0 ? 0.5 * t * t : a - 0.5;
}

std::pair<nn::Tensor, nn::Tensor> corner_loss(const nn::Tensor& scores,
                                              const nn::Tensor& refinements,
                                              const SampleAssignment& assignment,
                                              const GroundTruth& gt) {
  const int w = scores.dim(2);
  std::vector<int> idx;
  std::vector<float> targets;
  for (const auto& [c, g] : assignment.positives) {
    idx.push_back(c.j * w + c.i);
    targets.push_back(1.0f);
  }
  for (const auto& c : assignment.negatives) {
    idx.push_back(c.j * w + c.i);
    targets.push_back(0.0f);
  }
  nn::Tensor l_cls = idx.empty() ? nn::Tensor::scalar(0.0f)
                                 : nn::binary_cross_entropy(nn::gather(scores, idx), targets);
  if (assignment.positives.empty()) return {l_cls, nn::Tensor::scalar(0.0f)};

  if (refinements.ndim() != 2 || refinements.dim(0) != static_cast<int>(assignment.positives.size()) ||
      refinements.dim(1) != 2) {
    throw std::invalid_argument("corner_loss: refinements must be [positives, 2]");
  }
  std::vector<float> offsets;
  for (const auto& [c, g] : assignment.positives) {
    const Vec2 d = gt.corners[static_cast<std::size_t>(g)] - cell_center(c);
    offsets.push_back(static_cast<float>(d.x));
    offsets.push_back(static_cast<float>(d.y));
  }
  nn::Tensor l_loc = nn::scale(nn::smooth_l1_sum(refinements, offsets),
                               1.0f / static_cast<float>(assignment.positives.size()));
  return {l_cls, l_loc};
}

nn::Tensor edge_loss(const nn::Tensor& edge_scores, std::span<const float> labels) {
  if (edge_scores.numel() != labels.size()) {
    throw std::invalid_argument("edge_loss: " + std::to_string(edge_scores.numel()) + " scores vs " +
                                std::to_string(labels.size()) + " labels");
  }
  if (labels.empty()) return nn::Tensor::scalar(0.0f);
  return nn::binary_cross_entropy(edge_scores, labels);
}

namespace {

Orientation orientation_of(Vec2 p, Vec2 q) {
  return std::abs(q.x - p.x) >= std::abs(q.y - p.y) ? Orientation::horizontal : Orientation::vertical;
}

}  // namespace

EdgeSamples assign_edge_samples(std::span<const EdgeProposal> proposals,
                                std::span<const Vec2> positions, const GroundTruth& gt,
                                double match_tol, double neg_pos_ratio, std::mt19937_64& rng) {
  EdgeSamples out;
  std::vector<int> pos, neg;
  for (std::size_t k = 0; k < proposals.size(); ++k) {
    const auto& p = proposals[k];
    const Vec2 a = positions[static_cast<std::size_t>(p.a)];
    const Vec2 b = positions[static_cast<std::size_t>(p.b)];
    bool hit = false;
    for (const auto& [u, v] : gt.edges) {
      const Vec2 gu = gt.corners[static_cast<std::size_t>(u)];
      const Vec2 gv = gt.corners[static_cast<std::size_t>(v)];
      if (orientation_of(gu, gv) != p.orientation) continue;
      const bool direct = distance(a, gu) <= match_tol && distance(b, gv) <= match_tol;
      const bool swapped = distance(a, gv) <= match_tol && distance(b, gu) <= match_tol;
      if (direct || swapped) {
        hit = true;
        break;
      }
    }
    out.labels.push_back(hit ? 1.0f : 0.0f);
    (hit ? pos : neg).push_back(static_cast<int>(k));
  }
  const std::size_t want =
      pos.empty() ? static_cast<std::size_t>(kEdgeNegativesWithoutPositives)
                  : static_cast<std::size_t>(std::ceil(neg_pos_ratio * static_cast<double>(pos.size())));
  std::vector<int> kept_neg;
  if (neg.size() <= want) {
    kept_neg = std::move(neg);
  } else {
    std::sample(neg.begin(), neg.end(), std::back_inserter(kept_neg), want, rng);
  }
  std::merge(pos.begin(), pos.end(), kept_neg.begin(), kept_neg.end(), std::back_inserter(out.selected));
  return out;
}

StepTargets make_targets(const nn::Tensor& scores, const GroundTruth& gt, const TrainConfig& config,
                         const DetectionConfig& detection, std::mt19937_64& rng) {
  const int s = scores.dim(1);
  StepTargets t;
  t.corners = assign_corner_samples(gt, s, config, rng);

  std::vector<Vec2> positions = gt.corners;
  if (config.max_train_detections > 0) {
    const auto cells = select_corners(scores, detection.corner_threshold, detection.nms_radius,
                                      config.max_train_detections);
    for (const Cell& c : cells) {
      const Vec2 p = cell_center(c);
      const bool near_gt = std::any_of(gt.corners.begin(), gt.corners.end(), [&](Vec2 g) {
        return distance(p, g) <= config.edge_match_tol;
      });
      if (!near_gt) positions.push_back(p);
    }
  }
  const double max_len = detection.max_edge_len > 0.0 ? detection.max_edge_len : static_cast<double>(s);
  const auto proposals = propose_edges(positions, detection.axis_tol, detection.min_edge_len, max_len);
  const auto samples = assign_edge_samples(proposals, positions, gt, config.edge_match_tol,
                                           config.neg_pos_ratio, rng);
  for (int k : samples.selected) {
    const auto& p = proposals[static_cast<std::size_t>(k)];
    t.edge_segments.emplace_back(positions[static_cast<std::size_t>(p.a)],
                                 positions[static_cast<std::size_t>(p.b)]);
    t.edge_labels.push_back(samples.labels[static_cast<std::size_t>(k)]);
  }
  return t;
}

LossBreakdown LossTerms::values(const TrainConfig& config) const {
  LossBreakdown b;
  b.l_total = total.item();
  b.l_cls = l_cls.item();
  b.l_loc = l_loc.item();
  b.l_e = l_e.item();
  b.l_c = b.l_cls + config.lambda_loc * b.l_loc;
  return b;
}

LossTerms composite_loss(const nn::Tensor& fmap, const nn::Tensor& scores,
                         const nn::NetworkParams& params, const GroundTruth& gt,
                         const StepTargets& targets, const TrainConfig& config) {
  const nn::NetworkConfig net = nn::NetworkConfig::infer(params);
  nn::Tensor refinements;
  if (!targets.corners.positives.empty()) {
    std::vector<nn::RoIBox> boxes;
    const double side = config.corner_box_side;
    for (const auto& [c, g] : targets.corners.positives) boxes.push_back({cell_center(c), side, side});
    refinements = nn::corner_refine_head(nn::roi_align_batch(fmap, boxes, net.roi_pool), params, side);
  }
  auto [l_cls, l_loc] = corner_loss(scores, refinements, targets.corners, gt);
  nn::Tensor l_e = nn::Tensor::scalar(0.0f);
  if (!targets.edge_segments.empty()) {
    const nn::Tensor feats = nn::sample_segments(fmap, targets.edge_segments, net.edge_samples);
    l_e = edge_loss(nn::edge_head(feats, params), targets.edge_labels);
  }
  nn::Tensor total = nn::add(nn::add(l_cls, nn::scale(l_loc, static_cast<float>(config.lambda_loc))),
                             nn::scale(l_e, static_cast<float>(config.lambda_E)));
  return {total, l_cls, l_loc, l_e};
}

double lr_at_epoch(const TrainConfig& config, int epoch) {
  return epoch < config.decay_epoch ? config.lr : config.lr / config.decay_factor;
}

TrainSample dihedral(const TrainSample& sample, int code) {
  const PillarGrid& g = sample.tile;
  const int s = g.width();
  if (g.height() != s) throw std::invalid_argument("dihedral: tile must be square");
  const bool fx = code & 1, fy = code & 2, sw = code & 4;
  TrainSample out;
  out.tile = PillarGrid(s, s, g.n_bins(), g.origin(), g.cell_size());
  const int nb = g.n_bins();
  const auto& src = g.bits();
  auto& dst = out.tile.bits();
  for (int j = 0; j < s; ++j)
    for (int i = 0; i < s; ++i) {
      int ii = fx ? s - 1 - i : i;
      int jj = fy ? s - 1 - j : j;
      if (sw) std::swap(ii, jj);
      const std::size_t from = (static_cast<std::size_t>(j) * s + i) * nb;
      const std::size_t to = (static_cast<std::size_t>(jj) * s + ii) * nb;
      std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(from), nb,
                  dst.begin() + static_cast<std::ptrdiff_t>(to));
    }
  out.gt.edges = sample.gt.edges;
  for (Vec2 c : sample.gt.corners) {
    if (fx) c.x = s - c.x;
    if (fy) c.y = s - c.y;
    if (sw) std::swap(c.x, c.y);
    out.gt.corners.push_back(c);
  }
  return out;
}

LossBreakdown train_step(const TrainSample& sample, const TrainConfig& config,
                         const DetectionConfig& detection, nn::NetworkParams& params,
                         nn::Adam& optimizer, std::mt19937_64& rng) {
  const nn::Tensor input = grid_to_tensor(sample.tile);
  const nn::Tensor fmap = nn::forward_backbone(input, params);
  const nn::Tensor scores = nn::corner_score_head(fmap, params);
  const StepTargets targets = make_targets(scores, sample.gt, config, detection, rng);
  const LossTerms terms = composite_loss(fmap, scores, params, sample.gt, targets, config);
  const LossBreakdown values = terms.values(config);
  if (!std::isfinite(values.l_total)) throw NumericError("non-finite loss");
  params.zero_grad();
  terms.total.backward();
  for (const auto& [name, t] : params.entries()) {
    for (float g : t.grad()) {
      if (!std::isfinite(g)) throw NumericError("non-finite gradient in " + name);
    }
  }
  optimizer.step(params);
  return values;
}

namespace {

nlohmann::ordered_json step_record(int epoch, long step, const LossBreakdown& b, double lr) {
  return {{"epoch", epoch}, {"step", step},   {"l_total", b.l_total}, {"l_cls", b.l_cls},
          {"l_loc", b.l_loc}, {"l_e", b.l_e}, {"lr", lr}};
}

}  // namespace

TrainResult train(std::span<const TrainSample> dataset, const TrainConfig& config,
                  nn::NetworkParams params, const TrainOptions& options) {
  config.validate();
  if (dataset.empty()) throw std::invalid_argument("train: empty dataset");
  for (const auto& s : dataset) s.gt.validate();

  // The caller's tensors share storage with `params`; work on a private copy.
  TrainResult result{nn::decode_checkpoint(nn::encode_checkpoint(params)), {}};
  nn::NetworkParams& p = result.params;
  nn::Adam optimizer(config.lr);
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);

  std::ofstream log;
  if (options.log) {
    log.open(*options.log, std::ios::binary | std::ios::trunc);
    if (!log) throw std::runtime_error("cannot open " + options.log->string() + " for writing");
  }
  auto write_checkpoint = [&] {
    if (options.checkpoint) nn::save_checkpoint(p, *options.checkpoint);
  };

  long step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = lr_at_epoch(config, epoch);
    optimizer.set_lr(lr);
    std::shuffle(order.begin(), order.end(), rng);
    LossBreakdown sum;
    for (std::size_t idx : order) {
      LossBreakdown b;
      try {
        if (config.augment) {
          const int code = std::uniform_int_distribution<int>(0, 7)(rng);
          b = train_step(dihedral(dataset[idx], code), config, options.detection, p, optimizer, rng);
        } else {
          b = train_step(dataset[idx], config, options.detection, p, optimizer, rng);
        }
      } catch (const NumericError& e) {
        write_checkpoint();
        throw NumericError(std::string(e.what()) + " at epoch " + std::to_string(epoch) + ", step " +
                           std::to_string(step));
      }
      if (log) log << step_record(epoch, step, b, lr).dump() << '\n';
      sum.l_total += b.l_total;
      sum.l_c += b.l_c;
      sum.l_cls += b.l_cls;
      sum.l_loc += b.l_loc;
      sum.l_e += b.l_e;
      ++step;
    }
    const double n = static_cast<double>(dataset.size());
    LossBreakdown mean{sum.l_total / n, sum.l_c / n, sum.l_cls / n, sum.l_loc / n, sum.l_e / n};
    result.epoch_means.push_back(mean);
    if (options.on_epoch) options.on_epoch(epoch, mean);
    const bool last = epoch + 1 == config.epochs;
    if (last || (config.checkpoint_every > 0 && (epoch + 1) % config.checkpoint_every == 0)) {
      write_checkpoint();
    }
  }
  if (log) {
    log.flush();
    if (!log) throw std::runtime_error("failed writing " + options.log->string());
  }
  return result;
}

}  // namespace floorpp
