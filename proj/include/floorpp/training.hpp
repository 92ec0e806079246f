#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "floorpp/edges.hpp"
#include "floorpp/geometry.hpp"
#include "floorpp/nn/network.hpp"
#include "floorpp/pillars.hpp"
#include "floorpp/plan.hpp"

namespace floorpp {

struct TrainConfig {
  double lr = 1e-4;
  int epochs = 55;
  int decay_epoch = 40;
  double decay_factor = 10.0;
  double lambda_E = 1.0;
  double lambda_loc = 1.0;
  double pos_iou = 0.7;
  double neg_iou = 0.3;
  int corner_box_side = 9;
  double neg_pos_ratio = 1.0;
  std::uint64_t seed = 0;

  int checkpoint_every = 5;    // epochs; 0 writes only the final checkpoint
  double edge_match_tol = 2.0;  // cells
  int max_train_detections = 32;
  bool augment = false;  // random flips and quarter turns of each tile

  /// Throws ConfigError when an invariant fails.
  void validate() const;
};

/// Tile-local ground truth in continuous cell units (cell (i, j) spans
/// [i, i + 1) x [j, j + 1)).
struct GroundTruth {
  std::vector<Vec2> corners;
  std::vector<IndexPair> edges;

  /// Throws FormatError on bad indices or edges that are not axis-aligned
  /// within kGtAxisTolerance cells.
  void validate() const;
};

inline constexpr double kGtAxisTolerance = 0.5;

struct SampleAssignment {
  std::vector<std::pair<Cell, int>> positives;  // cell and matched GT corner
  std::vector<Cell> negatives;                  // sampled negatives
};

struct AxisBox {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  static AxisBox centered(Vec2 c, double side) {
    return {c.x - side / 2, c.y - side / 2, c.x + side / 2, c.y + side / 2};
  }
};

/// Intersection over union; throws std::invalid_argument for zero-area boxes.
double box_iou(const AxisBox& a, const AxisBox& b);

/// Max-IoU corner sample assignment on a tile_size x tile_size grid.
/// Cells are visited in row-major order; negatives are sampled uniformly
/// without replacement, ceil(neg_pos_ratio * positives) of them, or 32 when
/// there are no positives.
SampleAssignment assign_corner_samples(const GroundTruth& gt, int tile_size,
                                       const TrainConfig& config, std::mt19937_64& rng);

inline constexpr int kEmptyTileNegatives = 32;

/// 0.5 t^2 for |t| < 1, |t| - 0.5 otherwise.
double smooth_l1(double t);

/// (l_cls, l_loc). scores is [1, S, S]; refinements is [positives, 2] in the
/// order of assignment.positives.
std::pair<nn::Tensor, nn::Tensor> corner_loss(const nn::Tensor& scores,
                                              const nn::Tensor& refinements,
                                              const SampleAssignment& assignment,
                                              const GroundTruth& gt);

/// Mean binary cross-entropy; throws std::invalid_argument on length mismatch.
nn::Tensor edge_loss(const nn::Tensor& edge_scores, std::span<const float> labels);

struct EdgeSamples {
  std::vector<float> labels;     // one per proposal
  std::vector<int> selected;     // proposal indices used for the loss
};

/// Labels a proposal 1 iff both endpoints are within match_tol of the two
/// endpoints of a GT edge with the same orientation, then keeps all positives
/// and ceil(neg_pos_ratio * positives) sampled negatives (at most
/// kEdgeNegativesWithoutPositives when there are no positives).
EdgeSamples assign_edge_samples(std::span<const EdgeProposal> proposals,
                                std::span<const Vec2> positions, const GroundTruth& gt,
                                double match_tol, double neg_pos_ratio, std::mt19937_64& rng);

inline constexpr int kEdgeNegativesWithoutPositives = 8;

struct LossBreakdown {
  double l_total = 0;
  double l_c = 0;
  double l_cls = 0;
  double l_loc = 0;
  double l_e = 0;
};

/// Everything a training step needs besides the network outputs.
struct StepTargets {
  SampleAssignment corners;
  std::vector<std::pair<Vec2, Vec2>> edge_segments;  // tile cell units
  std::vector<float> edge_labels;
};

/// Builds the corner assignment and the labelled edge samples. Edge
/// proposals connect the GT corners plus detections from `scores` that are
/// not within edge_match_tol of a GT corner.
StepTargets make_targets(const nn::Tensor& scores, const GroundTruth& gt, const TrainConfig& config,
                         const DetectionConfig& detection, std::mt19937_64& rng);

struct LossTerms {
  nn::Tensor total;
  nn::Tensor l_cls;
  nn::Tensor l_loc;
  nn::Tensor l_e;

  LossBreakdown values(const TrainConfig& config) const;
};

/// L = l_cls + lambda_loc l_loc + lambda_E l_e on one tile's network outputs.
LossTerms composite_loss(const nn::Tensor& fmap, const nn::Tensor& scores,
                         const nn::NetworkParams& params, const GroundTruth& gt,
                         const StepTargets& targets, const TrainConfig& config);

double lr_at_epoch(const TrainConfig& config, int epoch);

struct TrainSample {
  PillarGrid tile;  // square, side divisible by 8
  GroundTruth gt;
};

/// Applies one of the 8 symmetries of the square to a tile and its GT.
/// Bit 0 flips x, bit 1 flips y, bit 2 swaps the axes (applied last).
TrainSample dihedral(const TrainSample& sample, int code);

struct TrainOptions {
  std::optional<std::filesystem::path> checkpoint;  // written per checkpoint_every and at the end
  std::optional<std::filesystem::path> log;          // JSONL, one line per step
  DetectionConfig detection;
  /// Called after each epoch with the epoch index and the mean losses.
  std::function<void(int, const LossBreakdown&)> on_epoch;
};

struct TrainResult {
  nn::NetworkParams params;
  std::vector<LossBreakdown> epoch_means;
};

/// Adam training with batch 1 over a seeded per-epoch shuffle.
///
/// Throws NumericError on a non-finite loss or gradient, after writing the
/// last good parameters to the checkpoint path.
TrainResult train(std::span<const TrainSample> dataset, const TrainConfig& config,
                  nn::NetworkParams params, const TrainOptions& options = {});

/// Forward + loss + backward + Adam update on one sample; returns the losses.
LossBreakdown train_step(const TrainSample& sample, const TrainConfig& config,
                         const DetectionConfig& detection, nn::NetworkParams& params,
                         nn::Adam& optimizer, std::mt19937_64& rng);

}  // namespace floorpp
