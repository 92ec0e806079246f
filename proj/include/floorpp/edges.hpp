#pragma once

#include <optional>
#include <span>
#include <vector>

#include "floorpp/geometry.hpp"
#include "floorpp/nn/network.hpp"

namespace floorpp {

struct CornerPrediction {
  Cell cell;
  double score = 0.0;
  Vec2 offset;          // refinement from the cell center, cell units
  Vec2 position;        // cell center + offset, tile cell units
  Vec2 world_position;  // meters
};

enum class Orientation { horizontal, vertical };

struct EdgeProposal {
  int a = 0;  // a < b
  int b = 0;
  Orientation orientation = Orientation::horizontal;
  double length = 0.0;  // along-axis distance, cells
  std::optional<double> score;
};

struct DetectionConfig {
  double corner_threshold = 0.5;
  int nms_radius = 4;
  int max_corners = 512;
  double axis_tol = 2.0;
  double min_edge_len = 4.0;
  double max_edge_len = 0.0;  // <= 0 means the tile size
  double edge_threshold = 0.5;
};

/// Greedy NMS over a [1, S, S] score map: cells at or above threshold in
/// descending score order (ties by row-major index), suppressing cells within
/// Chebyshev distance nms_radius of a kept cell.
std::vector<Cell> select_corners(const nn::Tensor& scores, double threshold, int nms_radius,
                                 int max_corners);

/// Refines selected cells with RoIAlign + the refinement head.
std::vector<CornerPrediction> refine_corners(const nn::Tensor& fmap, const nn::Tensor& scores,
                                             std::span<const Cell> cells,
                                             const nn::NetworkParams& params, int box_side);

/// Nearest-corner-per-direction Manhattan proposals.
///
/// For each corner and each of the four axis directions, links the nearest
/// corner whose orthogonal offset is within axis_tol and whose along-axis
/// distance lies in (min_edge_len, max_edge_len]. Pairs are deduplicated.
std::vector<EdgeProposal> propose_edges(std::span<const Vec2> positions, double axis_tol,
                                        double min_edge_len, double max_edge_len);
std::vector<EdgeProposal> propose_edges(std::span<const CornerPrediction> corners, double axis_tol,
                                        double min_edge_len, double max_edge_len);

/// Segments (tile cell units) for a list of proposals.
std::vector<std::pair<Vec2, Vec2>> proposal_segments(std::span<const EdgeProposal> proposals,
                                                     std::span<const Vec2> positions);

/// Scores each proposal with the edge head and keeps score >= threshold.
std::vector<EdgeProposal> verify_edges(std::span<const EdgeProposal> proposals,
                                       std::span<const Vec2> positions, const nn::Tensor& fmap,
                                       const nn::NetworkParams& params, double accept_threshold,
                                       int samples = 16);

}  // namespace floorpp
