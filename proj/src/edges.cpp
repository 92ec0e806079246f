#include "floorpp/edges.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace floorpp {

std::vector<Cell> select_corners(const nn::Tensor& scores, double threshold, int nms_radius,
                                 int max_corners) {
  if (scores.ndim() != 3 || scores.dim(0) != 1) {
    throw std::invalid_argument("select_corners: scores must be [1, H, W]");
  }
  const int h = scores.dim(1), w = scores.dim(2);
  auto s = scores.data();
  std::vector<int> cand;
  for (int n = 0; n < h * w; ++n)
    if (s[n] >= threshold) cand.push_back(n);
  std::stable_sort(cand.begin(), cand.end(), [&](int a, int b) { return s[a] > s[b]; });

  std::vector<std::uint8_t> suppressed(static_cast<std::size_t>(h) * w, 0);
  std::vector<Cell> kept;
  for (int n : cand) {
    if (static_cast<int>(kept.size()) >= max_corners) break;
    if (suppressed[n]) continue;
    const int j = n / w, i = n % w;
    kept.push_back({i, j});
    for (int jj = std::max(0, j - nms_radius); jj <= std::min(h - 1, j + nms_radius); ++jj)
      for (int ii = std::max(0, i - nms_radius); ii <= std::min(w - 1, i + nms_radius); ++ii)
        suppressed[static_cast<std::size_t>(jj) * w + ii] = 1;
  }
  return kept;
}

std::vector<CornerPrediction> refine_corners(const nn::Tensor& fmap, const nn::Tensor& scores,
                                             std::span<const Cell> cells,
                                             const nn::NetworkParams& params, int box_side) {
  std::vector<CornerPrediction> out;
  if (cells.empty()) return out;
  const int roi_pool = nn::NetworkConfig::infer(params).roi_pool;
  std::vector<nn::RoIBox> boxes;
  for (const Cell& c : cells) {
    boxes.push_back({cell_center(c), static_cast<double>(box_side), static_cast<double>(box_side)});
  }
  const nn::Tensor feats = nn::roi_align_batch(fmap, boxes, roi_pool);
  const nn::Tensor offsets = nn::corner_refine_head(feats, params, box_side);
  const int w = scores.dim(2);
  for (std::size_t n = 0; n < cells.size(); ++n) {
    CornerPrediction p;
    p.cell = cells[n];
    p.score = scores.data()[static_cast<std::size_t>(cells[n].j) * w + cells[n].i];
    p.offset = {offsets.data()[2 * n], offsets.data()[2 * n + 1]};
    p.position = cell_center(cells[n]) + p.offset;
    out.push_back(p);
  }
  return out;
}

std::vector<EdgeProposal> propose_edges(std::span<const Vec2> positions, double axis_tol,
                                        double min_edge_len, double max_edge_len) {
  const int n = static_cast<int>(positions.size());
  if (max_edge_len <= 0.0) max_edge_len = std::numeric_limits<double>::infinity();
  std::set<std::pair<int, int>> seen;
  std::vector<EdgeProposal> out;

  // Direction d: axis 0 = x, 1 = y; sign +1 / -1.
  for (int a = 0; a < n; ++a) {
    for (int axis = 0; axis < 2; ++axis) {
      for (int sign : {1, -1}) {
        int best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (int b = 0; b < n; ++b) {
          if (b == a) continue;
          const Vec2 delta = positions[b] - positions[a];
          const double along = sign * (axis == 0 ? delta.x : delta.y);
          const double ortho = std::abs(axis == 0 ? delta.y : delta.x);
          if (ortho > axis_tol || along <= min_edge_len || along > max_edge_len) continue;
          if (along < best_d) {
            best_d = along;
            best = b;
          }
        }
        if (best < 0) continue;
        const auto key = std::minmax(a, best);
        if (!seen.insert(key).second) continue;
        out.push_back({key.first, key.second,
                       axis == 0 ? Orientation::horizontal : Orientation::vertical, best_d,
                       std::nullopt});
      }
    }
  }
  return out;
}

std::vector<EdgeProposal> propose_edges(std::span<const CornerPrediction> corners, double axis_tol,
                                        double min_edge_len, double max_edge_len) {
  std::vector<Vec2> pos;
  pos.reserve(corners.size());
  for (const auto& c : corners) pos.push_back(c.position);
  return propose_edges(pos, axis_tol, min_edge_len, max_edge_len);
}

std::vector<std::pair<Vec2, Vec2>> proposal_segments(std::span<const EdgeProposal> proposals,
                                                     std::span<const Vec2> positions) {
  std::vector<std::pair<Vec2, Vec2>> segs;
  segs.reserve(proposals.size());
  for (const auto& p : proposals) segs.emplace_back(positions[p.a], positions[p.b]);
  return segs;
}

std::vector<EdgeProposal> verify_edges(std::span<const EdgeProposal> proposals,
                                       std::span<const Vec2> positions, const nn::Tensor& fmap,
                                       const nn::NetworkParams& params, double accept_threshold,
                                       int samples) {
  std::vector<EdgeProposal> out;
  if (proposals.empty()) return out;
  const auto segs = proposal_segments(proposals, positions);
  const nn::Tensor feats = nn::sample_segments(fmap, segs, samples);
  const nn::Tensor scores = nn::edge_head(feats, params);
  for (std::size_t k = 0; k < proposals.size(); ++k) {
    const double s = scores.data()[k];
    if (s >= accept_threshold) {
      EdgeProposal p = proposals[k];
      p.score = s;
      out.push_back(p);
    }
  }
  return out;
}

}  // namespace floorpp
