#include "floorpp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <tuple>

namespace floorpp {

int count_corner_matches(const FloorPlan& pred, const FloorPlan& gt, double tolerance) {
  std::vector<std::tuple<double, int, int>> pairs;
  for (int p = 0; p < static_cast<int>(pred.corners.size()); ++p)
    for (int g = 0; g < static_cast<int>(gt.corners.size()); ++g) {
      const double d = distance(pred.corners[static_cast<std::size_t>(p)],
                                gt.corners[static_cast<std::size_t>(g)]);
      if (d <= tolerance) pairs.emplace_back(d, p, g);
    }
  std::sort(pairs.begin(), pairs.end());
  std::vector<char> used_p(pred.corners.size(), 0), used_g(gt.corners.size(), 0);
  int matches = 0;
  for (const auto& [d, p, g] : pairs) {
    if (used_p[static_cast<std::size_t>(p)] || used_g[static_cast<std::size_t>(g)]) continue;
    used_p[static_cast<std::size_t>(p)] = used_g[static_cast<std::size_t>(g)] = 1;
    ++matches;
  }
  return matches;
}

PrecisionRecall corner_pr(const FloorPlan& pred, const FloorPlan& gt,
                          const std::array<double, 3>& tolerances) {
  PrecisionRecall pr;
  for (std::size_t t = 0; t < tolerances.size(); ++t) {
    const int m = count_corner_matches(pred, gt, tolerances[t]);
    pr.precision[t] = pred.corners.empty() ? 0.0 : static_cast<double>(m) / pred.corners.size();
    pr.recall[t] = gt.corners.empty() ? 0.0 : static_cast<double>(m) / gt.corners.size();
  }
  return pr;
}

namespace {

struct Raster {
  Vec2 origin;
  int width = 0;
  int height = 0;
  double cell = 0.0;

  Vec2 center(int i, int j) const { return {origin.x + (i + 0.5) * cell, origin.y + (j + 0.5) * cell}; }
};

void paint(const FloorPlan& plan, const Raster& r, double half, std::vector<std::uint8_t>& px) {
  for (const auto& [a, b] : plan.edges) {
    const Vec2 p = plan.corners[static_cast<std::size_t>(a)];
    const Vec2 q = plan.corners[static_cast<std::size_t>(b)];
    const int i0 = std::max(0, static_cast<int>(std::floor((std::min(p.x, q.x) - half - r.origin.x) / r.cell)) - 1);
    const int i1 = std::min(r.width - 1, static_cast<int>(std::floor((std::max(p.x, q.x) + half - r.origin.x) / r.cell)) + 1);
    const int j0 = std::max(0, static_cast<int>(std::floor((std::min(p.y, q.y) - half - r.origin.y) / r.cell)) - 1);
    const int j1 = std::min(r.height - 1, static_cast<int>(std::floor((std::max(p.y, q.y) + half - r.origin.y) / r.cell)) + 1);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i)
        if (point_segment_distance(r.center(i, j), p, q) <= half) {
          px[static_cast<std::size_t>(j) * r.width + i] = 1;
        }
  }
}

}  // namespace

double wall_iou(const FloorPlan& pred, const FloorPlan& gt, double cell, double thickness) {
  if (!(cell > 0.0) || !(thickness > 0.0)) throw std::invalid_argument("wall_iou: cell and thickness must be positive");
  bool any = false;
  Vec2 lo{}, hi{};
  for (const FloorPlan* plan : {&pred, &gt}) {
    for (const auto& [a, b] : plan->edges) {
      for (int idx : {a, b}) {
        const Vec2 c = plan->corners[static_cast<std::size_t>(idx)];
        if (!any) {
          lo = hi = c;
          any = true;
        }
        lo = {std::min(lo.x, c.x), std::min(lo.y, c.y)};
        hi = {std::max(hi.x, c.x), std::max(hi.y, c.y)};
      }
    }
  }
  if (!any) return 1.0;
  Raster r;
  r.cell = cell;
  r.origin = {lo.x - thickness, lo.y - thickness};
  r.width = static_cast<int>(std::ceil((hi.x - lo.x + 2 * thickness) / cell)) + 1;
  r.height = static_cast<int>(std::ceil((hi.y - lo.y + 2 * thickness) / cell)) + 1;
  const std::size_t n = static_cast<std::size_t>(r.width) * r.height;
  std::vector<std::uint8_t> a(n, 0), b(n, 0);
  paint(pred, r, thickness / 2, a);
  paint(gt, r, thickness / 2, b);
  std::size_t inter = 0, uni = 0;
  for (std::size_t k = 0; k < n; ++k) {
    inter += a[k] & b[k];
    uni += a[k] | b[k];
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

BettiNumbers betti_numbers(const FloorPlan& plan) {
  const std::size_t v = plan.corners.size();
  std::vector<std::size_t> parent(v);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  int components = static_cast<int>(v);
  for (const auto& [a, b] : plan.edges) {
    const auto ra = find(static_cast<std::size_t>(a));
    const auto rb = find(static_cast<std::size_t>(b));
    if (ra != rb) {
      parent[ra] = rb;
      --components;
    }
  }
  return {components, static_cast<int>(plan.edges.size()) - static_cast<int>(v) + components};
}

double betti_error(const FloorPlan& pred, const FloorPlan& gt) {
  const auto p = betti_numbers(pred);
  const auto g = betti_numbers(gt);
  return std::abs(p.b0 - g.b0) + std::abs(p.b1 - g.b1);
}

EvalReport evaluate(const FloorPlan& pred, const FloorPlan& gt, const MetricsConfig& config) {
  EvalReport r;
  r.tolerances = config.tolerances;
  const auto pr = corner_pr(pred, gt, config.tolerances);
  r.precision = pr.precision;
  r.recall = pr.recall;
  r.iou = wall_iou(pred, gt, config.iou_cell, config.iou_thickness);
  r.betti_error = betti_error(pred, gt);
  return r;
}

nlohmann::json report_to_json(const EvalReport& r) {
  return {{"tolerances_m", r.tolerances},
          {"precision", r.precision},
          {"recall", r.recall},
          {"iou", r.iou},
          {"betti_error", r.betti_error}};
}

EvalReport report_from_json(const nlohmann::json& j) {
  EvalReport r;
  r.tolerances = j.at("tolerances_m").get<std::array<double, 3>>();
  r.precision = j.at("precision").get<std::array<double, 3>>();
  r.recall = j.at("recall").get<std::array<double, 3>>();
  r.iou = j.at("iou").get<double>();
  r.betti_error = j.at("betti_error").get<double>();
  return r;
}

void save_report(const EvalReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << report_to_json(report).dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace floorpp
