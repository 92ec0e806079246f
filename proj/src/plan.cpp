#include "floorpp/plan.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace floorpp {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

// One single-link pass; returns the cluster index of every input corner and
// the cluster centroids ordered by their smallest member.
std::pair<std::vector<int>, std::vector<Vec2>> cluster_once(const std::vector<Vec2>& pts,
                                                            double radius) {
  const std::size_t n = pts.size();
  DisjointSets sets(n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) {
    return pts[a].x < pts[b].x || (pts[a].x == pts[b].x && a < b);
  });
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n && pts[order[v]].x - pts[order[u]].x <= radius; ++v) {
      if (distance(pts[order[u]], pts[order[v]]) <= radius) sets.unite(order[u], order[v]);
    }
  }
  std::vector<int> label(n, -1);
  std::vector<int> root_label(n, -1);
  std::vector<Vec2> sums;
  std::vector<double> counts;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t r = sets.find(k);
    if (root_label[r] < 0) {
      root_label[r] = static_cast<int>(sums.size());
      sums.push_back({});
      counts.push_back(0.0);
    }
    label[k] = root_label[r];
    sums[static_cast<std::size_t>(label[k])] = sums[static_cast<std::size_t>(label[k])] + pts[k];
    counts[static_cast<std::size_t>(label[k])] += 1.0;
  }
  for (std::size_t c = 0; c < sums.size(); ++c) sums[c] = sums[c] * (1.0 / counts[c]);
  return {label, sums};
}

FloorPlan merge(std::vector<Vec2> corners, const std::vector<IndexPair>& edges, double radius) {
  std::vector<int> mapping(corners.size());
  std::iota(mapping.begin(), mapping.end(), 0);
  if (radius > 0.0) {
    while (true) {
      auto [label, centroids] = cluster_once(corners, radius);
      for (auto& m : mapping) m = label[static_cast<std::size_t>(m)];
      const bool changed = centroids.size() != corners.size();
      corners = std::move(centroids);
      if (!changed) break;
    }
  }
  FloorPlan plan;
  plan.corners = std::move(corners);
  std::set<IndexPair> seen;
  for (const auto& [a, b] : edges) {
    const int i = mapping[static_cast<std::size_t>(a)];
    const int j = mapping[static_cast<std::size_t>(b)];
    if (i == j) continue;
    const IndexPair e = std::minmax(i, j);
    if (plan.corners[static_cast<std::size_t>(i)] == plan.corners[static_cast<std::size_t>(j)]) continue;
    if (seen.insert(e).second) plan.edges.push_back(e);
  }
  return plan;
}

}  // namespace

void FloorPlan::validate() const {
  std::set<IndexPair> seen;
  const int n = static_cast<int>(corners.size());
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto [a, b] = edges[k];
    const std::string where = "edge " + std::to_string(k) + " [" + std::to_string(a) + ", " +
                              std::to_string(b) + "]";
    if (a < 0 || b < 0 || a >= n || b >= n) throw FormatError(where + ": corner index out of range");
    if (a == b) throw FormatError(where + ": self-loop");
    if (!seen.insert(std::minmax(a, b)).second) throw FormatError(where + ": duplicate edge");
    if (corners[static_cast<std::size_t>(a)] == corners[static_cast<std::size_t>(b)]) {
      throw FormatError(where + ": zero-length edge");
    }
  }
}

FloorPlan assemble(std::span<const TileResult> tiles, double merge_radius) {
  std::vector<Vec2> corners;
  std::vector<IndexPair> edges;
  for (const auto& t : tiles) {
    const int base = static_cast<int>(corners.size());
    corners.insert(corners.end(), t.corners.begin(), t.corners.end());
    for (const auto& [a, b] : t.edges) edges.emplace_back(base + a, base + b);
  }
  return merge(std::move(corners), edges, merge_radius);
}

FloorPlan assemble(const FloorPlan& plan, double merge_radius) {
  return merge(plan.corners, plan.edges, merge_radius);
}

nlohmann::json plan_to_json(const FloorPlan& plan) {
  nlohmann::json j;
  j["version"] = 1;
  j["units"] = "m";
  j["corners"] = nlohmann::json::array();
  for (const auto& c : plan.corners) j["corners"].push_back({c.x, c.y});
  j["edges"] = nlohmann::json::array();
  for (const auto& [a, b] : plan.edges) j["edges"].push_back({a, b});
  return j;
}

FloorPlan plan_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw FormatError("plan must be a JSON object");
  for (const char* key : {"corners", "edges"}) {
    if (!j.contains(key)) throw FormatError(std::string("plan is missing key \"") + key + "\"");
    if (!j[key].is_array()) throw FormatError(std::string("plan key \"") + key + "\" must be an array");
  }
  if (j.contains("version") && j["version"] != 1) {
    throw FormatError("unsupported plan version " + j["version"].dump());
  }
  if (j.contains("units") && j["units"] != "m") throw FormatError("plan units must be \"m\"");
  FloorPlan plan;
  for (std::size_t k = 0; k < j["corners"].size(); ++k) {
    const auto& c = j["corners"][k];
    if (!c.is_array() || c.size() != 2 || !c[0].is_number() || !c[1].is_number()) {
      throw FormatError("corner " + std::to_string(k) + " must be [x, y]");
    }
    plan.corners.push_back({c[0].get<double>(), c[1].get<double>()});
  }
  for (std::size_t k = 0; k < j["edges"].size(); ++k) {
    const auto& e = j["edges"][k];
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer()) {
      throw FormatError("edge " + std::to_string(k) + " must be [i, j] integers");
    }
    plan.edges.emplace_back(e[0].get<int>(), e[1].get<int>());
  }
  plan.validate();
  return plan;
}

void save_plan(const FloorPlan& plan, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << plan_to_json(plan).dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

FloorPlan load_plan(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open plan " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  try {
    return plan_from_json(j);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string format_number(double v) {
  if (v == 0.0) v = 0.0;  // no "-0"
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string plan_to_svg(const FloorPlan& plan, double stroke_width, Warnings* warnings) {
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  if (plan.corners.empty()) {
    if (warnings) warnings->push_back("empty plan: writing an empty SVG");
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"0 0 1 1\">\n</svg>\n";
    return os.str();
  }
  Vec2 lo = plan.corners.front(), hi = plan.corners.front();
  for (const auto& c : plan.corners) {
    lo = {std::min(lo.x, c.x), std::min(lo.y, c.y)};
    hi = {std::max(hi.x, c.x), std::max(hi.y, c.y)};
  }
  double w = hi.x - lo.x, h = hi.y - lo.y;
  // Degenerate extents still need a visible box.
  if (w <= 0.0) w = std::max(h, 1.0);
  if (h <= 0.0) h = std::max(w, 1.0);
  // y_svg = (lo.y + hi.y) - y keeps the flipped plan in the same box.
  auto fy = [&](double y) { return lo.y + hi.y - y; };
  const auto n = [](double v) { return format_number(v); };
  const double mx = w / 20.0, my = h / 20.0;  // 5% margins
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"" << n(lo.x - mx)
     << ' ' << n(lo.y - my) << ' ' << n(w + 2 * mx) << ' ' << n(h + 2 * my) << "\">\n";
  os << "<g stroke=\"black\" stroke-width=\"" << n(stroke_width) << "\" stroke-linecap=\"round\">\n";
  for (const auto& [a, b] : plan.edges) {
    const Vec2 p = plan.corners[static_cast<std::size_t>(a)];
    const Vec2 q = plan.corners[static_cast<std::size_t>(b)];
    os << "<line x1=\"" << n(p.x) << "\" y1=\"" << n(fy(p.y)) << "\" x2=\"" << n(q.x) << "\" y2=\""
       << n(fy(q.y)) << "\"/>\n";
  }
  os << "</g>\n<g fill=\"red\">\n";
  for (const auto& c : plan.corners) {
    os << "<circle cx=\"" << n(c.x) << "\" cy=\"" << n(fy(c.y)) << "\" r=\"" << n(stroke_width)
       << "\"/>\n";
  }
  os << "</g>\n</svg>\n";
  return os.str();
}

void render_svg(const FloorPlan& plan, double stroke_width, const std::filesystem::path& path,
                Warnings* warnings) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << plan_to_svg(plan, stroke_width, warnings);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace floorpp
