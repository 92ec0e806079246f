#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "floorpp/geometry.hpp"
#include "floorpp/ingest.hpp"

namespace floorpp {

using IndexPair = std::pair<int, int>;

/// Vector floor plan: corners in meters and undirected edges (i < j).
struct FloorPlan {
  std::vector<Vec2> corners;
  std::vector<IndexPair> edges;

  bool empty() const { return corners.empty() && edges.empty(); }
  /// Throws FormatError naming the first offending edge.
  void validate() const;
};

/// Corners (world meters) and verified edges produced for one tile.
struct TileResult {
  Cell offset;
  std::vector<Vec2> corners;
  std::vector<IndexPair> edges;
};

/// Merges corners closer than merge_radius (single-link clusters collapsed to
/// their centroid, repeated until no pair is within the radius), re-indexes
/// edges, and drops self-loops and duplicates.
FloorPlan assemble(std::span<const TileResult> tiles, double merge_radius);
FloorPlan assemble(const FloorPlan& plan, double merge_radius);

/// {"version": 1, "units": "m", "corners": [[x, y], ...], "edges": [[i, j], ...]}
nlohmann::json plan_to_json(const FloorPlan& plan);
/// Throws FormatError on missing keys, bad types, or out-of-range indices.
FloorPlan plan_from_json(const nlohmann::json& j);
void save_plan(const FloorPlan& plan, const std::filesystem::path& path);
FloorPlan load_plan(const std::filesystem::path& path);

/// SVG 1.1 with meters as user units; y is flipped so world +y points up.
std::string plan_to_svg(const FloorPlan& plan, double stroke_width, Warnings* warnings = nullptr);
void render_svg(const FloorPlan& plan, double stroke_width, const std::filesystem::path& path,
                Warnings* warnings = nullptr);

/// Shortest round-trip decimal form of a double.
std::string format_number(double v);

}  // namespace floorpp
