#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>

#include "floorpp/pillars.hpp"
#include "floorpp/synth.hpp"
#include "floorpp/training.hpp"

using namespace floorpp;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void expect_manhattan(const FloorPlan& p) {
  EXPECT_NO_THROW(p.validate());
  for (const auto& [a, b] : p.edges) {
    const Vec2 d = p.corners[b] - p.corners[a];
    EXPECT_TRUE((d.x == 0.0) != (d.y == 0.0)) << a << "-" << b;
  }
}

}  // namespace

TEST(Layout, SingleRoomIsBoundary) {
  SynthConfig cfg;
  cfg.min_rooms = cfg.max_rooms = 1;
  std::mt19937_64 rng(1);
  const auto p = generate_layout(cfg, rng);
  EXPECT_EQ(p.corners.size(), 4u);
  EXPECT_EQ(p.edges.size(), 4u);
  expect_manhattan(p);
}

TEST(Layout, OneSplitGivesSixCornersSevenEdges) {
  SynthConfig cfg;
  cfg.min_rooms = cfg.max_rooms = 2;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    const auto p = generate_layout(cfg, rng);
    EXPECT_EQ(p.corners.size(), 6u);
    EXPECT_EQ(p.edges.size(), 7u);
  }
}

TEST(Layout, RandomLayoutsAreManhattanAndInRange) {
  SynthConfig cfg;
  cfg.min_rooms = 2;
  cfg.max_rooms = 6;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    const auto p = generate_layout(cfg, rng);
    expect_manhattan(p);
    // Rooms of a plane subdivision: E - V + 1 faces inside the boundary.
    const int rooms = int(p.edges.size()) - int(p.corners.size()) + 1;
    EXPECT_GE(rooms, 2);
    EXPECT_LE(rooms, 6);
    for (const auto& c : p.corners) {
      EXPECT_GE(c.x, 0.0);
      EXPECT_LE(c.x, cfg.width);
      EXPECT_GE(c.y, 0.0);
      EXPECT_LE(c.y, cfg.depth);
    }
  }
}

TEST(Layout, TooManyRoomsForExtent) {
  SynthConfig cfg;
  cfg.width = 2.0;
  cfg.depth = 2.0;
  cfg.min_rooms = cfg.max_rooms = 3;
  std::mt19937_64 rng(1);
  EXPECT_THROW(generate_layout(cfg, rng), ConfigError);
}

TEST(SampleCloud, WallDensityExpectation) {
  SynthConfig cfg;
  cfg.wall_noise_sigma = 0.0;
  cfg.outlier_fraction = 0.0;
  cfg.floor_ceiling_density = 1e-9;
  FloorPlan p;
  p.corners = {{0, 0}, {10, 0}};
  p.edges = {{0, 1}};
  cfg.width = 10.0;
  cfg.depth = 1.5;
  std::mt19937_64 rng(2);
  const auto [cloud, band] = sample_cloud(p, cfg, rng);
  // Poisson with mean 15000 has sd ~122.
  EXPECT_NEAR(double(cloud.size()), 15000.0, 5 * 122.5);
  EXPECT_EQ(band.z_floor, 0.0);
  EXPECT_EQ(band.z_ceiling, 3.0);
}

TEST(SampleCloud, NoiselessPointsLieOnWalls) {
  SynthConfig cfg;
  cfg.wall_noise_sigma = 0.0;
  cfg.outlier_fraction = 0.0;
  cfg.door_gap_prob = 0.0;
  cfg.min_rooms = cfg.max_rooms = 3;
  std::mt19937_64 rng(3);
  const auto plan = generate_layout(cfg, rng);
  const auto [cloud, band] = sample_cloud(plan, cfg, rng);
  for (const auto& q : cloud.points()) {
    if (q.z == 0.0 || q.z == cfg.story_height) continue;  // floor and ceiling planes
    double best = 1e9;
    for (const auto& [a, b] : plan.edges)
      best = std::min(best, point_segment_distance({q.x, q.y}, plan.corners[a], plan.corners[b]));
    ASSERT_LT(best, 1e-9);
  }
}

TEST(SampleCloud, DoorGapsAndOutliers) {
  SynthConfig cfg;
  cfg.door_gap_prob = 1.0;
  cfg.wall_noise_sigma = 0.0;
  cfg.outlier_fraction = 0.0;
  cfg.floor_ceiling_density = 1e-9;
  cfg.width = 6;
  cfg.depth = 4;
  FloorPlan p;
  p.corners = {{0, 0}, {6, 0}, {6, 4}, {0, 4}, {3, 0}, {3, 4}};
  p.edges = {{0, 4}, {4, 1}, {1, 2}, {5, 2}, {3, 5}, {0, 3}, {4, 5}};
  std::mt19937_64 rng(4);
  const auto [cloud, band] = sample_cloud(p, cfg, rng);
  // The interior wall x = 3 has one 0.9 m gap at least 0.3 m from its ends.
  std::vector<double> ys;
  for (const auto& q : cloud.points())
    if (q.x == 3.0 && q.y > 0.0 && q.y < 4.0) ys.push_back(q.y);
  std::sort(ys.begin(), ys.end());
  double widest = 0, at = 0;
  for (std::size_t k = 1; k < ys.size(); ++k)
    if (ys[k] - ys[k - 1] > widest) widest = ys[k] - ys[k - 1], at = ys[k - 1];
  EXPECT_NEAR(widest, 0.9, 0.02);
  EXPECT_GE(at, 0.3 - 0.02);
  EXPECT_LE(at + widest, 4.0 - 0.3 + 0.02);

  cfg.outlier_fraction = 0.05;
  std::mt19937_64 rng2(5);
  const auto [noisy, b2] = sample_cloud(p, cfg, rng2);
  std::size_t outside = 0;
  for (const auto& q : noisy.points()) {
    EXPECT_GE(q.z, -2.0);
    EXPECT_LE(q.z, cfg.story_height + 2.0);
    outside += q.z < 0.0 || q.z > cfg.story_height;
  }
  EXPECT_GT(outside, 0u);
}

TEST(SampleCloud, CornersNearOccupiedCells) {
  SynthConfig cfg;
  cfg.wall_noise_sigma = 0.0;
  cfg.outlier_fraction = 0.0;
  cfg.min_rooms = 2;
  const auto scene = generate_scene(cfg, 0);
  PillarConfig pc;
  const auto grid = rasterize(scene.cloud, scene.band, pc, Vec2{0, 0});
  for (const auto& c : scene.gt_plan.corners) {
    const Vec2 cell = grid.to_cells(c);
    bool near = false;
    for (int dj = -1; dj <= 1; ++dj)
      for (int di = -1; di <= 1; ++di) {
        const int i = int(std::floor(cell.x)) + di, j = int(std::floor(cell.y)) + dj;
        if (i >= 0 && j >= 0 && i < grid.width() && j < grid.height()) near |= grid.column_count(i, j) > 4;
      }
    EXPECT_TRUE(near) << c.x << "," << c.y;
  }
}

TEST(Scene, DeterministicPerSeedAndIndex) {
  SynthConfig cfg;
  cfg.seed = 42;
  const auto a = generate_scene(cfg, 3), b = generate_scene(cfg, 3), c = generate_scene(cfg, 4);
  EXPECT_EQ(a.cloud.points(), b.cloud.points());
  EXPECT_EQ(a.gt_plan.corners, b.gt_plan.corners);
  EXPECT_NE(a.cloud.points(), c.cloud.points());
  for (const auto& q : a.cloud.points()) {
    EXPECT_GE(q.x, 0.0);
    EXPECT_LE(q.x, cfg.width);
  }
}

TEST(Dataset, FilesManifestAndDeterminism) {
  SynthConfig cfg;
  cfg.seed = 9;
  cfg.width = 4;
  cfg.depth = 4;
  cfg.point_density = 50;
  const auto base = fs::temp_directory_path() / "floorpp_synth_test";
  fs::remove_all(base);
  const auto m1 = generate_dataset(cfg, 3, base / "a");
  const auto m2 = generate_dataset(cfg, 3, base / "b");
  int clouds = 0, plans = 0, manifests = 0;
  for (const auto& e : fs::directory_iterator(base / "a")) {
    const auto name = e.path().filename().string();
    clouds += name.ends_with(".xyz");
    plans += name.ends_with(".plan.json");
    manifests += name == "manifest.json";
    EXPECT_EQ(slurp(e.path()), slurp(base / "b" / name)) << name;
  }
  EXPECT_EQ(clouds, 3);
  EXPECT_EQ(plans, 3);
  EXPECT_EQ(manifests, 1);
  const auto entries = load_manifest(m1);
  ASSERT_EQ(entries.size(), 3u);
  for (const auto& e : entries) {
    EXPECT_TRUE(fs::exists(e.cloud));
    EXPECT_TRUE(fs::exists(e.plan));
  }
  const auto j = nlohmann::json::parse(slurp(m1));
  EXPECT_EQ(j["config"]["seed"], 9);
  EXPECT_THROW(generate_dataset(cfg, 0, base / "c"), ConfigError);
  fs::remove_all(base);
}

TEST(SynthConfig, Validation) {
  SynthConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.outlier_fraction = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.point_density = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.min_rooms = 3;
  cfg.max_rooms = 2;
  EXPECT_THROW(cfg.validate(), ConfigError);
}
