#pragma once

#include <cstdint>
#include <filesystem>
#include <random>

#include <json.hpp>

#include "floorpp/ingest.hpp"
#include "floorpp/plan.hpp"

namespace floorpp {

struct SynthConfig {
  std::uint64_t seed = 0;
  double width = 10.0;  // extent along x, meters
  double depth = 8.0;   // extent along y, meters
  int min_rooms = 1;
  int max_rooms = 4;
  double wall_noise_sigma = 0.01;
  double point_density = 500.0;          // points per m^2 of wall
  double floor_ceiling_density = 100.0;  // points per m^2 of floor (and of ceiling)
  double outlier_fraction = 0.01;
  double story_height = 3.0;
  double door_gap_prob = 0.5;
  double door_width = 0.9;

  /// Throws ConfigError when an invariant fails.
  void validate() const;
};

inline constexpr double kMinRoomSide = 1.5;
inline constexpr double kDoorMargin = 0.3;

struct Scene {
  FloorPlan gt_plan;
  PointCloud cloud;
  StoryBand band;
};

/// Recursive axis-aligned binary splits of the extent rectangle. Coordinates
/// are whole centimeters. Corners are all wall junctions; edges are wall
/// pieces between consecutive junctions.
FloorPlan generate_layout(const SynthConfig& config, std::mt19937_64& rng);

/// Noisy wall, floor and ceiling points for a plan; returns band (0, height).
std::pair<PointCloud, StoryBand> sample_cloud(const FloorPlan& plan, const SynthConfig& config,
                                              std::mt19937_64& rng);

/// Scene `index` of the dataset seeded by config.seed.
Scene generate_scene(const SynthConfig& config, std::size_t index);

/// Writes scene_NNN.xyz, scene_NNN.plan.json and manifest.json into out_dir.
/// Returns the manifest path.
std::filesystem::path generate_dataset(const SynthConfig& config, std::size_t n_scenes,
                                       const std::filesystem::path& out_dir);

struct ManifestEntry {
  std::filesystem::path cloud;
  std::filesystem::path plan;
};
/// Reads a manifest; entry paths are resolved against the manifest's folder.
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path);

nlohmann::json synth_config_to_json(const SynthConfig& config);

}  // namespace floorpp
