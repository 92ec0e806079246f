#pragma once

#include <filesystem>
#include <functional>
#include <vector>

#include <json.hpp>

#include "floorpp/edges.hpp"
#include "floorpp/ingest.hpp"
#include "floorpp/metrics.hpp"
#include "floorpp/nn/network.hpp"
#include "floorpp/pillars.hpp"
#include "floorpp/plan.hpp"
#include "floorpp/synth.hpp"
#include "floorpp/training.hpp"

namespace floorpp {

struct PreprocessConfig {
  double voxel_size = 0.05;  // 0 disables downsampling
  double band_bin = 0.1;
  double min_story_height = 1.5;
  double band_margin = 0.05;
  int angle_bins = 180;
  int neighbors = 8;
  int grid_margin = 4;  // empty cells kept around the rasterized extent
};

/// Every tunable of the tool in one place. Serialized as a flat JSON object
/// whose keys mirror the member structs' fields.
struct PipelineConfig {
  PreprocessConfig preprocess;
  PillarConfig pillars;
  nn::NetworkConfig network;
  TrainConfig train;
  DetectionConfig detection;
  SynthConfig synth;
  MetricsConfig metrics;
  double merge_radius = 0.1;  // meters
  double stroke_width = 0.05;

  /// Throws ConfigError when any component invariant fails.
  void validate() const;
};

/// Applies the keys of a flat JSON object on top of `config`. Unknown keys and
/// wrongly typed values raise ConfigError. "seed" sets both the training and
/// the synthesis seed.
void apply_config_json(PipelineConfig& config, const nlohmann::json& j);
PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base = {});
nlohmann::json config_to_json(const PipelineConfig& config);

struct Preprocessed {
  StoryBand band;
  AlignmentTransform transform;  // input frame -> grid frame
  PillarGrid grid;
  std::vector<Tile> tiles;
};

/// Downsample, estimate the story band, crop, align and rasterize. The cloud
/// must not be empty.
Preprocessed preprocess(const PointCloud& cloud, const PipelineConfig& config,
                        Warnings* warnings = nullptr);

/// World-frame plan to the tile's cell units. Corners outside the tile and
/// edges touching them are dropped.
GroundTruth plan_to_tile(const FloorPlan& plan, const AlignmentTransform& transform, const Tile& tile);

/// One TrainSample per tile of every scene, in manifest order.
std::vector<TrainSample> build_training_set(const std::vector<ManifestEntry>& scenes,
                                            const PipelineConfig& config,
                                            Warnings* warnings = nullptr);

/// Corners and verified edges of one tile, in the tile's world frame.
TileResult infer_tile(const Tile& tile, const nn::NetworkParams& params, const PipelineConfig& config);

/// Full inference; the plan is returned in the input cloud's frame. An empty
/// cloud gives an empty plan and a warning.
FloorPlan infer_plan(const PointCloud& cloud, const nn::NetworkParams& params,
                     const PipelineConfig& config, Warnings* warnings = nullptr);

}  // namespace floorpp
