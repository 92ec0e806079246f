#include "floorpp/pipeline.hpp"

#include <fstream>
#include <map>

namespace floorpp {

namespace {

using nlohmann::json;

template <typename T>
T get_as(const std::string& key, const json& v) {
  const bool ok = [&] {
    if constexpr (std::is_same_v<T, bool>) return v.is_boolean();
    else if constexpr (std::is_integral_v<T>) return v.is_number_integer();
    else return v.is_number();
  }();
  if (!ok) throw ConfigError("config key \"" + key + "\" has the wrong type: " + v.dump());
  if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
    if constexpr (std::is_unsigned_v<T>) {
      if (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0) {
        throw ConfigError("config key \"" + key + "\" must be non-negative");
      }
    }
  }
  return v.get<T>();
}

template <typename T, std::size_t N>
std::array<T, N> get_array(const std::string& key, const json& v) {
  if (!v.is_array() || v.size() != N) {
    throw ConfigError("config key \"" + key + "\" must be an array of " + std::to_string(N));
  }
  std::array<T, N> out{};
  for (std::size_t k = 0; k < N; ++k) out[k] = get_as<T>(key, v[k]);
  return out;
}

struct Field {
  std::function<void(PipelineConfig&, const json&)> set;
  std::function<json(const PipelineConfig&)> get;
};

#define FLOORPP_SCALAR(key, member)                                                               \
  {                                                                                               \
    key, Field {                                                                                  \
      [](PipelineConfig& c, const json& v) { c.member = get_as<decltype(c.member)>(key, v); },    \
          [](const PipelineConfig& c) { return json(c.member); }                                  \
    }                                                                                             \
  }

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = {
      FLOORPP_SCALAR("voxel_size", preprocess.voxel_size),
      FLOORPP_SCALAR("band_bin", preprocess.band_bin),
      FLOORPP_SCALAR("min_story_height", preprocess.min_story_height),
      FLOORPP_SCALAR("band_margin", preprocess.band_margin),
      FLOORPP_SCALAR("angle_bins", preprocess.angle_bins),
      FLOORPP_SCALAR("neighbors", preprocess.neighbors),
      FLOORPP_SCALAR("grid_margin", preprocess.grid_margin),

      FLOORPP_SCALAR("cell_size", pillars.cell_size),
      FLOORPP_SCALAR("tile_size", pillars.tile_size),
      FLOORPP_SCALAR("tile_overlap", pillars.tile_overlap),
      {"n_bins", Field{[](PipelineConfig& c, const json& v) {
                         c.pillars.n_bins = get_as<int>("n_bins", v);
                         c.network.n_bins = c.pillars.n_bins;
                       },
                       [](const PipelineConfig& c) { return json(c.pillars.n_bins); }}},

      {"widths", Field{[](PipelineConfig& c, const json& v) { c.network.widths = get_array<int, 3>("widths", v); },
                       [](const PipelineConfig& c) { return json(c.network.widths); }}},
      FLOORPP_SCALAR("c_feat", network.c_feat),
      FLOORPP_SCALAR("roi_pool", network.roi_pool),
      FLOORPP_SCALAR("edge_samples", network.edge_samples),
      FLOORPP_SCALAR("refine_hidden", network.refine_hidden),
      FLOORPP_SCALAR("edge_blocks", network.edge_blocks),

      FLOORPP_SCALAR("lr", train.lr),
      FLOORPP_SCALAR("epochs", train.epochs),
      FLOORPP_SCALAR("decay_epoch", train.decay_epoch),
      FLOORPP_SCALAR("decay_factor", train.decay_factor),
      FLOORPP_SCALAR("lambda_E", train.lambda_E),
      FLOORPP_SCALAR("lambda_loc", train.lambda_loc),
      FLOORPP_SCALAR("pos_iou", train.pos_iou),
      FLOORPP_SCALAR("neg_iou", train.neg_iou),
      FLOORPP_SCALAR("corner_box_side", train.corner_box_side),
      FLOORPP_SCALAR("neg_pos_ratio", train.neg_pos_ratio),
      FLOORPP_SCALAR("checkpoint_every", train.checkpoint_every),
      FLOORPP_SCALAR("edge_match_tol", train.edge_match_tol),
      FLOORPP_SCALAR("max_train_detections", train.max_train_detections),
      FLOORPP_SCALAR("augment", train.augment),
      {"seed", Field{[](PipelineConfig& c, const json& v) {
                       c.train.seed = get_as<std::uint64_t>("seed", v);
                       c.synth.seed = c.train.seed;
                     },
                     [](const PipelineConfig& c) { return json(c.train.seed); }}},

      FLOORPP_SCALAR("corner_threshold", detection.corner_threshold),
      FLOORPP_SCALAR("nms_radius", detection.nms_radius),
      FLOORPP_SCALAR("max_corners", detection.max_corners),
      FLOORPP_SCALAR("axis_tol", detection.axis_tol),
      FLOORPP_SCALAR("min_edge_len", detection.min_edge_len),
      FLOORPP_SCALAR("max_edge_len", detection.max_edge_len),
      FLOORPP_SCALAR("edge_threshold", detection.edge_threshold),

      {"extent", Field{[](PipelineConfig& c, const json& v) {
                         const auto e = get_array<double, 2>("extent", v);
                         c.synth.width = e[0];
                         c.synth.depth = e[1];
                       },
                       [](const PipelineConfig& c) { return json::array({c.synth.width, c.synth.depth}); }}},
      {"n_rooms", Field{[](PipelineConfig& c, const json& v) {
                          const auto r = get_array<int, 2>("n_rooms", v);
                          c.synth.min_rooms = r[0];
                          c.synth.max_rooms = r[1];
                        },
                        [](const PipelineConfig& c) {
                          return json::array({c.synth.min_rooms, c.synth.max_rooms});
                        }}},
      FLOORPP_SCALAR("wall_noise_sigma", synth.wall_noise_sigma),
      FLOORPP_SCALAR("point_density", synth.point_density),
      FLOORPP_SCALAR("floor_ceiling_density", synth.floor_ceiling_density),
      FLOORPP_SCALAR("outlier_fraction", synth.outlier_fraction),
      FLOORPP_SCALAR("story_height", synth.story_height),
      FLOORPP_SCALAR("door_gap_prob", synth.door_gap_prob),
      FLOORPP_SCALAR("door_width", synth.door_width),

      {"tolerances_m",
       Field{[](PipelineConfig& c, const json& v) { c.metrics.tolerances = get_array<double, 3>("tolerances_m", v); },
             [](const PipelineConfig& c) { return json(c.metrics.tolerances); }}},
      FLOORPP_SCALAR("iou_cell", metrics.iou_cell),
      FLOORPP_SCALAR("iou_thickness", metrics.iou_thickness),

      FLOORPP_SCALAR("merge_radius", merge_radius),
      FLOORPP_SCALAR("stroke_width", stroke_width),
  };
  return table;
}

#undef FLOORPP_SCALAR

}  // namespace

void PipelineConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  const auto& p = preprocess;
  if (!(p.voxel_size >= 0.0)) fail("voxel_size must be non-negative");
  if (!(p.band_bin > 0.0)) fail("band_bin must be positive");
  if (!(p.min_story_height > 0.0)) fail("min_story_height must be positive");
  if (!(p.band_margin >= 0.0)) fail("band_margin must be non-negative");
  if (p.angle_bins < 90) fail("angle_bins must be at least 90");
  if (p.neighbors < 1) fail("neighbors must be at least 1");
  if (p.grid_margin < 0) fail("grid_margin must be non-negative");

  pillars.validate(train.corner_box_side);
  if (pillars.tile_size % 8 != 0) fail("tile_size must be a multiple of 8");
  if (network.n_bins != pillars.n_bins) fail("network n_bins must equal pillar n_bins");
  for (int w : network.widths) {
    if (w < 1) fail("widths must be positive");
  }
  if (network.c_feat < 1 || network.roi_pool < 1 || network.edge_samples < 3 ||
      network.refine_hidden < 1 || network.edge_blocks < 0) {
    fail("network sizes must be positive (edge_samples >= 3)");
  }
  train.validate();

  const auto& d = detection;
  if (!(d.corner_threshold > 0.0 && d.corner_threshold < 1.0)) fail("corner_threshold must lie in (0, 1)");
  if (d.nms_radius < 0) fail("nms_radius must be non-negative");
  if (d.max_corners < 1) fail("max_corners must be positive");
  if (!(d.axis_tol >= 0.0)) fail("axis_tol must be non-negative");
  if (!(d.min_edge_len >= 0.0)) fail("min_edge_len must be non-negative");
  if (!(d.edge_threshold >= 0.0 && d.edge_threshold <= 1.0)) fail("edge_threshold must lie in [0, 1]");

  synth.validate();

  const auto& t = metrics.tolerances;
  if (!(t[0] > 0.0 && t[0] <= t[1] && t[1] <= t[2])) fail("tolerances_m must be positive and ascending");
  if (!(metrics.iou_cell > 0.0) || !(metrics.iou_thickness > 0.0)) fail("IoU cell and thickness must be positive");
  if (!(merge_radius >= 0.0)) fail("merge_radius must be non-negative");
  if (!(stroke_width > 0.0)) fail("stroke_width must be positive");
}

void apply_config_json(PipelineConfig& config, const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  const auto& table = fields();
  for (const auto& [key, value] : j.items()) {
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError("unknown config key \"" + key + "\"");
    it->second.set(config, value);
  }
}

PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  apply_config_json(base, j);
  return base;
}

json config_to_json(const PipelineConfig& config) {
  json j = json::object();
  for (const auto& [key, field] : fields()) j[key] = field.get(config);
  return j;
}

Preprocessed preprocess(const PointCloud& cloud, const PipelineConfig& config, Warnings* warnings) {
  if (cloud.empty()) throw std::invalid_argument("preprocess: empty cloud");
  const auto& pc = config.preprocess;
  const PointCloud down = pc.voxel_size > 0.0 ? voxel_downsample(cloud, pc.voxel_size) : cloud;

  Preprocessed out;
  StoryBand band;
  try {
    band = estimate_story_band(down, pc.band_bin, pc.min_story_height);
  } catch (const std::invalid_argument& e) {
    // No floor/ceiling pair: keep every point.
    const auto& b = *down.bounds();
    band = {b.min.z, b.max.z};
    if (!band.valid()) band = {b.min.z - 0.5, b.max.z + 0.5};
    if (warnings) warnings->push_back(std::string("story band: ") + e.what() + "; using the full z-range");
  }
  out.band = band;
  PointCloud cropped = crop_to_band(down, band, pc.band_margin);
  if (cropped.empty()) cropped = down;
  AlignmentResult aligned = align_to_axes(cropped, pc.angle_bins, pc.neighbors, config.pillars.cell_size, warnings);
  out.transform = aligned.transform;
  const StoryBand raster_band{band.z_floor - pc.band_margin, band.z_ceiling + pc.band_margin};
  const auto& b = *aligned.cloud.bounds();
  const double margin = pc.grid_margin * config.pillars.cell_size;
  out.grid = rasterize(aligned.cloud, raster_band, config.pillars, Vec2{b.min.x - margin, b.min.y - margin}, 0,
                       warnings);
  out.tiles = tile_grid(out.grid, config.pillars);
  return out;
}

GroundTruth plan_to_tile(const FloorPlan& plan, const AlignmentTransform& transform, const Tile& tile) {
  const double s = tile.grid.width();
  GroundTruth gt;
  std::vector<int> remap(plan.corners.size(), -1);
  for (std::size_t k = 0; k < plan.corners.size(); ++k) {
    const Vec2 c = tile.grid.to_cells(transform.apply(plan.corners[k]));
    if (c.x >= 0.0 && c.y >= 0.0 && c.x < s && c.y < tile.grid.height()) {
      remap[k] = static_cast<int>(gt.corners.size());
      gt.corners.push_back(c);
    }
  }
  for (const auto& [a, b] : plan.edges) {
    const int ra = remap[static_cast<std::size_t>(a)], rb = remap[static_cast<std::size_t>(b)];
    if (ra >= 0 && rb >= 0) gt.edges.push_back(std::minmax(ra, rb));
  }
  return gt;
}

std::vector<TrainSample> build_training_set(const std::vector<ManifestEntry>& scenes,
                                            const PipelineConfig& config, Warnings* warnings) {
  std::vector<TrainSample> out;
  for (const auto& scene : scenes) {
    Warnings local;
    const PointCloud cloud = load_cloud(scene.cloud, format_for_path(scene.cloud), &local);
    const FloorPlan plan = load_plan(scene.plan);
    if (cloud.empty()) {
      if (warnings) warnings->push_back(scene.cloud.string() + ": empty cloud skipped");
      continue;
    }
    const Preprocessed pre = preprocess(cloud, config, &local);
    for (const Tile& tile : pre.tiles) out.push_back({tile.grid, plan_to_tile(plan, pre.transform, tile)});
    if (warnings) {
      for (auto& w : local) warnings->push_back(scene.cloud.string() + ": " + w);
    }
  }
  return out;
}

TileResult infer_tile(const Tile& tile, const nn::NetworkParams& params, const PipelineConfig& config) {
  nn::NoGradGuard no_grad;
  const auto& det = config.detection;
  const nn::NetworkConfig net = nn::NetworkConfig::infer(params);
  const nn::Tensor fmap = nn::forward_backbone(grid_to_tensor(tile.grid), params);
  const nn::Tensor scores = nn::corner_score_head(fmap, params);
  const auto cells = select_corners(scores, det.corner_threshold, det.nms_radius, det.max_corners);
  const auto corners = refine_corners(fmap, scores, cells, params, config.train.corner_box_side);
  std::vector<Vec2> positions;
  for (const auto& c : corners) positions.push_back(c.position);

  const double max_len = det.max_edge_len > 0.0 ? det.max_edge_len : static_cast<double>(tile.grid.width());
  const auto proposals = propose_edges(positions, det.axis_tol, det.min_edge_len, max_len);
  const auto verified = verify_edges(proposals, positions, fmap, params, det.edge_threshold, net.edge_samples);

  // Corners without a verified wall are dropped.
  TileResult result;
  result.offset = tile.offset;
  std::vector<int> remap(positions.size(), -1);
  auto keep = [&](int k) {
    if (remap[static_cast<std::size_t>(k)] < 0) {
      remap[static_cast<std::size_t>(k)] = static_cast<int>(result.corners.size());
      result.corners.push_back(tile.grid.to_world(positions[static_cast<std::size_t>(k)]));
    }
    return remap[static_cast<std::size_t>(k)];
  };
  for (const auto& e : verified) {
    const int a = keep(e.a), b = keep(e.b);
    result.edges.push_back(std::minmax(a, b));
  }
  return result;
}

FloorPlan infer_plan(const PointCloud& cloud, const nn::NetworkParams& params,
                     const PipelineConfig& config, Warnings* warnings) {
  if (cloud.empty()) {
    if (warnings) warnings->push_back("empty cloud: returning an empty plan");
    return {};
  }
  const Preprocessed pre = preprocess(cloud, config, warnings);
  std::vector<TileResult> results;
  for (const Tile& tile : pre.tiles) results.push_back(infer_tile(tile, params, config));
  FloorPlan plan = assemble(results, config.merge_radius);
  for (auto& c : plan.corners) c = pre.transform.invert(c);
  return plan;
}

}  // namespace floorpp
