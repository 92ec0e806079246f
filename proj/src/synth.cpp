#include "floorpp/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <map>
#include <numeric>
#include <set>

namespace floorpp {

void SynthConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("synth: " + m); };
  if (!(width > 0.0) || !(depth > 0.0)) fail("extent must be positive");
  if (min_rooms < 1 || max_rooms < min_rooms) fail("n_rooms range must satisfy 1 <= min <= max");
  if (!(point_density > 0.0) || !(floor_ceiling_density > 0.0)) fail("densities must be positive");
  if (!(outlier_fraction >= 0.0 && outlier_fraction < 1.0)) fail("outlier_fraction must be in [0, 1)");
  if (!(wall_noise_sigma >= 0.0)) fail("wall_noise_sigma must be non-negative");
  if (!(story_height > 0.0)) fail("story_height must be positive");
  if (!(door_gap_prob >= 0.0 && door_gap_prob <= 1.0)) fail("door_gap_prob must be in [0, 1]");
  if (!(door_width > 0.0)) fail("door_width must be positive");
  if (width < kMinRoomSide || depth < kMinRoomSide) fail("extent is smaller than one room");
}

namespace {

struct Rect {
  long x0, y0, x1, y1;  // centimeters
};

struct Seg {
  long x0, y0, x1, y1;  // axis-aligned, (x0, y0) <= (x1, y1)
};

constexpr long kMinSideCm = 150;

long to_cm(double m) { return std::lround(m * 100.0); }

std::vector<Seg> split_rooms(long w, long d, int target, std::mt19937_64& rng) {
  std::vector<Rect> rooms{{0, 0, w, d}};
  std::vector<Seg> walls{{0, 0, w, 0}, {0, d, w, d}, {0, 0, 0, d}, {w, 0, w, d}};
  while (static_cast<int>(rooms.size()) < target) {
    std::vector<std::size_t> cand;
    for (std::size_t r = 0; r < rooms.size(); ++r) {
      const auto& q = rooms[r];
      if (q.x1 - q.x0 >= 2 * kMinSideCm || q.y1 - q.y0 >= 2 * kMinSideCm) cand.push_back(r);
    }
    if (cand.empty()) break;
    const std::size_t r = cand[std::uniform_int_distribution<std::size_t>(0, cand.size() - 1)(rng)];
    const Rect q = rooms[r];
    const long rw = q.x1 - q.x0, rh = q.y1 - q.y0;
    const bool can_x = rw >= 2 * kMinSideCm, can_y = rh >= 2 * kMinSideCm;
    bool split_x = can_x;  // a vertical wall at some x
    if (can_x && can_y) {
      split_x = std::uniform_real_distribution<double>(0.0, 1.0)(rng) <
                static_cast<double>(rw) / static_cast<double>(rw + rh);
    }
    if (split_x) {
      const long x = std::uniform_int_distribution<long>(q.x0 + kMinSideCm, q.x1 - kMinSideCm)(rng);
      walls.push_back({x, q.y0, x, q.y1});
      rooms[r] = {q.x0, q.y0, x, q.y1};
      rooms.push_back({x, q.y0, q.x1, q.y1});
    } else {
      const long y = std::uniform_int_distribution<long>(q.y0 + kMinSideCm, q.y1 - kMinSideCm)(rng);
      walls.push_back({q.x0, y, q.x1, y});
      rooms[r] = {q.x0, q.y0, q.x1, y};
      rooms.push_back({q.x0, y, q.x1, q.y1});
    }
  }
  if (static_cast<int>(rooms.size()) < target) walls.clear();
  return walls;
}

FloorPlan walls_to_plan(const std::vector<Seg>& walls) {
  std::set<std::pair<long, long>> junctions;
  for (const auto& s : walls) {
    junctions.insert({s.x0, s.y0});
    junctions.insert({s.x1, s.y1});
  }
  std::map<std::pair<long, long>, int> index;
  FloorPlan plan;
  for (const auto& p : junctions) {
    index[p] = static_cast<int>(plan.corners.size());
    plan.corners.push_back({p.first / 100.0, p.second / 100.0});
  }
  std::set<IndexPair> seen;
  for (const auto& s : walls) {
    std::vector<std::pair<long, long>> on;  // junctions on s, ascending (set order)
    for (const auto& p : junctions) {
      if (p.first >= s.x0 && p.first <= s.x1 && p.second >= s.y0 && p.second <= s.y1) on.push_back(p);
    }
    for (std::size_t k = 0; k + 1 < on.size(); ++k) {
      const IndexPair e = std::minmax(index[on[k]], index[on[k + 1]]);
      if (seen.insert(e).second) plan.edges.push_back(e);
    }
  }
  return plan;
}

}  // namespace

FloorPlan generate_layout(const SynthConfig& config, std::mt19937_64& rng) {
  config.validate();
  const long w = to_cm(config.width), d = to_cm(config.depth);
  const long capacity = (w / kMinSideCm) * (d / kMinSideCm);
  if (capacity < config.min_rooms) {
    throw ConfigError("synth: extent too small for " + std::to_string(config.min_rooms) +
                      " rooms (min room side 1.5 m)");
  }
  const int target = std::uniform_int_distribution<int>(config.min_rooms, config.max_rooms)(rng);
  // Random splits can paint themselves into a corner; retry a bounded number
  // of times, lowering the target to what the extent allows.
  for (int goal = target; goal >= config.min_rooms; --goal) {
    for (int attempt = 0; attempt < 32; ++attempt) {
      auto walls = split_rooms(w, d, goal, rng);
      if (!walls.empty()) {
        FloorPlan plan = walls_to_plan(walls);
        plan.validate();
        return plan;
      }
    }
  }
  throw ConfigError("synth: could not fit " + std::to_string(config.min_rooms) +
                    " rooms with min side 1.5 m");
}

std::pair<PointCloud, StoryBand> sample_cloud(const FloorPlan& plan, const SynthConfig& config,
                                              std::mt19937_64& rng) {
  config.validate();
  const double h = config.story_height;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  auto jitter = [&] { return config.wall_noise_sigma > 0.0 ? config.wall_noise_sigma * noise(rng) : 0.0; };
  auto poisson = [&](double mean) -> long {
    return mean > 0.0 ? std::poisson_distribution<long>(mean)(rng) : 0;
  };
  auto clamp_xy = [&](double x, double y) {
    return Vec2{std::clamp(x, 0.0, config.width), std::clamp(y, 0.0, config.depth)};
  };

  Vec2 lo = plan.corners.empty() ? Vec2{} : plan.corners.front(), hi = lo;
  for (const auto& c : plan.corners) {
    lo = {std::min(lo.x, c.x), std::min(lo.y, c.y)};
    hi = {std::max(hi.x, c.x), std::max(hi.y, c.y)};
  }
  auto on_boundary = [&](Vec2 p, Vec2 q) {
    return (p.x == q.x && (p.x == lo.x || p.x == hi.x)) || (p.y == q.y && (p.y == lo.y || p.y == hi.y));
  };

  std::vector<Point3> pts;
  for (const auto& [a, b] : plan.edges) {
    const Vec2 p = plan.corners[static_cast<std::size_t>(a)];
    const Vec2 q = plan.corners[static_cast<std::size_t>(b)];
    const double len = distance(p, q);
    double gap0 = -1.0, gap1 = -1.0;  // door gap along the edge, meters from p
    if (!on_boundary(p, q) && len >= config.door_width + 2 * kDoorMargin &&
        unit(rng) < config.door_gap_prob) {
      gap0 = kDoorMargin + unit(rng) * (len - config.door_width - 2 * kDoorMargin);
      gap1 = gap0 + config.door_width;
    }
    const long n = poisson(len * h * config.point_density);
    for (long k = 0; k < n; ++k) {
      const double t = unit(rng) * len;
      const double z = unit(rng) * h;
      const Vec2 xy = p + (q - p) * (t / len);
      const double nx = jitter(), ny = jitter(), nz = jitter();
      if (t >= gap0 && t <= gap1) continue;
      const Vec2 c = clamp_xy(xy.x + nx, xy.y + ny);
      pts.push_back({c.x, c.y, z + nz});
    }
  }
  for (double z : {0.0, h}) {
    const long n = poisson(config.width * config.depth * config.floor_ceiling_density);
    for (long k = 0; k < n; ++k) {
      const double x = unit(rng) * config.width, y = unit(rng) * config.depth;
      const double nx = jitter(), ny = jitter(), nz = jitter();
      const Vec2 c = clamp_xy(x + nx, y + ny);
      pts.push_back({c.x, c.y, z + nz});
    }
  }
  const auto n_out = static_cast<std::size_t>(std::floor(config.outlier_fraction * pts.size()));
  if (n_out > 0) {
    std::vector<std::size_t> all(pts.size());
    std::iota(all.begin(), all.end(), 0);
    std::vector<std::size_t> picked;
    std::sample(all.begin(), all.end(), std::back_inserter(picked), n_out, rng);
    for (std::size_t idx : picked) pts[idx].z = -2.0 + unit(rng) * (h + 4.0);
  }
  return {PointCloud(std::move(pts)), StoryBand{0.0, h}};
}

Scene generate_scene(const SynthConfig& config, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(config.seed), static_cast<std::uint32_t>(config.seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 rng(seq);
  Scene scene;
  scene.gt_plan = generate_layout(config, rng);
  auto [cloud, band] = sample_cloud(scene.gt_plan, config, rng);
  scene.cloud = std::move(cloud);
  scene.band = band;
  return scene;
}

nlohmann::json synth_config_to_json(const SynthConfig& c) {
  return {{"seed", c.seed},
          {"width", c.width},
          {"depth", c.depth},
          {"min_rooms", c.min_rooms},
          {"max_rooms", c.max_rooms},
          {"wall_noise_sigma", c.wall_noise_sigma},
          {"point_density", c.point_density},
          {"floor_ceiling_density", c.floor_ceiling_density},
          {"outlier_fraction", c.outlier_fraction},
          {"story_height", c.story_height},
          {"door_gap_prob", c.door_gap_prob},
          {"door_width", c.door_width}};
}

std::filesystem::path generate_dataset(const SynthConfig& config, std::size_t n_scenes,
                                       const std::filesystem::path& out_dir) {
  config.validate();
  if (n_scenes == 0) throw ConfigError("synth: scene count must be positive");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());

  nlohmann::json manifest;
  manifest["scenes"] = nlohmann::json::array();
  for (std::size_t s = 0; s < n_scenes; ++s) {
    char stem[32];
    std::snprintf(stem, sizeof stem, "scene_%03zu", s);
    const std::string cloud_name = std::string(stem) + ".xyz";
    const std::string plan_name = std::string(stem) + ".plan.json";
    const Scene scene = generate_scene(config, s);
    save_xyz(scene.cloud, out_dir / cloud_name);
    save_plan(scene.gt_plan, out_dir / plan_name);
    manifest["scenes"].push_back({{"cloud", cloud_name}, {"plan", plan_name}});
  }
  manifest["config"] = synth_config_to_json(config);
  const auto path = out_dir / "manifest.json";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << manifest.dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path.string());
  return path;
}

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open manifest " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("scenes") || !j["scenes"].is_array()) {
    throw FormatError(path.string() + ": manifest needs a \"scenes\" array");
  }
  const auto dir = path.parent_path();
  std::vector<ManifestEntry> entries;
  for (const auto& s : j["scenes"]) {
    if (!s.is_object() || !s.contains("cloud") || !s["cloud"].is_string() || !s.contains("plan") ||
        !s["plan"].is_string()) {
      throw FormatError(path.string() + ": scene entries need \"cloud\" and \"plan\" strings");
    }
    entries.push_back({dir / s["cloud"].get<std::string>(), dir / s["plan"].get<std::string>()});
  }
  return entries;
}

}  // namespace floorpp
