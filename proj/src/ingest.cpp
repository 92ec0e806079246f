#include "floorpp/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <unordered_map>

namespace floorpp {

namespace {

constexpr double kPi = std::numbers::pi;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string() + ": file not found or unreadable");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

bool parse_double(std::string_view tok, double& out) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc() && ptr == end;
}

// Calls fn(line_number, line) for each line; line numbers start at 1.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    ++line_no;
    if (!fn(line_no, text.substr(pos, nl - pos))) return;
    pos = nl + 1;
  }
}

void note(Warnings* w, std::string msg) {
  if (w) w->push_back(std::move(msg));
}

bool finite(const Point3& p) {
  return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
}

}  // namespace

PointCloud::PointCloud(std::vector<Point3> points) : points_(std::move(points)) {
  if (points_.empty()) return;
  Bounds3 b{points_.front(), points_.front()};
  for (const auto& p : points_) {
    b.min.x = std::min(b.min.x, p.x);
    b.min.y = std::min(b.min.y, p.y);
    b.min.z = std::min(b.min.z, p.z);
    b.max.x = std::max(b.max.x, p.x);
    b.max.y = std::max(b.max.y, p.y);
    b.max.z = std::max(b.max.z, p.z);
  }
  bounds_ = b;
}

Vec2 AlignmentTransform::apply(Vec2 p) const {
  const double c = std::cos(rotation_angle), s = std::sin(rotation_angle);
  return Vec2{c * p.x - s * p.y, s * p.x + c * p.y} + translation;
}

Vec2 AlignmentTransform::invert(Vec2 p) const {
  const double c = std::cos(rotation_angle), s = std::sin(rotation_angle);
  const Vec2 q = p - translation;
  return {c * q.x + s * q.y, -s * q.x + c * q.y};
}

Point3 AlignmentTransform::apply(const Point3& p) const {
  const Vec2 q = apply(Vec2{p.x, p.y});
  return {q.x, q.y, p.z};
}

Point3 AlignmentTransform::invert(const Point3& p) const {
  const Vec2 q = invert(Vec2{p.x, p.y});
  return {q.x, q.y, p.z};
}

CloudFormat format_for_path(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".ply" ? CloudFormat::ply_ascii : CloudFormat::xyz_ascii;
}

PointCloud parse_xyz(std::string_view text, Warnings* warnings) {
  std::vector<Point3> points;
  std::size_t rejected = 0;
  for_each_line(text, [&](std::size_t line_no, std::string_view raw) {
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') return true;
    const auto tok = split_ws(line);
    Point3 p;
    if (tok.size() < 3 || !parse_double(tok[0], p.x) || !parse_double(tok[1], p.y) ||
        !parse_double(tok[2], p.z)) {
      throw FormatError("line " + std::to_string(line_no) + ": expected \"x y z\", got \"" +
                        std::string(line) + "\"");
    }
    if (!finite(p)) {
      ++rejected;
      return true;
    }
    points.push_back(p);
    return true;
  });
  if (rejected) note(warnings, std::to_string(rejected) + " non-finite point(s) rejected");
  if (points.empty()) note(warnings, "empty input");
  return PointCloud(std::move(points));
}

PointCloud parse_ply(std::string_view text, Warnings* warnings) {
  struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<std::string> properties;
  };
  std::vector<Element> elements;
  bool header_done = false;
  bool saw_magic = false;
  std::size_t body_start = 0;
  std::size_t header_lines = 0;

  for_each_line(text, [&](std::size_t line_no, std::string_view raw) {
    header_lines = line_no;
    const auto line = trim(raw);
    const auto tok = split_ws(line);
    auto fail = [&](const std::string& why) {
      throw FormatError("line " + std::to_string(line_no) + ": " + why);
    };
    if (line_no == 1) {
      if (line != "ply") fail("missing \"ply\" magic");
      saw_magic = true;
      return true;
    }
    if (tok.empty() || tok[0] == "comment" || tok[0] == "obj_info") return true;
    if (tok[0] == "format") {
      if (tok.size() < 2 || tok[1] != "ascii") fail("only ascii PLY is supported");
    } else if (tok[0] == "element") {
      if (tok.size() != 3) fail("malformed element declaration");
      Element e;
      e.name = std::string(tok[1]);
      double n = 0;
      if (!parse_double(tok[2], n) || n < 0) fail("bad element count");
      e.count = static_cast<std::size_t>(n);
      elements.push_back(std::move(e));
    } else if (tok[0] == "property") {
      if (elements.empty()) fail("property before any element");
      if (tok.size() < 3) fail("malformed property");
      elements.back().properties.emplace_back(tok.back());
    } else if (tok[0] == "end_header") {
      header_done = true;
      body_start = static_cast<std::size_t>(raw.data() + raw.size() - text.data()) + 1;
      return false;
    } else {
      fail("unknown header keyword \"" + std::string(tok[0]) + "\"");
    }
    return true;
  });
  if (!saw_magic) throw FormatError("line 1: missing \"ply\" magic");
  if (!header_done) throw FormatError("PLY header has no end_header");

  std::vector<Point3> points;
  std::size_t rejected = 0;
  std::string_view body = body_start < text.size() ? text.substr(body_start) : std::string_view{};
  std::size_t element_index = 0;
  std::size_t remaining = elements.empty() ? 0 : elements[0].count;
  while (element_index < elements.size() && remaining == 0) {
    ++element_index;
    remaining = element_index < elements.size() ? elements[element_index].count : 0;
  }
  int ix = -1, iy = -1, iz = -1;
  auto locate = [&](const Element& e) {
    ix = iy = iz = -1;
    for (std::size_t k = 0; k < e.properties.size(); ++k) {
      if (e.properties[k] == "x") ix = static_cast<int>(k);
      if (e.properties[k] == "y") iy = static_cast<int>(k);
      if (e.properties[k] == "z") iz = static_cast<int>(k);
    }
  };
  for (const auto& e : elements) {
    if (e.name == "vertex") {
      locate(e);
      if (ix < 0 || iy < 0 || iz < 0) throw FormatError("PLY vertex element lacks x/y/z properties");
    }
  }

  for_each_line(body, [&](std::size_t body_line, std::string_view raw) {
    if (element_index >= elements.size()) return false;
    const std::size_t line_no = header_lines + body_line;
    const auto line = trim(raw);
    if (line.empty()) return true;
    const Element& e = elements[element_index];
    if (e.name == "vertex") {
      const auto tok = split_ws(line);
      const int need = std::max({ix, iy, iz});
      Point3 p;
      if (static_cast<int>(tok.size()) <= need || !parse_double(tok[ix], p.x) ||
          !parse_double(tok[iy], p.y) || !parse_double(tok[iz], p.z)) {
        throw FormatError("line " + std::to_string(line_no) + ": malformed vertex \"" +
                          std::string(line) + "\"");
      }
      if (finite(p)) {
        points.push_back(p);
      } else {
        ++rejected;
      }
    }
    if (--remaining == 0) {
      do {
        ++element_index;
        remaining = element_index < elements.size() ? elements[element_index].count : 0;
      } while (element_index < elements.size() && remaining == 0);
    }
    return true;
  });
  if (element_index < elements.size() && elements[element_index].name == "vertex") {
    throw FormatError("PLY body ends before all vertices were read");
  }
  if (rejected) note(warnings, std::to_string(rejected) + " non-finite point(s) rejected");
  if (points.empty()) note(warnings, "empty input");
  return PointCloud(std::move(points));
}

PointCloud load_cloud(const std::filesystem::path& path, CloudFormat format, Warnings* warnings) {
  const std::string text = read_file(path);
  try {
    return format == CloudFormat::ply_ascii ? parse_ply(text, warnings) : parse_xyz(text, warnings);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void save_xyz(const PointCloud& cloud, const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.string().c_str(), "wb");
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  char buf[96];
  bool ok = true;
  for (const auto& p : cloud.points()) {
    const int n = std::snprintf(buf, sizeof buf, "%.4f %.4f %.4f\n", p.x, p.y, p.z);
    ok = ok && std::fwrite(buf, 1, static_cast<std::size_t>(n), f) == static_cast<std::size_t>(n);
  }
  ok = (std::fclose(f) == 0) && ok;
  if (!ok) throw std::runtime_error("failed writing " + path.string());
}

PointCloud voxel_downsample(const PointCloud& cloud, double resolution) {
  if (!(resolution > 0.0)) throw std::invalid_argument("voxel resolution must be positive");
  const auto& pts = cloud.points();
  struct Keyed {
    std::int64_t kx, ky, kz;
    std::size_t index;
  };
  std::vector<Keyed> keyed(pts.size());
  for (std::size_t n = 0; n < pts.size(); ++n) {
    keyed[n] = {static_cast<std::int64_t>(std::floor(pts[n].x / resolution)),
                static_cast<std::int64_t>(std::floor(pts[n].y / resolution)),
                static_cast<std::int64_t>(std::floor(pts[n].z / resolution)), n};
  }
  std::stable_sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
    return std::tie(a.kx, a.ky, a.kz) < std::tie(b.kx, b.ky, b.kz);
  });
  std::vector<Point3> out;
  std::size_t start = 0;
  while (start < keyed.size()) {
    std::size_t end = start;
    double sx = 0, sy = 0, sz = 0;
    while (end < keyed.size() && keyed[end].kx == keyed[start].kx &&
           keyed[end].ky == keyed[start].ky && keyed[end].kz == keyed[start].kz) {
      const auto& p = pts[keyed[end].index];
      sx += p.x;
      sy += p.y;
      sz += p.z;
      ++end;
    }
    const double n = static_cast<double>(end - start);
    out.push_back({sx / n, sy / n, sz / n});
    start = end;
  }
  return PointCloud(std::move(out));
}

StoryBand estimate_story_band(const PointCloud& cloud, double bin_height, double min_story_height) {
  if (cloud.empty()) throw std::invalid_argument("estimate_story_band: empty cloud");
  if (!(bin_height > 0.0)) throw std::invalid_argument("estimate_story_band: bin_height must be positive");
  const auto& b = *cloud.bounds();
  const double z0 = b.min.z;
  const double range = b.max.z - z0;
  if (!(range > 0.0)) {
    throw std::invalid_argument("estimate_story_band: degenerate z-range (all points at one elevation)");
  }
  const int bins = std::max(2, static_cast<int>(std::floor(range / bin_height)) + 1);
  std::vector<std::size_t> hist(static_cast<std::size_t>(bins), 0);
  for (const auto& p : cloud.points()) {
    const int k = std::min(bins - 1, static_cast<int>(std::floor((p.z - z0) / bin_height)));
    ++hist[static_cast<std::size_t>(k)];
  }
  auto center = [&](int k) { return z0 + (k + 0.5) * bin_height; };

  const int first = static_cast<int>(std::max_element(hist.begin(), hist.end()) - hist.begin());
  // Separation in bins; shrinks for clouds shorter than a story.
  int min_gap = static_cast<int>(std::ceil(min_story_height / bin_height));
  min_gap = std::min(min_gap, std::max(1, (bins - 1) / 2));
  int second = -1;
  for (int k = 0; k < bins; ++k) {
    if (std::abs(k - first) < min_gap || hist[static_cast<std::size_t>(k)] == 0) continue;
    if (second < 0 || hist[static_cast<std::size_t>(k)] > hist[static_cast<std::size_t>(second)]) second = k;
  }
  if (second < 0) {
    throw std::invalid_argument("estimate_story_band: no second elevation peak found");
  }
  return {center(std::min(first, second)), center(std::max(first, second))};
}

PointCloud crop_to_band(const PointCloud& cloud, const StoryBand& band, double margin) {
  std::vector<Point3> out;
  out.reserve(cloud.size());
  const double lo = band.z_floor - margin;
  const double hi = band.z_ceiling + margin;
  for (const auto& p : cloud.points())
    if (p.z >= lo && p.z <= hi) out.push_back(p);
  return PointCloud(std::move(out));
}

PointCloud transform_cloud(const PointCloud& cloud, const AlignmentTransform& t) {
  std::vector<Point3> out;
  out.reserve(cloud.size());
  for (const auto& p : cloud.points()) out.push_back(t.apply(p));
  return PointCloud(std::move(out));
}

PointCloud invert_transform_cloud(const PointCloud& cloud, const AlignmentTransform& t) {
  std::vector<Point3> out;
  out.reserve(cloud.size());
  for (const auto& p : cloud.points()) out.push_back(t.invert(p));
  return PointCloud(std::move(out));
}

namespace {

struct CellKey {
  std::int64_t i, j;
  bool operator==(const CellKey&) const = default;
};
struct CellKeyHash {
  std::size_t operator()(const CellKey& k) const {
    return std::hash<std::int64_t>()(k.i * 73856093LL ^ k.j * 19349663LL);
  }
};

// Dominant direction modulo 90 degrees, in radians within [0, pi/2), or
// nullopt when the histogram is too flat to trust.
std::optional<double> dominant_direction(const PointCloud& cloud, int angle_bins, int neighbors,
                                         double column_size) {
  // Column centroids, ordered by first appearance for determinism.
  std::unordered_map<CellKey, std::size_t, CellKeyHash> index;
  struct Column {
    CellKey key;
    double sx = 0, sy = 0;
    std::size_t count = 0;
  };
  std::vector<Column> columns;
  for (const auto& p : cloud.points()) {
    const CellKey key{static_cast<std::int64_t>(std::floor(p.x / column_size)),
                      static_cast<std::int64_t>(std::floor(p.y / column_size))};
    auto [it, inserted] = index.try_emplace(key, columns.size());
    if (inserted) columns.push_back({key});
    auto& c = columns[it->second];
    c.sx += p.x;
    c.sy += p.y;
    ++c.count;
  }
  if (columns.size() < 2) return std::nullopt;
  const double mean_count = static_cast<double>(cloud.size()) / static_cast<double>(columns.size());

  // Tall columns are wall evidence; floor-only columns hold a handful of points.
  std::vector<Vec2> pts;
  std::vector<CellKey> keys;
  for (const auto& c : columns) {
    if (static_cast<double>(c.count) >= mean_count) {
      pts.push_back({c.sx / c.count, c.sy / c.count});
      keys.push_back(c.key);
    }
  }
  if (pts.size() < 2) return std::nullopt;

  std::unordered_map<CellKey, std::vector<std::size_t>, CellKeyHash> buckets;
  for (std::size_t n = 0; n < pts.size(); ++n) buckets[keys[n]].push_back(n);

  std::vector<double> hist(static_cast<std::size_t>(angle_bins), 0.0);
  const double quarter = kPi / 2.0;
  constexpr int kRing = 3;
  std::vector<std::pair<double, std::size_t>> cand;
  for (std::size_t n = 0; n < pts.size(); ++n) {
    cand.clear();
    for (int di = -kRing; di <= kRing; ++di)
      for (int dj = -kRing; dj <= kRing; ++dj) {
        auto it = buckets.find({keys[n].i + di, keys[n].j + dj});
        if (it == buckets.end()) continue;
        for (std::size_t m : it->second)
          if (m != n) cand.emplace_back(distance(pts[n], pts[m]), m);
      }
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(neighbors), cand.size());
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
    for (std::size_t q = 0; q < k; ++q) {
      const Vec2 d = pts[cand[q].second] - pts[n];
      if (cand[q].first == 0.0) continue;
      double a = std::fmod(std::atan2(d.y, d.x), quarter);
      if (a < 0) a += quarter;
      int bin = static_cast<int>(a / quarter * angle_bins);
      bin = std::clamp(bin, 0, angle_bins - 1);
      hist[static_cast<std::size_t>(bin)] += 1.0;
    }
  }

  double total = 0.0;
  for (double h : hist) total += h;
  if (total == 0.0) return std::nullopt;

  // Circular box smoothing, then a weighted mean around the smoothed peak.
  const int half = std::max(1, angle_bins / 72);
  auto wrap = [&](int b) { return ((b % angle_bins) + angle_bins) % angle_bins; };
  std::vector<double> smooth(hist.size(), 0.0);
  for (int b = 0; b < angle_bins; ++b)
    for (int d = -half; d <= half; ++d) smooth[static_cast<std::size_t>(b)] += hist[static_cast<std::size_t>(wrap(b + d))];
  const int peak = static_cast<int>(std::max_element(smooth.begin(), smooth.end()) - smooth.begin());
  const double mean_smooth = total * (2 * half + 1) / angle_bins;
  if (smooth[static_cast<std::size_t>(peak)] < 2.0 * mean_smooth) return std::nullopt;

  const double bin_width = quarter / angle_bins;
  double wsum = 0.0, asum = 0.0;
  const int window = 2 * half + 1;
  for (int d = -window; d <= window; ++d) {
    const double w = hist[static_cast<std::size_t>(wrap(peak + d))];
    asum += w * (peak + d + 0.5) * bin_width;
    wsum += w;
  }
  double angle = asum / wsum;
  angle = std::fmod(angle, quarter);
  if (angle < 0) angle += quarter;
  return angle;
}

}  // namespace

AlignmentResult align_to_axes(const PointCloud& cloud, int angle_bins, int neighbors,
                              double column_size, Warnings* warnings) {
  if (cloud.empty()) throw std::invalid_argument("align_to_axes: empty cloud");
  if (angle_bins < 90) throw std::invalid_argument("align_to_axes: angle_bins must be >= 90");
  if (neighbors < 1) throw std::invalid_argument("align_to_axes: neighbors must be >= 1");

  AlignmentResult result;
  const auto dominant = dominant_direction(cloud, angle_bins, neighbors, column_size);
  double rotation = 0.0;
  if (dominant) {
    rotation = -*dominant;
    if (rotation < -kPi / 4) rotation += kPi / 2;
  } else {
    result.dominant_direction_found = false;
    note(warnings, "no dominant wall direction found; using identity rotation");
  }

  AlignmentTransform t{rotation, {0.0, 0.0}};
  double min_x = std::numeric_limits<double>::infinity();
  double min_y = std::numeric_limits<double>::infinity();
  for (const auto& p : cloud.points()) {
    const Vec2 q = t.apply(Vec2{p.x, p.y});
    min_x = std::min(min_x, q.x);
    min_y = std::min(min_y, q.y);
  }
  t.translation = {-min_x, -min_y};
  result.transform = t;
  result.cloud = transform_cloud(cloud, t);
  return result;
}

}  // namespace floorpp
