#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "floorpp/geometry.hpp"

namespace floorpp {

/// Non-fatal diagnostics collected by loaders and pipeline stages.
using Warnings = std::vector<std::string>;

struct Bounds3 {
  Point3 min;
  Point3 max;
};

/// Points in meters with their axis-aligned bounds. Bounds are recomputed on
/// construction and are absent for an empty cloud.
class PointCloud {
 public:
  PointCloud() = default;
  explicit PointCloud(std::vector<Point3> points);

  const std::vector<Point3>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const std::optional<Bounds3>& bounds() const { return bounds_; }

 private:
  std::vector<Point3> points_;
  std::optional<Bounds3> bounds_;
};

struct StoryBand {
  double z_floor = 0.0;
  double z_ceiling = 0.0;

  bool valid() const { return z_floor < z_ceiling; }
};

/// Rotation about the vertical axis followed by a horizontal translation:
/// p' = R(rotation_angle) p + translation. The angle lies in [-pi/4, pi/4).
struct AlignmentTransform {
  double rotation_angle = 0.0;
  Vec2 translation;

  Vec2 apply(Vec2 p) const;
  Vec2 invert(Vec2 p) const;
  Point3 apply(const Point3& p) const;
  Point3 invert(const Point3& p) const;
};

enum class CloudFormat { xyz_ascii, ply_ascii };

/// Picks the format from the extension: ".ply" is PLY, anything else XYZ.
CloudFormat format_for_path(const std::filesystem::path& path);

/// Parses an ASCII point cloud. Throws std::runtime_error if the file is
/// missing and FormatError (naming the line) on malformed content.
/// Non-finite points are dropped with a warning; an empty result adds the
/// warning "empty input".
PointCloud load_cloud(const std::filesystem::path& path, CloudFormat format,
                      Warnings* warnings = nullptr);
PointCloud parse_xyz(std::string_view text, Warnings* warnings = nullptr);
PointCloud parse_ply(std::string_view text, Warnings* warnings = nullptr);

/// Writes "x y z" lines with fixed 4-decimal formatting.
void save_xyz(const PointCloud& cloud, const std::filesystem::path& path);

/// One centroid per occupied voxel, in ascending voxel-key order.
PointCloud voxel_downsample(const PointCloud& cloud, double resolution);

/// Floor and ceiling elevations from the two dominant z-histogram peaks.
///
/// The floor-or-ceiling peak is the fullest bin; the other is the fullest bin
/// at least min_story_height away from it. Each elevation is reported as its
/// bin center.
StoryBand estimate_story_band(const PointCloud& cloud, double bin_height = 0.1,
                              double min_story_height = 1.5);

/// Keeps points with z in [z_floor - margin, z_ceiling + margin], in order.
PointCloud crop_to_band(const PointCloud& cloud, const StoryBand& band,
                        double margin = 0.05);

struct AlignmentResult {
  PointCloud cloud;
  AlignmentTransform transform;
  bool dominant_direction_found = true;
};

/// Rotates the cloud so its dominant wall direction is parallel to x/y and
/// translates it so the horizontal bounds start at (0, 0).
///
/// Wall columns are found as 2D cells holding at least the mean point count;
/// directions to each column's k nearest column neighbours are histogrammed
/// modulo 90 degrees.
AlignmentResult align_to_axes(const PointCloud& cloud, int angle_bins = 180,
                              int neighbors = 8, double column_size = 0.05,
                              Warnings* warnings = nullptr);

PointCloud transform_cloud(const PointCloud& cloud, const AlignmentTransform& t);
PointCloud invert_transform_cloud(const PointCloud& cloud, const AlignmentTransform& t);

}  // namespace floorpp
