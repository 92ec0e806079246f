#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "floorpp/geometry.hpp"
#include "floorpp/ingest.hpp"
#include "floorpp/nn/tensor.hpp"

namespace floorpp {

struct PillarConfig {
  double cell_size = 0.05;
  int n_bins = 32;
  int tile_size = 512;
  int tile_overlap = 64;

  /// Throws ConfigError when an invariant fails.
  void validate(int corner_box_side = 9) const;
};

/// Boolean vertical-occupancy vectors over a 2D grid.
///
/// Bit (i, j, k) is set iff some point fell in cell (i, j) with z in bin k.
/// Storage is cell-major: the n_bins bits of a pillar are contiguous.
class PillarGrid {
 public:
  PillarGrid() = default;
  PillarGrid(int width, int height, int n_bins, Vec2 origin, double cell_size);

  int width() const { return width_; }
  int height() const { return height_; }
  int n_bins() const { return n_bins_; }
  Vec2 origin() const { return origin_; }
  double cell_size() const { return cell_size_; }

  bool at(int i, int j, int k) const { return bits_[index(i, j, k)] != 0; }
  void set(int i, int j, int k) { bits_[index(i, j, k)] = 1; }
  /// Count of TRUE bins in the pillar of cell (i, j).
  int column_count(int i, int j) const;
  std::size_t total_set() const;

  const std::vector<std::uint8_t>& bits() const { return bits_; }
  std::vector<std::uint8_t>& bits() { return bits_; }

  /// World position (meters) of a continuous cell-unit coordinate.
  Vec2 to_world(Vec2 cell_coord) const { return origin_ + cell_coord * cell_size_; }
  Vec2 to_cells(Vec2 world) const { return (world - origin_) * (1.0 / cell_size_); }

  friend bool operator==(const PillarGrid&, const PillarGrid&) = default;

 private:
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(j) * width_ + i) * n_bins_ + k;
  }
  int width_ = 0;
  int height_ = 0;
  int n_bins_ = 0;
  Vec2 origin_;
  double cell_size_ = 0.0;
  std::vector<std::uint8_t> bits_;
};

struct Tile {
  PillarGrid grid;
  Cell offset;  // cell offset of the tile inside its parent grid
};

/// Bins every in-band point into its pillar.
///
/// The grid starts at `origin` (defaults to the cloud's horizontal min) and
/// spans ceil(extent / cell_size) cells per axis. Bin k covers
/// [z_floor + k h, z_floor + (k + 1) h) with the last bin closed at z_ceiling.
/// Points are split across `threads` workers (0 = FLOORPP_THREADS / auto);
/// the result does not depend on the thread count.
PillarGrid rasterize(const PointCloud& cloud, const StoryBand& band, const PillarConfig& config,
                     std::optional<Vec2> origin = std::nullopt, int threads = 0,
                     Warnings* warnings = nullptr);

/// Tiles at stride tile_size - tile_overlap, zero-padded past the grid.
std::vector<Tile> tile_grid(const PillarGrid& grid, const PillarConfig& config);

/// Tile start positions along one axis of the given length.
std::vector<int> tile_starts(int length, int tile_size, int tile_overlap);

/// Per-cell fraction of TRUE bins, row j at index j * width.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<float> pixels;
};
Image grid_to_image(const PillarGrid& grid);

/// P2 PGM with values scaled to 0-255; the top row is the largest j.
void write_pgm(const Image& image, const std::filesystem::path& path);

/// [n_bins, height, width] tensor of 0/1 channels (row j, column i).
nn::Tensor grid_to_tensor(const PillarGrid& grid);

/// Worker count from FLOORPP_THREADS (0 or unset = hardware concurrency).
int worker_threads();

}  // namespace floorpp
