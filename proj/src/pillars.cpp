#include "floorpp/pillars.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <thread>

namespace floorpp {

void PillarConfig::validate(int corner_box_side) const {
  if (!(cell_size > 0.0)) throw ConfigError("cell_size must be positive");
  if (n_bins < 1) throw ConfigError("n_bins must be at least 1");
  if (tile_size < corner_box_side) throw ConfigError("tile_size must be at least the corner box side");
  if (tile_overlap < 0 || tile_overlap >= tile_size) {
    throw ConfigError("tile_overlap must lie in [0, tile_size)");
  }
}

PillarGrid::PillarGrid(int width, int height, int n_bins, Vec2 origin, double cell_size)
    : width_(width), height_(height), n_bins_(n_bins), origin_(origin), cell_size_(cell_size),
      bits_(static_cast<std::size_t>(width) * height * n_bins, 0) {}

int PillarGrid::column_count(int i, int j) const {
  int n = 0;
  for (int k = 0; k < n_bins_; ++k) n += bits_[index(i, j, k)];
  return n;
}

std::size_t PillarGrid::total_set() const {
  std::size_t n = 0;
  for (auto b : bits_) n += b;
  return n;
}

int worker_threads() {
  if (const char* env = std::getenv("FLOORPP_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

PillarGrid rasterize(const PointCloud& cloud, const StoryBand& band, const PillarConfig& config,
                     std::optional<Vec2> origin, int threads, Warnings* warnings) {
  if (!band.valid()) throw std::invalid_argument("rasterize: invalid story band");
  if (!(config.cell_size > 0.0) || config.n_bins < 1) {
    throw std::invalid_argument("rasterize: invalid pillar config");
  }
  if (cloud.empty()) {
    if (warnings) warnings->push_back("empty cloud: producing a 0x0 grid");
    return PillarGrid(0, 0, config.n_bins, origin.value_or(Vec2{}), config.cell_size);
  }
  const auto& b = *cloud.bounds();
  const Vec2 o = origin.value_or(Vec2{b.min.x, b.min.y});
  const double cs = config.cell_size;
  const int width = std::max(1, static_cast<int>(std::ceil((b.max.x - o.x) / cs)));
  const int height = std::max(1, static_cast<int>(std::ceil((b.max.y - o.y) / cs)));
  const int n_bins = config.n_bins;
  const double bin_h = (band.z_ceiling - band.z_floor) / n_bins;

  PillarGrid grid(width, height, n_bins, o, cs);
  const auto& pts = cloud.points();

  auto bin_range = [&](std::size_t begin, std::size_t end, std::uint8_t* bits) {
    for (std::size_t n = begin; n < end; ++n) {
      const Point3& p = pts[n];
      if (p.z < band.z_floor || p.z > band.z_ceiling) continue;
      int i = static_cast<int>(std::floor((p.x - o.x) / cs));
      int j = static_cast<int>(std::floor((p.y - o.y) / cs));
      // Points on the max bound land one past the last cell.
      if (i == width && p.x <= b.max.x) i = width - 1;
      if (j == height && p.y <= b.max.y) j = height - 1;
      if (i < 0 || j < 0 || i >= width || j >= height) continue;
      const int k = std::min(n_bins - 1, static_cast<int>(std::floor((p.z - band.z_floor) / bin_h)));
      bits[(static_cast<std::size_t>(j) * width + i) * n_bins + k] = 1;
    }
  };

  if (threads <= 0) {
    threads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(worker_threads()),
                                                     std::max<std::size_t>(1, pts.size() / 65536)));
  }
  threads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(threads), pts.size()));
  auto& bits = grid.bits();
  if (threads <= 1) {
    bin_range(0, pts.size(), bits.data());
    return grid;
  }
  // Per-thread bitmaps OR-merged; OR is order independent.
  std::vector<std::vector<std::uint8_t>> local(static_cast<std::size_t>(threads - 1),
                                               std::vector<std::uint8_t>(bits.size(), 0));
  std::vector<std::thread> workers;
  const std::size_t chunk = (pts.size() + threads - 1) / threads;
  for (int t = 1; t < threads; ++t) {
    const std::size_t begin = std::min(pts.size(), chunk * t);
    const std::size_t end = std::min(pts.size(), chunk * (t + 1));
    workers.emplace_back(bin_range, begin, end, local[static_cast<std::size_t>(t - 1)].data());
  }
  bin_range(0, std::min(pts.size(), chunk), bits.data());
  for (auto& w : workers) w.join();
  for (const auto& l : local)
    for (std::size_t n = 0; n < bits.size(); ++n) bits[n] |= l[n];
  return grid;
}

std::vector<int> tile_starts(int length, int tile_size, int tile_overlap) {
  const int stride = tile_size - tile_overlap;
  std::vector<int> starts{0};
  while (starts.back() + tile_size < length) starts.push_back(starts.back() + stride);
  return starts;
}

std::vector<Tile> tile_grid(const PillarGrid& grid, const PillarConfig& config) {
  if (config.tile_size < 1 || config.tile_overlap < 0 || config.tile_overlap >= config.tile_size) {
    throw ConfigError("tile_grid: invalid tile configuration");
  }
  const int s = config.tile_size;
  const int nb = grid.n_bins();
  std::vector<Tile> tiles;
  for (int oj : tile_starts(grid.height(), s, config.tile_overlap)) {
    for (int oi : tile_starts(grid.width(), s, config.tile_overlap)) {
      Tile t{PillarGrid(s, s, nb, grid.to_world({static_cast<double>(oi), static_cast<double>(oj)}),
                        grid.cell_size()),
             {oi, oj}};
      const int w = std::min(s, grid.width() - oi);
      const int h = std::min(s, grid.height() - oj);
      for (int j = 0; j < h; ++j) {
        for (int i = 0; i < w; ++i) {
          const auto* src = &grid.bits()[(static_cast<std::size_t>(oj + j) * grid.width() + oi + i) * nb];
          auto* dst = &t.grid.bits()[(static_cast<std::size_t>(j) * s + i) * nb];
          std::copy(src, src + nb, dst);
        }
      }
      tiles.push_back(std::move(t));
    }
  }
  return tiles;
}

Image grid_to_image(const PillarGrid& grid) {
  Image img{grid.width(), grid.height(),
            std::vector<float>(static_cast<std::size_t>(grid.width()) * grid.height(), 0.0f)};
  if (grid.n_bins() == 0) return img;
  for (int j = 0; j < grid.height(); ++j)
    for (int i = 0; i < grid.width(); ++i)
      img.pixels[static_cast<std::size_t>(j) * grid.width() + i] =
          static_cast<float>(grid.column_count(i, j)) / static_cast<float>(grid.n_bins());
  return img;
}

void write_pgm(const Image& image, const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.string().c_str(), "wb");
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  std::fprintf(f, "P2\n%d %d\n255\n", image.width, image.height);
  // Netpbm caps plain-format lines at 70 characters.
  for (int r = 0; r < image.height; ++r) {
    const int j = image.height - 1 - r;
    int line_len = 0;
    for (int i = 0; i < image.width; ++i) {
      const float v = std::clamp(image.pixels[static_cast<std::size_t>(j) * image.width + i], 0.0f, 1.0f);
      char buf[8];
      const int n = std::snprintf(buf, sizeof buf, "%d", static_cast<int>(std::lround(v * 255.0f)));
      if (line_len > 0 && line_len + 1 + n > 70) {
        std::fputc('\n', f);
        line_len = 0;
      } else if (line_len > 0) {
        std::fputc(' ', f);
        ++line_len;
      }
      std::fputs(buf, f);
      line_len += n;
    }
    std::fputc('\n', f);
  }
  if (std::fclose(f) != 0) throw std::runtime_error("failed writing " + path.string());
}

nn::Tensor grid_to_tensor(const PillarGrid& grid) {
  const int w = grid.width(), h = grid.height(), nb = grid.n_bins();
  std::vector<float> data(static_cast<std::size_t>(nb) * w * h, 0.0f);
  const auto& bits = grid.bits();
  for (int j = 0; j < h; ++j)
    for (int i = 0; i < w; ++i) {
      const auto* col = &bits[(static_cast<std::size_t>(j) * w + i) * nb];
      for (int k = 0; k < nb; ++k)
        if (col[k]) data[(static_cast<std::size_t>(k) * h + j) * w + i] = 1.0f;
    }
  return nn::Tensor::from({nb, h, w}, std::move(data));
}

}  // namespace floorpp
