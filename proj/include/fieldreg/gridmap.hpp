#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include "fieldreg/types.hpp"

namespace fieldreg {

/// Axis-aligned planar rectangle in meters.
struct GridBounds {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;
};

struct GridMapParams {
  double cell_size = 0.02;  // meters
  double sigma_avg = 0.04;  // meters
  std::optional<GridBounds> bounds;
};

/// Cells whose accumulated Gaussian weight falls below this are empty.
inline constexpr double kMinCellWeight = 1e-8;

struct GridCell {
  static constexpr std::int32_t kNoAnchor = -1;

  double exg = 0.0;
  double height = 0.0;
  double weight_sum = 0.0;
  std::int32_t anchor = kNoAnchor;  // index into the source cloud

  bool has_anchor() const { return anchor != kNoAnchor; }
};

/// Dense single-channel raster, row-major (`y * width + x`).
struct Raster {
  int width = 0;
  int height = 0;
  double cell_size = 1.0;
  std::vector<double> values;

  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
  bool inside(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }
};

/// w x h raster of (ExG, height, anchor) cells over a ColoredGeoCloud.
class MultimodalGridMap {
 public:
  MultimodalGridMap(int width, int height, double cell_size, Vec2 origin,
                    std::shared_ptr<const ColoredGeoCloud> source);

  int width() const { return width_; }
  int height() const { return height_; }
  double cell_size() const { return cell_size_; }
  /// World coordinates of the (0,0) cell corner.
  const Vec2& origin() const { return origin_; }
  const ColoredGeoCloud& source() const { return *source_; }
  const std::shared_ptr<const ColoredGeoCloud>& source_ptr() const { return source_; }

  bool inside(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }
  const GridCell& cell(int x, int y) const { return cells_[index(x, y)]; }
  GridCell& cell(int x, int y) { return cells_[index(x, y)]; }
  const std::vector<GridCell>& cells() const { return cells_; }

  Vec2 cell_center(int x, int y) const {
    return {origin_.x() + (x + 0.5) * cell_size_, origin_.y() + (y + 0.5) * cell_size_};
  }
  /// Cell containing a world position (may be outside the map).
  std::pair<int, int> cell_of(double wx, double wy) const;

  GridBounds bounds() const {
    return {origin_.x(), origin_.y(), origin_.x() + width_ * cell_size_, origin_.y() + height_ * cell_size_};
  }

  Raster exg_channel() const;
  Raster height_channel() const;
  std::size_t occupied_count() const;

 private:
  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width_ + x; }

  int width_;
  int height_;
  double cell_size_;
  Vec2 origin_;
  std::shared_ptr<const ColoredGeoCloud> source_;
  std::vector<GridCell> cells_;
};

/// Excess-green index 2g - r - b.
inline double exg(double r, double g, double b) { return 2.0 * g - r - b; }

/// Planar extent of a cloud.
GridBounds cloud_bounds(const ColoredGeoCloud& cloud);

/// Gaussian-weighted rasterization. Each cell averages height and ExG over
/// all points within 3 sigma_avg of its center; the anchor is the point
/// nearest the center among those inside the cell square.
MultimodalGridMap rasterize(std::shared_ptr<const ColoredGeoCloud> cloud, const GridMapParams& params);

/// Writes `<prefix>_exg.png`, `<prefix>_height.png` (16-bit grayscale) and
/// `<prefix>_manifest.txt` with origin, cell size and channel ranges.
void dump_grid_png(const MultimodalGridMap& map, const std::filesystem::path& prefix);

}  // namespace fieldreg
