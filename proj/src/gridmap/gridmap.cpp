#include "fieldreg/gridmap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fieldreg {

MultimodalGridMap::MultimodalGridMap(int width, int height, double cell_size, Vec2 origin,
                                     std::shared_ptr<const ColoredGeoCloud> source)
    : width_(width), height_(height), cell_size_(cell_size), origin_(std::move(origin)), source_(std::move(source)) {
  if (width < 1 || height < 1 || !(cell_size > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "grid map needs w, h >= 1 and cell_size > 0");
  }
  cells_.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
}

std::pair<int, int> MultimodalGridMap::cell_of(double wx, double wy) const {
  return {static_cast<int>(std::floor((wx - origin_.x()) / cell_size_)),
          static_cast<int>(std::floor((wy - origin_.y()) / cell_size_))};
}

Raster MultimodalGridMap::exg_channel() const {
  Raster r{width_, height_, cell_size_, std::vector<double>(cells_.size())};
  for (std::size_t i = 0; i < cells_.size(); ++i) r.values[i] = cells_[i].exg;
  return r;
}

Raster MultimodalGridMap::height_channel() const {
  Raster r{width_, height_, cell_size_, std::vector<double>(cells_.size())};
  for (std::size_t i = 0; i < cells_.size(); ++i) r.values[i] = cells_[i].height;
  return r;
}

std::size_t MultimodalGridMap::occupied_count() const {
  return static_cast<std::size_t>(
      std::count_if(cells_.begin(), cells_.end(), [](const GridCell& c) { return c.weight_sum >= kMinCellWeight; }));
}

GridBounds cloud_bounds(const ColoredGeoCloud& cloud) {
  if (cloud.empty()) throw Error(ErrorCode::kEmptyCloud, "cannot bound an empty cloud");
  GridBounds b{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
               -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const GeoPoint& p : cloud.points) {
    b.min_x = std::min(b.min_x, p.x);
    b.min_y = std::min(b.min_y, p.y);
    b.max_x = std::max(b.max_x, p.x);
    b.max_y = std::max(b.max_y, p.y);
  }
  return b;
}

MultimodalGridMap rasterize(std::shared_ptr<const ColoredGeoCloud> cloud, const GridMapParams& params) {
  if (!cloud || cloud->empty()) throw Error(ErrorCode::kEmptyCloud, "cannot rasterize an empty cloud");
  if (!(params.cell_size > 0.0) || !(params.sigma_avg > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "cell_size and sigma_avg must be positive");
  }
  const double s = params.cell_size;
  const bool explicit_bounds = params.bounds.has_value();
  const GridBounds b = explicit_bounds ? *params.bounds : cloud_bounds(*cloud);
  const double extent_x = b.max_x - b.min_x;
  const double extent_y = b.max_y - b.min_y;
  if (!(extent_x > 0.0) || !(extent_y > 0.0)) {
    throw Error(ErrorCode::kDegenerateBounds, "rasterization bounds have zero area");
  }
  // Auto bounds must include points lying exactly on the max edge.
  const int w = explicit_bounds ? std::max(1, static_cast<int>(std::ceil(extent_x / s - 1e-9)))
                                : static_cast<int>(std::floor(extent_x / s)) + 1;
  const int h = explicit_bounds ? std::max(1, static_cast<int>(std::ceil(extent_y / s - 1e-9)))
                                : static_cast<int>(std::floor(extent_y / s)) + 1;

  MultimodalGridMap map(w, h, s, Vec2(b.min_x, b.min_y), cloud);

  const double sigma = params.sigma_avg;
  const double support = 3.0 * sigma;
  const double support_sq = support * support;
  const double inv_two_sigma_sq = 1.0 / (2.0 * sigma * sigma);
  std::vector<double> anchor_dist(static_cast<std::size_t>(w) * h, std::numeric_limits<double>::infinity());

  const auto& points = cloud->points;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const GeoPoint& p = points[i];
    const double e = exg(p.r, p.g, p.b);
    const int x0 = std::max(0, static_cast<int>(std::floor((p.x - support - b.min_x) / s)));
    const int x1 = std::min(w - 1, static_cast<int>(std::floor((p.x + support - b.min_x) / s)));
    const int y0 = std::max(0, static_cast<int>(std::floor((p.y - support - b.min_y) / s)));
    const int y1 = std::min(h - 1, static_cast<int>(std::floor((p.y + support - b.min_y) / s)));
    for (int cy = y0; cy <= y1; ++cy) {
      const double dy = p.y - (b.min_y + (cy + 0.5) * s);
      for (int cx = x0; cx <= x1; ++cx) {
        const double dx = p.x - (b.min_x + (cx + 0.5) * s);
        const double d2 = dx * dx + dy * dy;
        if (d2 > support_sq) continue;
        const double wgt = std::exp(-d2 * inv_two_sigma_sq);
        GridCell& c = map.cell(cx, cy);
        c.weight_sum += wgt;
        c.height += wgt * p.z;
        c.exg += wgt * e;
      }
    }
    const auto [ax, ay] = map.cell_of(p.x, p.y);
    if (map.inside(ax, ay)) {
      const Vec2 center = map.cell_center(ax, ay);
      const double d2 = (Vec2(p.x, p.y) - center).squaredNorm();
      double& best = anchor_dist[static_cast<std::size_t>(ay) * w + ax];
      if (d2 < best) {
        best = d2;
        map.cell(ax, ay).anchor = static_cast<std::int32_t>(i);
      }
    }
  }

  for (int cy = 0; cy < h; ++cy) {
    for (int cx = 0; cx < w; ++cx) {
      GridCell& c = map.cell(cx, cy);
      if (c.weight_sum >= kMinCellWeight) {
        c.height /= c.weight_sum;
        c.exg /= c.weight_sum;
      } else {
        c.height = 0.0;
        c.exg = 0.0;
        c.anchor = GridCell::kNoAnchor;
      }
    }
  }
  return map;
}

}  // namespace fieldreg
