#include <algorithm>
#include <cmath>
#include <string>

#include "fieldreg/flow.hpp"

namespace fieldreg {

namespace {

// Fine-cell coverage of each coarse cell along one axis.
struct Span {
  int first = 0;
  std::vector<double> weights;
};

std::vector<Span> axis_spans(int fine, int coarse, double factor) {
  std::vector<Span> spans(coarse);
  const double step = 1.0 / factor;
  for (int c = 0; c < coarse; ++c) {
    const double lo = c * step;
    const double hi = std::min(static_cast<double>(fine), (c + 1) * step);
    Span& s = spans[c];
    s.first = static_cast<int>(std::floor(lo));
    const int last = std::min(fine - 1, static_cast<int>(std::ceil(hi)) - 1);
    double total = 0.0;
    for (int f = s.first; f <= last; ++f) {
      const double w = std::min(hi, f + 1.0) - std::max(lo, static_cast<double>(f));
      s.weights.push_back(std::max(0.0, w));
      total += s.weights.back();
    }
    if (total > 0.0) {
      for (double& w : s.weights) w /= total;
    }
  }
  return spans;
}

int coarse_size(int fine, double factor) { return std::max(1, static_cast<int>(std::floor(fine * factor))); }

}  // namespace

Raster downsample_box(const Raster& in, double factor) {
  if (!(factor > 0.0 && factor < 1.0)) throw Error(ErrorCode::kInvalidArgument, "downsample factor must be in (0,1)");
  const int w = coarse_size(in.width, factor);
  const int h = coarse_size(in.height, factor);
  const std::vector<Span> xs = axis_spans(in.width, w, factor);
  const std::vector<Span> ys = axis_spans(in.height, h, factor);
  Raster out{w, h, in.cell_size / factor, std::vector<double>(static_cast<std::size_t>(w) * h, 0.0)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (std::size_t j = 0; j < ys[y].weights.size(); ++j) {
        for (std::size_t i = 0; i < xs[x].weights.size(); ++i) {
          acc += ys[y].weights[j] * xs[x].weights[i] *
                 in.at(xs[x].first + static_cast<int>(i), ys[y].first + static_cast<int>(j));
        }
      }
      out.at(x, y) = acc;
    }
  }
  return out;
}

std::vector<PyramidLevel> build_pyramid(const MultimodalGridMap& map, int levels, double factor, int min_size) {
  if (levels < 1) throw Error(ErrorCode::kInvalidArgument, "pyramid needs at least one level");
  std::vector<PyramidLevel> out;
  PyramidLevel base;
  base.exg = map.exg_channel();
  base.height = map.height_channel();
  base.occupied.resize(map.cells().size());
  for (std::size_t i = 0; i < map.cells().size(); ++i) base.occupied[i] = map.cells()[i].weight_sum >= kMinCellWeight;
  out.push_back(std::move(base));

  while (static_cast<int>(out.size()) < levels) {
    const PyramidLevel& fine = out.back();
    const int w = coarse_size(fine.exg.width, factor);
    const int h = coarse_size(fine.exg.height, factor);
    if (w < min_size || h < min_size) break;
    PyramidLevel next;
    next.exg = downsample_box(fine.exg, factor);
    next.height = downsample_box(fine.height, factor);
    next.scale = fine.scale * factor;
    next.occupied.assign(static_cast<std::size_t>(w) * h, 0);
    // A coarse cell is occupied if any fine cell it covers is.
    const double step = 1.0 / factor;
    for (int fy = 0; fy < fine.exg.height; ++fy) {
      const int cy = std::min(h - 1, static_cast<int>(fy / step));
      for (int fx = 0; fx < fine.exg.width; ++fx) {
        if (!fine.is_occupied(fx, fy)) continue;
        const int cx = std::min(w - 1, static_cast<int>(fx / step));
        next.occupied[static_cast<std::size_t>(cy) * w + cx] = 1;
      }
    }
    out.push_back(std::move(next));
  }
  return out;
}

}  // namespace fieldreg
