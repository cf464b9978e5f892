#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "fieldreg/flow.hpp"

namespace fieldreg {

void validate(const FlowParams& p) {
  const auto fail = [](const std::string& msg) { throw Error(ErrorCode::kInvalidArgument, "flow: " + msg); };
  if (!(p.alpha >= 0.0) || !(p.beta >= 0.0) || !(p.alpha + p.beta > 0.0)) fail("need alpha, beta >= 0 and alpha + beta > 0");
  if (p.seed_spacing < 1) fail("seed_spacing must be >= 1");
  if (p.pyramid_levels < 1) fail("pyramid_levels must be >= 1");
  if (!(p.scale_factor > 0.0 && p.scale_factor < 1.0)) fail("scale_factor must be in (0,1)");
  if (p.iterations_per_level < 1) fail("iterations_per_level must be >= 1");
  if (p.random_search_radius_init < 1) fail("random_search_radius_init must be >= 1");
  if (p.refine_search_radius < 0) fail("refine_search_radius must be >= 0");
  if (!(p.forward_backward_tol >= 0.0)) fail("forward_backward_tol must be >= 0");
  if (p.finest_level < 0) fail("finest_level must be >= 0");
}

DescriptorSet compute_descriptors(const Raster& exg, const Raster& height, const FlowParams& params) {
  return {daisy_field(exg, params.daisy), fpfh_field(height, params.fpfh_radius_cells)};
}

double match_cost(const DescriptorSet& a, const DescriptorSet& g, int x, int y, int flow_x, int flow_y, double alpha,
                  double beta) {
  const int tx = x + flow_x;
  const int ty = y + flow_y;
  if (!a.daisy.inside(x, y) || !g.daisy.inside(tx, ty)) return kInfiniteCost;
  double cost = 0.0;
  if (alpha != 0.0) cost += alpha * l1_distance<kDaisyLength>(a.daisy.at(x, y), g.daisy.at(tx, ty));
  if (beta != 0.0) cost += beta * l1_distance<kFpfhLength>(a.fpfh.at(x, y), g.fpfh.at(tx, ty));
  return cost;
}

namespace {

struct Lattice {
  int cols = 0;
  int rows = 0;
  int offset = 0;
  int spacing = 1;
  std::vector<int> index;  // lattice slot -> active seed id or -1
  std::vector<std::pair<int, int>> positions;  // finest cells, per active seed
  std::vector<std::array<int, 4>> neighbors;   // left, up, right, down

  int at(int c, int r) const {
    return (c >= 0 && r >= 0 && c < cols && r < rows) ? index[static_cast<std::size_t>(r) * cols + c] : -1;
  }
};

Lattice make_lattice(const PyramidLevel& finest, int spacing) {
  Lattice l;
  l.spacing = spacing;
  l.offset = spacing / 2;
  const int w = finest.exg.width;
  const int h = finest.exg.height;
  l.cols = w > l.offset ? (w - 1 - l.offset) / spacing + 1 : 0;
  l.rows = h > l.offset ? (h - 1 - l.offset) / spacing + 1 : 0;
  l.index.assign(static_cast<std::size_t>(l.cols) * l.rows, -1);
  for (int r = 0; r < l.rows; ++r) {
    for (int c = 0; c < l.cols; ++c) {
      const int x = l.offset + c * spacing;
      const int y = l.offset + r * spacing;
      if (!finest.is_occupied(x, y)) continue;
      l.index[static_cast<std::size_t>(r) * l.cols + c] = static_cast<int>(l.positions.size());
      l.positions.emplace_back(x, y);
    }
  }
  l.neighbors.resize(l.positions.size());
  for (int r = 0; r < l.rows; ++r) {
    for (int c = 0; c < l.cols; ++c) {
      const int id = l.at(c, r);
      if (id < 0) continue;
      l.neighbors[id] = {l.at(c - 1, r), l.at(c, r - 1), l.at(c + 1, r), l.at(c, r + 1)};
    }
  }
  return l;
}

struct DirectionResult {
  Lattice lattice;
  std::vector<int> flow_x;  // finest cells
  std::vector<int> flow_y;
  std::vector<double> cost;
};

int level_coord(int finest, double scale, int size) {
  return std::clamp(static_cast<int>(std::floor(finest * scale)), 0, size - 1);
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

DirectionResult run_direction(const std::vector<PyramidLevel>& src_levels, const std::vector<DescriptorSet>& src_desc,
                              const std::vector<DescriptorSet>& dst_desc, const FlowParams& params, int finest_level,
                              std::mt19937_64& rng, FlowTrace* trace) {
  DirectionResult out;
  out.lattice = make_lattice(src_levels.front(), params.seed_spacing);
  const Lattice& lat = out.lattice;
  const std::size_t n = lat.positions.size();
  std::vector<int> fx(n, 0), fy(n, 0);
  std::vector<double> cost(n, kInfiniteCost);
  std::vector<int> px(n), py(n);

  const int coarsest = static_cast<int>(src_levels.size()) - 1;
  for (int level = coarsest; level >= finest_level; --level) {
    const PyramidLevel& lv = src_levels[level];
    const DescriptorSet& a = src_desc[level];
    const DescriptorSet& g = dst_desc[level];
    for (std::size_t i = 0; i < n; ++i) {
      px[i] = level_coord(lat.positions[i].first, lv.scale, lv.exg.width);
      py[i] = level_coord(lat.positions[i].second, lv.scale, lv.exg.height);
    }
    const auto eval = [&](std::size_t i, int cx, int cy) {
      return match_cost(a, g, px[i], py[i], cx, cy, params.alpha, params.beta);
    };

    int radius = params.refine_search_radius;
    if (level == coarsest) {
      radius = std::max(1, static_cast<int>(std::lround(params.random_search_radius_init * lv.scale)));
      for (std::size_t i = 0; i < n; ++i) {
        fx[i] = uniform_int(rng, -radius, radius);
        fy[i] = uniform_int(rng, -radius, radius);
      }
    } else {
      const double up = 1.0 / params.scale_factor;
      for (std::size_t i = 0; i < n; ++i) {
        fx[i] = static_cast<int>(std::lround(fx[i] * up));
        fy[i] = static_cast<int>(std::lround(fy[i] * up));
      }
    }
    for (std::size_t i = 0; i < n; ++i) cost[i] = eval(i, fx[i], fy[i]);

    FlowTrace::Level* level_trace = nullptr;
    if (trace) {
      trace->levels.push_back({level, {}});
      level_trace = &trace->levels.back();
      level_trace->costs.push_back(cost);
    }

    const auto try_candidate = [&](std::size_t i, int cx, int cy) {
      if (cx == fx[i] && cy == fy[i]) return;
      const double c = eval(i, cx, cy);
      if (c < cost[i]) {
        cost[i] = c;
        fx[i] = cx;
        fy[i] = cy;
      }
    };

    for (int iter = 0; iter < params.iterations_per_level; ++iter) {
      const bool forward = iter % 2 == 0;
      // Propagation: adopt flows of neighbors already visited in this sweep.
      for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = forward ? k : n - 1 - k;
        const auto& nb = lat.neighbors[i];
        for (int j = 0; j < 2; ++j) {
          const int other = nb[forward ? j : j + 2];
          if (other >= 0) try_candidate(i, fx[other], fy[other]);
        }
      }
      if (level_trace) level_trace->costs.push_back(cost);

      // Random search with exponentially shrinking radius.
      for (std::size_t i = 0; i < n; ++i) {
        for (int r = radius; r >= 1; r /= 2) {
          try_candidate(i, fx[i] + uniform_int(rng, -r, r), fy[i] + uniform_int(rng, -r, r));
        }
      }
      if (level_trace) level_trace->costs.push_back(cost);
    }
  }

  const double to_finest = 1.0 / src_levels[finest_level].scale;
  out.flow_x.resize(n);
  out.flow_y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.flow_x[i] = static_cast<int>(std::lround(fx[i] * to_finest));
    out.flow_y[i] = static_cast<int>(std::lround(fy[i] * to_finest));
  }
  out.cost = std::move(cost);
  return out;
}

// Bilinear interpolation of backward flows over active lattice neighbors.
bool interpolate_backward(const DirectionResult& back, double tx, double ty, double& bx, double& by) {
  const Lattice& lat = back.lattice;
  const double u = (tx - lat.offset) / lat.spacing;
  const double v = (ty - lat.offset) / lat.spacing;
  const int c0 = static_cast<int>(std::floor(u));
  const int r0 = static_cast<int>(std::floor(v));
  const double au = u - c0;
  const double av = v - r0;
  double wsum = 0.0;
  bx = by = 0.0;
  for (int dr = 0; dr <= 1; ++dr) {
    for (int dc = 0; dc <= 1; ++dc) {
      const double w = (dc ? au : 1.0 - au) * (dr ? av : 1.0 - av);
      if (w <= 0.0) continue;
      const int id = lat.at(c0 + dc, r0 + dr);
      if (id < 0 || !std::isfinite(back.cost[id])) continue;
      wsum += w;
      bx += w * back.flow_x[id];
      by += w * back.flow_y[id];
    }
  }
  if (wsum <= 0.0) return false;
  bx /= wsum;
  by /= wsum;
  return true;
}

struct CellBox {
  int x0, y0, x1, y1;  // inclusive; empty when x0 > x1
};

CellBox occupied_box(const PyramidLevel& level) {
  CellBox b{level.exg.width, level.exg.height, -1, -1};
  for (int y = 0; y < level.exg.height; ++y) {
    for (int x = 0; x < level.exg.width; ++x) {
      if (!level.is_occupied(x, y)) continue;
      b.x0 = std::min(b.x0, x);
      b.y0 = std::min(b.y0, y);
      b.x1 = std::max(b.x1, x);
      b.y1 = std::max(b.y1, y);
    }
  }
  return b;
}

}  // namespace

FlowField estimate_flow(const MultimodalGridMap& a, const MultimodalGridMap& g, const FlowParams& params,
                        std::mt19937_64& rng, FlowTrace* trace) {
  validate(params);
  if (a.width() != g.width() || a.height() != g.height() || a.cell_size() != g.cell_size() ||
      (a.origin() - g.origin()).norm() > 1e-9 * a.cell_size()) {
    throw Error(ErrorCode::kInvalidArgument, "flow maps must share the same lattice; rasterize G into A's bounds");
  }
  const int footprint = 2 * params.daisy.radius + 1;
  const std::vector<PyramidLevel> pa = build_pyramid(a, params.pyramid_levels, params.scale_factor, footprint);
  const std::vector<PyramidLevel> pg = build_pyramid(g, params.pyramid_levels, params.scale_factor, footprint);
  const int finest_level = std::min(params.finest_level, static_cast<int>(pa.size()) - 1);

  // G must lie within search reach of A's occupied cells.
  const CellBox ba = occupied_box(pa.front());
  const CellBox bg = occupied_box(pg.front());
  const int reach = params.random_search_radius_init;
  const int ix = std::min(ba.x1 + reach, bg.x1) - std::max(ba.x0 - reach, bg.x0) + 1;
  const int iy = std::min(ba.y1 + reach, bg.y1) - std::max(ba.y0 - reach, bg.y0) + 1;
  if (ix < params.seed_spacing || iy < params.seed_spacing) {
    throw Error(ErrorCode::kInsufficientOverlap, "occupied regions of the two maps overlap by less than one seed cell");
  }

  std::vector<DescriptorSet> da(pa.size()), dg(pg.size());
  for (std::size_t l = finest_level; l < pa.size(); ++l) {
    da[l] = compute_descriptors(pa[l].exg, pa[l].height, params);
    dg[l] = compute_descriptors(pg[l].exg, pg[l].height, params);
  }

  const DirectionResult fwd = run_direction(pa, da, dg, params, finest_level, rng, trace);
  if (fwd.lattice.positions.empty()) {
    throw Error(ErrorCode::kInsufficientOverlap, "no seed lies on an occupied cell");
  }
  FlowField field;
  field.seed_spacing = params.seed_spacing;
  field.seeds_total = fwd.lattice.positions.size();

  if (!params.forward_backward_check) {
    for (std::size_t i = 0; i < fwd.lattice.positions.size(); ++i) {
      if (!std::isfinite(fwd.cost[i])) continue;
      field.seeds.push_back({fwd.lattice.positions[i].first, fwd.lattice.positions[i].second, fwd.flow_x[i],
                             fwd.flow_y[i], fwd.cost[i]});
    }
    return field;
  }

  const DirectionResult bwd = run_direction(pg, dg, da, params, finest_level, rng, nullptr);
  const double tol = params.forward_backward_tol / pa[finest_level].scale;
  for (std::size_t i = 0; i < fwd.lattice.positions.size(); ++i) {
    if (!std::isfinite(fwd.cost[i])) continue;
    const auto [x, y] = fwd.lattice.positions[i];
    double bx = 0.0, by = 0.0;
    if (!interpolate_backward(bwd, x + fwd.flow_x[i], y + fwd.flow_y[i], bx, by)) continue;
    if (std::hypot(fwd.flow_x[i] + bx, fwd.flow_y[i] + by) > tol) continue;
    field.seeds.push_back({x, y, fwd.flow_x[i], fwd.flow_y[i], fwd.cost[i]});
  }
  return field;
}

FlowField exhaustive_flow(const DescriptorSet& a, const DescriptorSet& g, const std::vector<std::pair<int, int>>& seeds,
                          int radius, double alpha, double beta) {
  FlowField field;
  field.seeds_total = seeds.size();
  for (const auto& [x, y] : seeds) {
    FlowSeed best{x, y, 0, 0, kInfiniteCost};
    for (int dy = -radius; dy <= radius; ++dy) {
      for (int dx = -radius; dx <= radius; ++dx) {
        const double c = match_cost(a, g, x, y, dx, dy, alpha, beta);
        if (c < best.cost) best = {x, y, dx, dy, c};
      }
    }
    if (std::isfinite(best.cost)) field.seeds.push_back(best);
  }
  return field;
}

}  // namespace fieldreg
