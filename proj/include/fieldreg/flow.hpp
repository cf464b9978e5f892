#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "fieldreg/descriptors.hpp"
#include "fieldreg/gridmap.hpp"

namespace fieldreg {

struct FlowParams {
  double alpha = 1.0;  // appearance (DAISY) weight
  double beta = 0.5;   // geometry (FPFH) weight
  int seed_spacing = 3;
  int pyramid_levels = 3;
  double scale_factor = 0.5;
  int iterations_per_level = 6;
  int random_search_radius_init = 300;  // finest-level cells
  int refine_search_radius = 4;         // cells, levels below the coarsest
  double forward_backward_tol = 1.0;    // finest-level cells
  bool forward_backward_check = true;
  // Levels finer than this are skipped; flows are still reported in
  // finest-level cells.
  int finest_level = 0;
  DaisyConfig daisy;
  int fpfh_radius_cells = 3;
};

/// Throws kInvalidArgument on a parameter outside its documented range.
void validate(const FlowParams& params);

struct FlowSeed {
  int x = 0;  // seed cell in the source map
  int y = 0;
  int flow_x = 0;  // cells
  int flow_y = 0;
  double cost = 0.0;
};

struct FlowField {
  std::vector<FlowSeed> seeds;
  int seed_spacing = 1;
  std::size_t seeds_total = 0;  // active seeds before the consistency check
};

/// Both descriptor fields of one raster pair.
struct DescriptorSet {
  DaisyField daisy;
  FpfhField fpfh;
};

DescriptorSet compute_descriptors(const Raster& exg, const Raster& height, const FlowParams& params);

inline constexpr double kInfiniteCost = std::numeric_limits<double>::infinity();

/// alpha * L1(DAISY) + beta * L1(FPFH) between the source cell and the
/// flowed target cell; +inf when either lies outside its field.
double match_cost(const DescriptorSet& a, const DescriptorSet& g, int x, int y, int flow_x, int flow_y,
                  double alpha, double beta);

// Pyramid ------------------------------------------------------------------

struct PyramidLevel {
  Raster exg;
  Raster height;
  std::vector<std::uint8_t> occupied;
  double scale = 1.0;  // cells of this level per finest cell

  bool is_occupied(int x, int y) const { return occupied[static_cast<std::size_t>(y) * exg.width + x] != 0; }
};

/// Area-weighted box downsampling by `factor` (0 < factor < 1).
Raster downsample_box(const Raster& in, double factor);

/// Level 0 is the map itself. Stops early once a level would be smaller
/// than `min_size` cells on a side.
std::vector<PyramidLevel> build_pyramid(const MultimodalGridMap& map, int levels, double factor, int min_size);

// Estimation ---------------------------------------------------------------

/// Per-seed cost after every step of every level, for the monotonicity
/// property. Rows follow the active-seed order of the forward pass.
struct FlowTrace {
  struct Level {
    int level = 0;
    std::vector<std::vector<double>> costs;  // [step][seed]
  };
  std::vector<Level> levels;
};

/// Coarse-to-fine PatchMatch from A (seed lattice) to G. Both maps must
/// share cell size, origin and dimensions, i.e. G has already been
/// rasterized into A's frame with the current transform estimate.
FlowField estimate_flow(const MultimodalGridMap& a, const MultimodalGridMap& g, const FlowParams& params,
                        std::mt19937_64& rng, FlowTrace* trace = nullptr);

/// Exhaustive per-seed search over a square window, finest level only.
FlowField exhaustive_flow(const DescriptorSet& a, const DescriptorSet& g, const std::vector<std::pair<int, int>>& seeds,
                          int radius, double alpha, double beta);

}  // namespace fieldreg
