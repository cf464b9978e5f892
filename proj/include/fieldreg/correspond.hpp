#pragma once

#include <filesystem>
#include <vector>

#include "fieldreg/flow.hpp"
#include "fieldreg/gridmap.hpp"
#include "fieldreg/types.hpp"

namespace fieldreg {

struct VoteParams {
  double bin_step = 1.0;  // cells
  bool include_neighbor_bins = true;
};

struct VoteResult {
  std::vector<FlowSeed> winners;
  int bin_x = 0;
  int bin_y = 0;
  std::size_t score = 0;  // seeds counted for the winning bin
};

/// Accumulator bin of a flow component: floor((f + step/2) / step).
int flow_bin(int flow, double step);

/// Hough-style vote over quantized 2D flows. Only bins holding at least
/// one seed compete; with include_neighbor_bins a bin scores the seeds of
/// its 3x3 neighborhood and the winners are those seeds. Equal scores go
/// to the lower mean cost, then to the lexicographically smaller (bin_x,
/// bin_y). Throws kInsufficientCorrespondences on an empty field.
VoteResult vote_flows(const FlowField& flows, const VoteParams& params);

inline constexpr std::size_t kMinCorrespondences = 4;

/// p is the A anchor at the seed cell, q the G anchor at seed + flow mapped
/// back through `resample` (the transform used to rasterize G into A's
/// frame). Winners hitting a cell without anchor are dropped.
std::vector<Correspondence3D> lift_to_3d(const std::vector<FlowSeed>& winners, const MultimodalGridMap& a,
                                         const MultimodalGridMap& g, const AnisoAffine& resample,
                                         std::size_t min_count = kMinCorrespondences);

void write_flow_csv(const FlowField& flows, const std::filesystem::path& path);
void write_correspondences_csv(const std::vector<Correspondence3D>& corr, const std::filesystem::path& path);

}  // namespace fieldreg
