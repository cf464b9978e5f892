#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "fieldreg/gridmap.hpp"

namespace fieldreg {

inline constexpr int kDaisyRings = 3;
inline constexpr int kDaisyAnglesPerRing = 5;
inline constexpr int kDaisyOrientationBins = 8;
inline constexpr int kDaisyLength = (kDaisyRings * kDaisyAnglesPerRing + 1) * kDaisyOrientationBins;  // 128

inline constexpr int kFpfhBinsPerFeature = 11;
inline constexpr int kFpfhLength = 3 * kFpfhBinsPerFeature;  // 33

static_assert(kDaisyLength == 128);

/// Dense per-cell descriptor array, stored row-major as float.
template <int N>
class DescriptorField {
 public:
  static constexpr int kLength = N;

  DescriptorField() = default;
  DescriptorField(int width, int height)
      : width_(width), height_(height), data_(static_cast<std::size_t>(width) * height * N, 0.0f) {}

  int width() const { return width_; }
  int height() const { return height_; }
  bool inside(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  std::span<const float, N> at(int x, int y) const {
    return std::span<const float, N>(data_.data() + offset(x, y), N);
  }
  std::span<float, N> at(int x, int y) { return std::span<float, N>(data_.data() + offset(x, y), N); }

 private:
  std::size_t offset(int x, int y) const { return (static_cast<std::size_t>(y) * width_ + x) * N; }

  int width_ = 0;
  int height_ = 0;
  std::vector<float> data_;
};

using DaisyField = DescriptorField<kDaisyLength>;
using FpfhField = DescriptorField<kFpfhLength>;

/// DAISY layout: a center histogram plus 3 rings x 5 angles, 8 gradient
/// orientations each. Ring radii are radius/3, 2*radius/3 and radius cells.
struct DaisyConfig {
  int radius = 15;  // cells
};

/// Gradients are taken on the ExG channel with zero padding; empty cells
/// enter as 0. Each group (center, ring 1, ring 2, ring 3) is L2-normalized
/// or left all-zero. Throws kInvalidArgument if the map is smaller than the
/// 2*radius+1 footprint.
DaisyField daisy_field(const Raster& exg, const DaisyConfig& config);
DaisyField daisy_field(const MultimodalGridMap& map, const DaisyConfig& config);

/// FPFH over the organized cloud (cell center x, y, height). Normals come
/// from least-squares plane fits inside `radius_cells`; SPFH and the
/// weighted FPFH re-accumulation use the same circular neighborhood.
/// Each 11-bin feature group sums to 100 or is all-zero.
FpfhField fpfh_field(const Raster& height, int radius_cells);
FpfhField fpfh_field(const MultimodalGridMap& map, int radius_cells);

/// PFH angular triplet (theta, alpha, phi) for an oriented point pair, with
/// the source/target selection rule of the reference FPFH formulation.
/// Returns false when the pair is degenerate.
bool pair_features(const Vec3& p1, const Vec3& n1, const Vec3& p2, const Vec3& n2, double& theta,
                   double& alpha, double& phi);

/// Histogram bin of each feature, 0..10.
int theta_bin(double theta);
int unit_bin(double value);

template <int N>
double l1_distance(std::span<const float, N> a, std::span<const float, N> b) {
  double sum = 0.0;
  for (int i = 0; i < N; ++i) sum += std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i]));
  return sum;
}

}  // namespace fieldreg
