#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "fieldreg/descriptors.hpp"

namespace fieldreg {

bool pair_features(const Vec3& p1, const Vec3& n1, const Vec3& p2, const Vec3& n2, double& theta,
                   double& alpha, double& phi) {
  Vec3 dp = p2 - p1;
  const double dist = dp.norm();
  if (dist == 0.0) return false;
  const double angle1 = n1.dot(dp) / dist;
  const double angle2 = n2.dot(dp) / dist;
  const Vec3* source_normal = &n1;
  const Vec3* target_normal = &n2;
  if (std::acos(std::min(1.0, std::abs(angle1))) > std::acos(std::min(1.0, std::abs(angle2)))) {
    source_normal = &n2;
    target_normal = &n1;
    dp = -dp;
    phi = -angle2;
  } else {
    phi = angle1;
  }
  Vec3 v = dp.cross(*source_normal);
  const double v_norm = v.norm();
  if (v_norm == 0.0) return false;
  v /= v_norm;
  const Vec3 w = source_normal->cross(v);
  alpha = v.dot(*target_normal);
  theta = std::atan2(w.dot(*target_normal), source_normal->dot(*target_normal));
  return true;
}

int theta_bin(double theta) {
  const int bin = static_cast<int>(std::floor(kFpfhBinsPerFeature * (theta + std::numbers::pi) / (2.0 * std::numbers::pi)));
  return std::clamp(bin, 0, kFpfhBinsPerFeature - 1);
}

int unit_bin(double value) {
  const int bin = static_cast<int>(std::floor(kFpfhBinsPerFeature * (value + 1.0) * 0.5));
  return std::clamp(bin, 0, kFpfhBinsPerFeature - 1);
}

namespace {

struct Offset {
  int dx, dy;
};

std::vector<Offset> disc_offsets(int radius) {
  std::vector<Offset> out;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      if ((dx != 0 || dy != 0) && dx * dx + dy * dy <= radius * radius) out.push_back({dx, dy});
    }
  }
  return out;
}

// Scales each 11-bin group to sum 100; groups with no mass stay zero.
template <typename T>
void normalize_groups(T* hist) {
  for (int g = 0; g < 3; ++g) {
    T* group = hist + g * kFpfhBinsPerFeature;
    double sum = 0.0;
    for (int b = 0; b < kFpfhBinsPerFeature; ++b) sum += group[b];
    if (sum <= 0.0) continue;
    for (int b = 0; b < kFpfhBinsPerFeature; ++b) group[b] = static_cast<T>(100.0 * group[b] / sum);
  }
}

}  // namespace

FpfhField fpfh_field(const Raster& height, int radius_cells) {
  if (radius_cells < 2) {
    throw Error(ErrorCode::kInvalidArgument, "FPFH radius must be at least 2 cells, got " + std::to_string(radius_cells));
  }
  const int w = height.width;
  const int h = height.height;
  const double s = height.cell_size;
  const std::vector<Offset> offsets = disc_offsets(radius_cells);

  // Normals from z = a*dx + b*dy + c fitted over the disc including the center.
  std::vector<Vec3> normals(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double zc = height.at(x, y);
      Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
      Eigen::Vector3d atb = Eigen::Vector3d::Zero();
      ata(2, 2) = 1.0;  // center sample: (0, 0, 1), dz = 0
      for (const Offset& o : offsets) {
        const int nx = x + o.dx;
        const int ny = y + o.dy;
        if (!height.inside(nx, ny)) continue;
        const Eigen::Vector3d row(o.dx * s, o.dy * s, 1.0);
        ata += row * row.transpose();
        atb += row * (height.at(nx, ny) - zc);
      }
      Vec3 n(0.0, 0.0, 1.0);
      const Eigen::LDLT<Eigen::Matrix3d> ldlt(ata);
      if (ldlt.info() == Eigen::Success && std::abs(ata.determinant()) > 1e-18) {
        const Eigen::Vector3d coef = ldlt.solve(atb);
        n = Vec3(-coef(0), -coef(1), 1.0).normalized();
      }
      normals[static_cast<std::size_t>(y) * w + x] = n;
    }
  }

  // Simplified point feature histograms.
  std::vector<double> spfh(static_cast<std::size_t>(w) * h * kFpfhLength, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t ci = static_cast<std::size_t>(y) * w + x;
      const double zc = height.at(x, y);
      const Vec3 pc = Vec3::Zero();
      double* hist = spfh.data() + ci * kFpfhLength;
      for (const Offset& o : offsets) {
        const int nx = x + o.dx;
        const int ny = y + o.dy;
        if (!height.inside(nx, ny)) continue;
        const std::size_t ni = static_cast<std::size_t>(ny) * w + nx;
        const Vec3 pn(o.dx * s, o.dy * s, height.at(nx, ny) - zc);
        double theta = 0, alpha = 0, phi = 0;
        if (!pair_features(pc, normals[ci], pn, normals[ni], theta, alpha, phi)) continue;
        hist[theta_bin(theta)] += 1.0;
        hist[kFpfhBinsPerFeature + unit_bin(alpha)] += 1.0;
        hist[2 * kFpfhBinsPerFeature + unit_bin(phi)] += 1.0;
      }
      normalize_groups(hist);
    }
  }

  // FPFH(p) = SPFH(p) + 1/k * sum_k SPFH(k) / |p - p_k|
  FpfhField field(w, h);
  std::array<double, kFpfhLength> acc{};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t ci = static_cast<std::size_t>(y) * w + x;
      acc.fill(0.0);
      int k = 0;
      for (const Offset& o : offsets) {
        const int nx = x + o.dx;
        const int ny = y + o.dy;
        if (!height.inside(nx, ny)) continue;
        const std::size_t ni = static_cast<std::size_t>(ny) * w + nx;
        const double dz = height.at(nx, ny) - height.at(x, y);
        const double dist = std::sqrt(o.dx * s * o.dx * s + o.dy * s * o.dy * s + dz * dz);
        const double weight = 1.0 / dist;
        const double* nh = spfh.data() + ni * kFpfhLength;
        for (int b = 0; b < kFpfhLength; ++b) acc[b] += weight * nh[b];
        ++k;
      }
      const double* own = spfh.data() + ci * kFpfhLength;
      const double inv_k = k > 0 ? 1.0 / k : 0.0;
      for (int b = 0; b < kFpfhLength; ++b) acc[b] = own[b] + inv_k * acc[b];
      normalize_groups(acc.data());
      float* out = field.at(x, y).data();
      for (int b = 0; b < kFpfhLength; ++b) out[b] = static_cast<float>(acc[b]);
    }
  }
  return field;
}

FpfhField fpfh_field(const MultimodalGridMap& map, int radius_cells) {
  if (map.occupied_count() == 0) throw Error(ErrorCode::kInvalidArgument, "grid map has no occupied cell");
  return fpfh_field(map.height_channel(), radius_cells);
}

}  // namespace fieldreg
