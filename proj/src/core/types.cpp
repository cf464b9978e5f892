#include "fieldreg/types.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>
#include <string>

namespace fieldreg {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo: return "io";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kSchema: return "schema";
    case ErrorCode::kEmptyCloud: return "empty-cloud";
    case ErrorCode::kValidation: return "validation";
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kDegenerateBounds: return "degenerate-bounds";
    case ErrorCode::kGeotagMismatch: return "geotag-mismatch";
    case ErrorCode::kInsufficientOverlap: return "insufficient-overlap";
    case ErrorCode::kInsufficientCorrespondences: return "insufficient-correspondences";
    case ErrorCode::kRankDeficient: return "rank-deficient";
    case ErrorCode::kDivergence: return "divergence";
    case ErrorCode::kEmptyVegetation: return "empty-vegetation";
  }
  return "unknown";
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo:
    case ErrorCode::kParse:
    case ErrorCode::kSchema:
    case ErrorCode::kEmptyCloud:
    case ErrorCode::kValidation:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kDegenerateBounds:
      return 2;
    case ErrorCode::kGeotagMismatch:
    case ErrorCode::kInsufficientOverlap:
    case ErrorCode::kInsufficientCorrespondences:
      return 3;
    case ErrorCode::kRankDeficient:
    case ErrorCode::kDivergence:
      return 4;
    case ErrorCode::kEmptyVegetation:
      return 5;
  }
  return 1;
}

void validate(const ColoredGeoCloud& cloud) {
  if (cloud.points.empty()) {
    throw Error(ErrorCode::kEmptyCloud, "cloud has no points");
  }
  const auto& o = cloud.geo_origin;
  if (!(o.latitude_deg >= -90.0 && o.latitude_deg <= 90.0) ||
      !(o.longitude_deg >= -180.0 && o.longitude_deg <= 180.0) || !std::isfinite(o.altitude_m) ||
      !std::isfinite(cloud.heading_rad)) {
    throw Error(ErrorCode::kValidation, "geo origin out of range");
  }
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const GeoPoint& p = cloud.points[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
      throw Error(ErrorCode::kValidation, "point " + std::to_string(i) + " has a non-finite coordinate");
    }
    const auto in_unit = [](double c) { return c >= 0.0 && c <= 1.0; };
    if (!in_unit(p.r) || !in_unit(p.g) || !in_unit(p.b)) {
      throw Error(ErrorCode::kValidation, "point " + std::to_string(i) + " has a color outside [0,1]");
    }
  }
}

AnisoAffine::AnisoAffine(const Vec3& scale, const Mat3& rotation, const Vec3& translation)
    : scale_(scale), rotation_(rotation), translation_(translation) {
  if (!scale.allFinite() || !rotation.allFinite() || !translation.allFinite()) {
    throw Error(ErrorCode::kValidation, "transform has non-finite entries");
  }
  if ((scale.array() <= 0.0).any()) {
    throw Error(ErrorCode::kValidation, "scale components must be strictly positive");
  }
  const double ortho = (rotation.transpose() * rotation - Mat3::Identity()).norm();
  if (ortho > 1e-9 || rotation.determinant() < 0.0) {
    throw Error(ErrorCode::kValidation, "rotation is not a proper orthonormal matrix");
  }
}

Mat4 AnisoAffine::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = linear();
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

AffineDecomposition decompose(const Mat4& affine, double shear_tolerance) {
  const Mat3 linear = affine.topLeftCorner<3, 3>();
  const Vec3 translation = affine.topRightCorner<3, 1>();

  Eigen::JacobiSVD<Mat3> svd(linear, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  Mat3 v = svd.matrixV();
  Vec3 sigma = svd.singularValues();
  bool proper = linear.determinant() > 0.0;
  if ((u * v.transpose()).determinant() < 0.0) {
    // Reflection: flip the weakest axis so the orthogonal factor is in SO(3).
    u.col(2) *= -1.0;
    sigma(2) *= -1.0;
  }
  const Mat3 rotation = u * v.transpose();
  const Mat3 symmetric = u * sigma.asDiagonal() * u.transpose();

  Vec3 scale = symmetric.diagonal();
  double max_diag = scale.cwiseAbs().maxCoeff();
  double max_off = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (i != j) max_off = std::max(max_off, std::abs(symmetric(i, j)));
    }
  }

  AffineDecomposition out;
  out.shear_residual = max_diag > 0.0 ? max_off / max_diag : 0.0;
  proper = proper && (scale.array() > 0.0).all();
  if (!proper) {
    scale = scale.cwiseAbs().cwiseMax(1e-12);
  }
  out.transform = AnisoAffine(scale, rotation, translation);
  out.valid = proper && out.shear_residual < shear_tolerance;
  return out;
}

Mat4 compose(const AnisoAffine& a, const AnisoAffine& b) { return a.matrix() * b.matrix(); }

Mat4 compose(const Mat4& a, const Mat4& b) { return a * b; }

Vec3 apply_affine(const Mat4& affine, const Vec3& x) {
  return affine.topLeftCorner<3, 3>() * x + affine.topRightCorner<3, 1>();
}

namespace {

template <typename Fn>
ColoredGeoCloud map_points(const ColoredGeoCloud& cloud, Fn&& fn) {
  if (cloud.empty()) throw Error(ErrorCode::kEmptyCloud, "cannot transform an empty cloud");
  ColoredGeoCloud out;
  out.geo_origin = cloud.geo_origin;
  out.heading_rad = cloud.heading_rad;
  out.points.reserve(cloud.size());
  for (const GeoPoint& p : cloud.points) {
    const Vec3 y = fn(p.position());
    out.points.push_back({y.x(), y.y(), y.z(), p.r, p.g, p.b});
  }
  return out;
}

}  // namespace

ColoredGeoCloud apply_transform(const AnisoAffine& transform, const ColoredGeoCloud& cloud) {
  return map_points(cloud, [&](const Vec3& x) { return transform.apply(x); });
}

ColoredGeoCloud apply_transform(const Mat4& affine, const ColoredGeoCloud& cloud) {
  return map_points(cloud, [&](const Vec3& x) { return apply_affine(affine, x); });
}

Mat3 rotation_z(double angle_rad) {
  const double c = std::cos(angle_rad);
  const double s = std::sin(angle_rad);
  Mat3 r;
  r << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
  return r;
}

}  // namespace fieldreg
