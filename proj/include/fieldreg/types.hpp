#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <vector>

#include "fieldreg/error.hpp"

namespace fieldreg {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

/// A colored point in a local East-North-Up frame (meters). Colors are
/// normalized to [0, 1].
struct GeoPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;

  Vec3 position() const { return {x, y, z}; }
};

struct GeoOrigin {
  double latitude_deg = 0.0;
  double longitude_deg = 0.0;
  double altitude_m = 0.0;
};

/// Geotagged colored cloud. `heading_rad` is the counter-clockwise yaw of
/// the local frame with respect to East-North-Up: a local vector v maps to
/// ENU as Rz(heading) * v.
struct ColoredGeoCloud {
  std::vector<GeoPoint> points;
  GeoOrigin geo_origin;
  double heading_rad = 0.0;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

/// Throws kEmptyCloud / kValidation when the cloud breaks its invariants.
void validate(const ColoredGeoCloud& cloud);

struct Correspondence3D {
  Vec3 p;  // aerial-map frame
  Vec3 q;  // ground-map frame
};

/// x -> diag(scale) * R * x + t, with R in SO(3) and scale > 0.
class AnisoAffine {
 public:
  AnisoAffine() = default;

  /// Validates orthonormality (1e-9), det(R) = +1 and positive scale.
  AnisoAffine(const Vec3& scale, const Mat3& rotation, const Vec3& translation);

  static AnisoAffine identity() { return {}; }
  static AnisoAffine rigid(const Mat3& rotation, const Vec3& translation) {
    return {Vec3::Ones(), rotation, translation};
  }

  const Vec3& scale() const { return scale_; }
  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Mat3 linear() const { return scale_.asDiagonal() * rotation_; }
  Mat4 matrix() const;

  Vec3 apply(const Vec3& x) const { return scale_.cwiseProduct(rotation_ * x) + translation_; }
  Vec3 apply_inverse(const Vec3& y) const {
    return rotation_.transpose() * (y - translation_).cwiseQuotient(scale_);
  }

 private:
  Vec3 scale_ = Vec3::Ones();
  Mat3 rotation_ = Mat3::Identity();
  Vec3 translation_ = Vec3::Zero();
};

/// Polar decomposition of a general affine linear part into diag(s) * R.
struct AffineDecomposition {
  AnisoAffine transform;
  /// Largest off-diagonal magnitude of the symmetric factor, relative to its
  /// largest diagonal entry. Zero for an exact diag(s) * R.
  double shear_residual = 0.0;
  bool valid = false;
};

inline constexpr double kShearTolerance = 1e-3;

AffineDecomposition decompose(const Mat4& affine, double shear_tolerance = kShearTolerance);

/// 4x4 matrix applying `b` first, then `a`.
Mat4 compose(const AnisoAffine& a, const AnisoAffine& b);
Mat4 compose(const Mat4& a, const Mat4& b);

ColoredGeoCloud apply_transform(const AnisoAffine& transform, const ColoredGeoCloud& cloud);
ColoredGeoCloud apply_transform(const Mat4& affine, const ColoredGeoCloud& cloud);

Vec3 apply_affine(const Mat4& affine, const Vec3& x);

Mat3 rotation_z(double angle_rad);

struct RegistrationReport {
  double e_t = 0.0;
  double e_R = 0.0;
  double e_s = 0.0;
  bool success = false;
  AnisoAffine preliminary;
  Mat4 refined = Mat4::Identity();
};

}  // namespace fieldreg
