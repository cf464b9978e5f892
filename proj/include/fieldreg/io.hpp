#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "fieldreg/types.hpp"

namespace fieldreg {

/// A PLY geometry file plus its key-value geotag sidecar.
struct CloudFileBundle {
  std::filesystem::path geometry_path;
  std::filesystem::path meta_path;

  /// `foo.ply` -> {`foo.ply`, `foo.meta`}.
  static CloudFileBundle from_geometry(const std::filesystem::path& geometry);
};

/// Reads binary little-endian or ASCII PLY with float x,y,z and uchar
/// red,green,blue vertex properties. Colors are normalized to [0,1].
ColoredGeoCloud load_cloud(const CloudFileBundle& bundle);

/// Writes binary little-endian PLY plus sidecar. Validates before writing.
void save_cloud(const ColoredGeoCloud& cloud, const CloudFileBundle& bundle);

/// Geometry only; the geo metadata of the result is default-initialized.
ColoredGeoCloud read_ply(const std::filesystem::path& path);
void write_ply(const ColoredGeoCloud& cloud, const std::filesystem::path& path);

struct GeoMetadata {
  GeoOrigin origin;
  double heading_rad = 0.0;
  std::optional<std::string> scale_note;
};

GeoMetadata read_sidecar(const std::filesystem::path& path);
void write_sidecar(const GeoMetadata& meta, const std::filesystem::path& path);

// Geodesy -------------------------------------------------------------------

inline constexpr double kEarthRadiusM = 6378137.0;

/// ENU offset of `point` from `origin` on the local tangent plane
/// (equirectangular, longitude scaled by cos(origin latitude)).
Vec3 geodetic_to_enu(const GeoOrigin& origin, const GeoOrigin& point);

/// Inverse of `geodetic_to_enu` for the same origin.
GeoOrigin enu_to_geodetic(const GeoOrigin& origin, const Vec3& enu);

inline constexpr double kDefaultGeotagSanityRadiusM = 1000.0;

/// Rigid (scale 1) transform taking ground-local coordinates into the
/// aerial local frame from geo origins and headings only. Throws
/// kGeotagMismatch when the origins are farther apart than `sanity_radius_m`.
AnisoAffine initial_alignment(const ColoredGeoCloud& aerial, const ColoredGeoCloud& ground,
                              double sanity_radius_m = kDefaultGeotagSanityRadiusM);

}  // namespace fieldreg
