#include <cmath>
#include <numbers>
#include <sstream>

#include "fieldreg/io.hpp"

namespace fieldreg {

namespace {
constexpr double kDegToRad = std::numbers::pi / 180.0;
}

Vec3 geodetic_to_enu(const GeoOrigin& origin, const GeoOrigin& point) {
  const double meters_per_rad = kEarthRadiusM;
  const double cos_lat = std::cos(origin.latitude_deg * kDegToRad);
  const double east = (point.longitude_deg - origin.longitude_deg) * kDegToRad * meters_per_rad * cos_lat;
  const double north = (point.latitude_deg - origin.latitude_deg) * kDegToRad * meters_per_rad;
  return {east, north, point.altitude_m - origin.altitude_m};
}

GeoOrigin enu_to_geodetic(const GeoOrigin& origin, const Vec3& enu) {
  const double cos_lat = std::cos(origin.latitude_deg * kDegToRad);
  GeoOrigin out;
  out.latitude_deg = origin.latitude_deg + enu.y() / kEarthRadiusM / kDegToRad;
  out.longitude_deg = origin.longitude_deg + enu.x() / (kEarthRadiusM * cos_lat) / kDegToRad;
  out.altitude_m = origin.altitude_m + enu.z();
  return out;
}

AnisoAffine initial_alignment(const ColoredGeoCloud& aerial, const ColoredGeoCloud& ground,
                              double sanity_radius_m) {
  const Vec3 offset_enu = geodetic_to_enu(aerial.geo_origin, ground.geo_origin);
  if (!offset_enu.allFinite() || offset_enu.head<2>().norm() > sanity_radius_m) {
    std::ostringstream msg;
    msg << "geotag origins are " << offset_enu.head<2>().norm() << " m apart (sanity radius "
        << sanity_radius_m << " m)";
    throw Error(ErrorCode::kGeotagMismatch, msg.str());
  }
  // ground local -> ENU -> aerial local
  const Mat3 rotation = rotation_z(ground.heading_rad - aerial.heading_rad);
  const Vec3 translation = rotation_z(-aerial.heading_rad) * offset_enu;
  return AnisoAffine::rigid(rotation, translation);
}

}  // namespace fieldreg
