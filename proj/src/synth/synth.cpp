#include "fieldreg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "fieldreg/io.hpp"

namespace fieldreg {

void validate(const FieldSpec& s) {
  const auto fail = [](const std::string& msg) { throw Error(ErrorCode::kInvalidArgument, "field spec: " + msg); };
  if (!(s.extent_x > 0.0) || !(s.extent_y > 0.0)) fail("extent must be positive");
  if (!(s.row_spacing > 0.0) || !(s.plant_spacing > 0.0)) fail("spacings must be positive");
  if (s.extent_y < s.row_spacing || s.extent_x < s.plant_spacing) fail("extent is too small to contain one row");
  if (!(s.plant_radius > 0.0) || !(s.plant_height >= 0.0)) fail("plant radius must be positive, height >= 0");
  if (!(s.position_jitter >= 0.0) || !(s.size_jitter >= 0.0 && s.size_jitter < 1.0)) fail("jitter out of range");
  if (!(s.crop_exg_std >= 0.0) || !(s.soil_exg_std >= 0.0)) fail("ExG std must be >= 0");
  if (!(s.missing_plant_rate >= 0.0 && s.missing_plant_rate <= 1.0)) fail("missing_plant_rate must be in [0,1]");
  if (!(s.point_density_aerial > 0.0) || !(s.point_density_ground > 0.0)) fail("densities must be positive");
  if (!(s.noise_sigma >= 0.0)) fail("noise_sigma must be >= 0");
  if (!(s.ground_extent_x > 0.0 && s.ground_extent_x <= s.extent_x) ||
      !(s.ground_extent_y > 0.0 && s.ground_extent_y <= s.extent_y)) {
    fail("ground extent must be positive and fit inside the field");
  }
}

namespace {

struct SpecField {
  const char* key;
  double FieldSpec::*member;
};

constexpr SpecField kSpecFields[] = {
    {"extent_x", &FieldSpec::extent_x},
    {"extent_y", &FieldSpec::extent_y},
    {"row_spacing", &FieldSpec::row_spacing},
    {"plant_spacing", &FieldSpec::plant_spacing},
    {"plant_radius", &FieldSpec::plant_radius},
    {"plant_height", &FieldSpec::plant_height},
    {"position_jitter", &FieldSpec::position_jitter},
    {"size_jitter", &FieldSpec::size_jitter},
    {"crop_exg_mean", &FieldSpec::crop_exg_mean},
    {"crop_exg_std", &FieldSpec::crop_exg_std},
    {"soil_exg_mean", &FieldSpec::soil_exg_mean},
    {"soil_exg_std", &FieldSpec::soil_exg_std},
    {"missing_plant_rate", &FieldSpec::missing_plant_rate},
    {"point_density_aerial", &FieldSpec::point_density_aerial},
    {"point_density_ground", &FieldSpec::point_density_ground},
    {"noise_sigma", &FieldSpec::noise_sigma},
    {"ground_extent_x", &FieldSpec::ground_extent_x},
    {"ground_extent_y", &FieldSpec::ground_extent_y},
    {"heading_rad", &FieldSpec::heading_rad},
};

}  // namespace

FieldSpec parse_field_spec(const KeyValueFile& kv) {
  FieldSpec spec;
  for (const auto& [raw_key, value] : kv.ordered) {
    // Accept both bare keys and the `field.` prefix used in run configs.
    const std::string key = raw_key.rfind("field.", 0) == 0 ? raw_key.substr(6) : raw_key;
    bool known = false;
    for (const SpecField& f : kSpecFields) {
      if (key == f.key) {
        spec.*f.member = parse_double(value, raw_key);
        known = true;
        break;
      }
    }
    if (known) continue;
    if (key == "lat") {
      spec.origin.latitude_deg = parse_double(value, raw_key);
    } else if (key == "lon") {
      spec.origin.longitude_deg = parse_double(value, raw_key);
    } else if (key == "alt") {
      spec.origin.altitude_m = parse_double(value, raw_key);
    } else {
      throw Error(ErrorCode::kInvalidArgument, "unknown field spec key '" + raw_key + "'");
    }
  }
  validate(spec);
  return spec;
}

KeyValueFile to_key_value(const FieldSpec& spec) {
  KeyValueFile kv;
  const auto put = [&](const std::string& k, double v) {
    kv.ordered.emplace_back(k, format_double(v));
    kv.values[k] = kv.ordered.back().second;
  };
  for (const SpecField& f : kSpecFields) put(f.key, spec.*f.member);
  put("lat", spec.origin.latitude_deg);
  put("lon", spec.origin.longitude_deg);
  put("alt", spec.origin.altitude_m);
  return kv;
}

namespace {

// ExG -> normalized color with fixed red/blue per class.
GeoPoint colored(double x, double y, double z, double e, bool crop) {
  const double r = crop ? 0.25 : 0.5;
  const double b = crop ? 0.15 : 0.3;
  const double g = std::clamp(0.5 * (e + r + b), 0.0, 1.0);
  return {x, y, z, r, g, b};
}

// Canopy height of one plant at (x, y), or a negative value off the plant.
double cap_height(const Plant& p, double x, double y) {
  const double d2 = ((x - p.x) * (x - p.x) + (y - p.y) * (y - p.y)) / (p.radius * p.radius);
  return d2 < 1.0 ? p.height * std::sqrt(1.0 - d2) : -1.0;
}

// Highest canopy over (x, y); negative when over soil.
double canopy(const SyntheticField& f, double x, double y) {
  const FieldSpec& s = f.spec;
  const int reach_r = static_cast<int>(std::ceil((s.plant_radius * (1.0 + s.size_jitter) + s.position_jitter) / s.row_spacing));
  const int reach_c =
      static_cast<int>(std::ceil((s.plant_radius * (1.0 + s.size_jitter) + s.position_jitter) / s.plant_spacing));
  const int r0 = static_cast<int>(std::floor(y / s.row_spacing));
  const int c0 = static_cast<int>(std::floor(x / s.plant_spacing));
  double best = -1.0;
  for (int r = r0 - reach_r; r <= r0 + reach_r; ++r) {
    if (r < 0 || r >= f.rows) continue;
    for (int c = c0 - reach_c; c <= c0 + reach_c; ++c) {
      if (c < 0 || c >= f.cols) continue;
      const int id = f.slots[static_cast<std::size_t>(r) * f.cols + c];
      if (id < 0) continue;
      best = std::max(best, cap_height(f.plants[static_cast<std::size_t>(id)], x, y));
    }
  }
  return best;
}

// Samples `count` points uniformly over a rectangle of the field model.
std::vector<GeoPoint> sample_surface(const SyntheticField& f, double x0, double y0, double x1, double y1,
                                     std::size_t count, std::mt19937_64& rng) {
  const FieldSpec& s = f.spec;
  std::uniform_real_distribution<double> ux(x0, x1), uy(y0, y1);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<GeoPoint> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double x = ux(rng);
    const double y = uy(rng);
    const double h = canopy(f, x, y);
    const bool crop = h >= 0.0;
    const double z = std::max(h, 0.0) + s.noise_sigma * noise(rng);
    const double e = crop ? s.crop_exg_mean + s.crop_exg_std * noise(rng) : s.soil_exg_mean + s.soil_exg_std * noise(rng);
    out.push_back(colored(x, y, z, std::clamp(e, -2.0, 2.0), crop));
  }
  return out;
}

}  // namespace

SyntheticField generate_field(const FieldSpec& spec, std::uint64_t seed) {
  validate(spec);
  SyntheticField f;
  f.spec = spec;
  f.rows = static_cast<int>(std::floor(spec.extent_y / spec.row_spacing));
  f.cols = static_cast<int>(std::floor(spec.extent_x / spec.plant_spacing));
  f.slots.assign(static_cast<std::size_t>(f.rows) * f.cols, -1);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> keep(0.0, 1.0);
  for (int r = 0; r < f.rows; ++r) {
    for (int c = 0; c < f.cols; ++c) {
      // Draw every variate even for missing plants so the layout of the
      // remaining plants does not depend on the missing rate.
      const bool present = keep(rng) >= spec.missing_plant_rate;
      const double jx = spec.position_jitter * unit(rng);
      const double jy = spec.position_jitter * unit(rng);
      const double size = 1.0 + spec.size_jitter * unit(rng);
      if (!present) continue;
      f.slots[static_cast<std::size_t>(r) * f.cols + c] = static_cast<int>(f.plants.size());
      f.plants.push_back({(c + 0.5) * spec.plant_spacing + jx, (r + 0.5) * spec.row_spacing + jy,
                          spec.plant_radius * size, spec.plant_height * size});
    }
  }

  const auto count = static_cast<std::size_t>(std::llround(spec.point_density_aerial * spec.extent_x * spec.extent_y));
  f.cloud.points = sample_surface(f, 0.0, 0.0, spec.extent_x, spec.extent_y, std::max<std::size_t>(count, 1), rng);
  f.cloud.geo_origin = spec.origin;
  f.cloud.heading_rad = spec.heading_rad;
  return f;
}

double surface_height(const SyntheticField& field, double x, double y) { return std::max(canopy(field, x, y), 0.0); }

bool on_plant(const SyntheticField& field, double x, double y) { return canopy(field, x, y) >= 0.0; }

GroundView derive_ground_view(const SyntheticField& field, const PerturbationSpec& perturb, std::uint64_t seed) {
  const FieldSpec& s = field.spec;
  if (!(perturb.dt >= 0.0) || !(perturb.dpsi >= 0.0) || !(perturb.geotag_bias >= 0.0) ||
      !(perturb.ds.array() >= 0.0).all()) {
    throw Error(ErrorCode::kInvalidArgument, "perturbation magnitudes must be non-negative");
  }
  const double gx = s.ground_extent_x;
  const double gy = s.ground_extent_y;
  if (!(gx > 0.0 && gy > 0.0 && gx <= s.extent_x && gy <= s.extent_y)) {
    throw Error(ErrorCode::kInvalidArgument, "ground crop does not fit inside the field");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Keep the crop a little away from the field border when possible.
  const double pad_x = std::min(0.5, 0.5 * (s.extent_x - gx));
  const double pad_y = std::min(0.5, 0.5 * (s.extent_y - gy));
  const double cx = gx / 2 + pad_x + unit(rng) * (s.extent_x - gx - 2 * pad_x);
  const double cy = gy / 2 + pad_y + unit(rng) * (s.extent_y - gy - 2 * pad_y);
  const double yaw = (2.0 * unit(rng) - 1.0) * std::numbers::pi;
  const double psi_sign = unit(rng) < 0.5 ? -1.0 : 1.0;
  const double dir = 2.0 * std::numbers::pi * unit(rng);

  const auto count = static_cast<std::size_t>(std::llround(s.point_density_ground * gx * gy));
  const std::vector<GeoPoint> world =
      sample_surface(field, cx - gx / 2, cy - gy / 2, cx + gx / 2, cy + gy / 2, std::max<std::size_t>(count, 1), rng);
  if (world.empty()) throw Error(ErrorCode::kEmptyCloud, "ground crop is empty");

  GroundView view;
  view.crop_center = Vec2(cx, cy);
  const Vec3 scale = Vec3::Ones() + perturb.ds;
  view.truth = AnisoAffine(scale, rotation_z(yaw), Vec3(cx, cy, 0.0));
  view.cloud.points.reserve(world.size());
  for (const GeoPoint& p : world) {
    const Vec3 q = view.truth.apply_inverse(p.position());
    view.cloud.points.push_back({q.x(), q.y(), q.z(), p.r, p.g, p.b});
  }

  // Geotags: the rigid pose they imply is the truth, minus scale, plus the
  // heading and position errors.
  const Vec3 guess_t(cx + perturb.dt * std::cos(dir), cy + perturb.dt * std::sin(dir), perturb.geotag_bias);
  view.geotag_guess = AnisoAffine::rigid(rotation_z(yaw + psi_sign * perturb.dpsi), guess_t);
  view.cloud.heading_rad = field.cloud.heading_rad + yaw + psi_sign * perturb.dpsi;
  view.cloud.geo_origin = enu_to_geodetic(field.cloud.geo_origin, rotation_z(field.cloud.heading_rad) * guess_t);
  return view;
}

}  // namespace fieldreg
