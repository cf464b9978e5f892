#pragma once

#include <cstdint>
#include <vector>

#include "fieldreg/keyvalue.hpp"
#include "fieldreg/types.hpp"

namespace fieldreg {

struct FieldSpec {
  double extent_x = 10.0;  // meters
  double extent_y = 10.0;
  double row_spacing = 0.5;    // rows run along x
  double plant_spacing = 0.25; // along a row
  double plant_radius = 0.1;
  double plant_height = 0.15;
  double position_jitter = 0.03;  // meters, uniform
  double size_jitter = 0.2;       // relative, uniform
  double crop_exg_mean = 0.6;
  double crop_exg_std = 0.1;
  double soil_exg_mean = -0.05;
  double soil_exg_std = 0.05;
  double missing_plant_rate = 0.2;
  double point_density_aerial = 1500.0;  // points / m^2
  double point_density_ground = 6000.0;
  double noise_sigma = 0.005;  // meters, vertical
  double ground_extent_x = 3.0;  // crop seen by the ground robot
  double ground_extent_y = 3.0;
  GeoOrigin origin{45.0, 7.6, 250.0};
  double heading_rad = 0.0;
};

/// Throws kInvalidArgument when the spec breaks its invariants or cannot
/// hold a single row.
void validate(const FieldSpec& spec);

FieldSpec parse_field_spec(const KeyValueFile& kv);
KeyValueFile to_key_value(const FieldSpec& spec);

struct Plant {
  double x = 0.0;
  double y = 0.0;
  double radius = 0.0;
  double height = 0.0;
};

struct SyntheticField {
  FieldSpec spec;
  ColoredGeoCloud cloud;  // aerial view
  std::vector<Plant> plants;
  // Lattice slot (row * cols + col) -> index into plants or -1.
  std::vector<int> slots;
  int rows = 0;
  int cols = 0;
};

/// Soil plane plus spheroidal plant caps on a row lattice, sampled from
/// above at the aerial density. Deterministic in `seed`.
SyntheticField generate_field(const FieldSpec& spec, std::uint64_t seed);

/// Noise-free surface height of the model at (x, y).
double surface_height(const SyntheticField& field, double x, double y);
/// True if (x, y) lies on a plant canopy.
bool on_plant(const SyntheticField& field, double x, double y);

struct PerturbationSpec {
  double dt = 0.0;    // meters, planar geotag translation error
  double dpsi = 0.0;  // radians, heading error (random sign)
  Vec3 ds = Vec3::Zero();  // per-axis scale error of the ground map
  double geotag_bias = 0.0;  // meters, altitude error
};

struct GroundView {
  ColoredGeoCloud cloud;
  /// Maps ground-local coordinates onto the aerial frame.
  AnisoAffine truth;
  /// What the ground geotags alone imply.
  AnisoAffine geotag_guess;
  Vec2 crop_center = Vec2::Zero();
};

/// Crops a ground-sized rectangle, resamples it at ground density, expresses
/// it in a ground frame centered on the crop with random yaw and scale
/// 1/(1 + ds), and writes geotags that are off by the perturbation.
GroundView derive_ground_view(const SyntheticField& field, const PerturbationSpec& perturb, std::uint64_t seed);

}  // namespace fieldreg
