#include <filesystem>
#include <string>

#include "fieldreg/app.hpp"
#include "fieldreg/io.hpp"

namespace fieldreg {

GenerateSpec parse_generate_spec(const KeyValueFile& kv) {
  GenerateSpec spec;
  KeyValueFile field_kv;
  for (const auto& [key, value] : kv.ordered) {
    if (key == "perturb.dt") {
      spec.perturb.dt = parse_double(value, key);
    } else if (key == "perturb.dpsi") {
      spec.perturb.dpsi = parse_double(value, key);
    } else if (key == "perturb.ds") {
      const double ds = parse_double(value, key);
      spec.perturb.ds = Vec3(ds, ds, 0.0);
    } else if (key == "perturb.ds_x") {
      spec.perturb.ds.x() = parse_double(value, key);
    } else if (key == "perturb.ds_y") {
      spec.perturb.ds.y() = parse_double(value, key);
    } else if (key == "perturb.ds_z") {
      spec.perturb.ds.z() = parse_double(value, key);
    } else if (key == "perturb.geotag_bias") {
      spec.perturb.geotag_bias = parse_double(value, key);
    } else if (key == "seed") {
      continue;  // provenance files carry the seed they were made with
    } else if (key.rfind("perturb.", 0) == 0) {
      throw Error(ErrorCode::kInvalidArgument, "unknown perturbation key '" + key + "'");
    } else {
      field_kv.ordered.emplace_back(key, value);
      field_kv.values[key] = value;
    }
  }
  spec.field = parse_field_spec(field_kv);
  if (!(spec.perturb.dt >= 0.0) || !(spec.perturb.dpsi >= 0.0) || !(spec.perturb.geotag_bias >= 0.0) ||
      !(spec.perturb.ds.array() >= 0.0).all()) {
    throw Error(ErrorCode::kInvalidArgument, "perturbation magnitudes must be non-negative");
  }
  return spec;
}

void generate_pair(const GenerateSpec& spec, const std::filesystem::path& out_dir, std::uint64_t seed) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create '" + out_dir.string() + "': " + ec.message());

  const SyntheticField field = generate_field(spec.field, trial_seed(seed, 0));
  const GroundView view = derive_ground_view(field, spec.perturb, trial_seed(seed, 1));
  save_cloud(field.cloud, CloudFileBundle::from_geometry(out_dir / "aerial.ply"));
  save_cloud(view.cloud, CloudFileBundle::from_geometry(out_dir / "ground.ply"));

  KeyValueFile truth;
  put_transform(truth, "truth", view.truth);
  truth.ordered.emplace_back("truth.matrix", format_matrix(view.truth.matrix()));
  put_transform(truth, "geotag_guess", view.geotag_guess);
  write_key_value_file(truth, out_dir / "truth.txt");

  KeyValueFile provenance = to_key_value(spec.field);
  provenance.ordered.emplace_back("perturb.dt", format_double(spec.perturb.dt));
  provenance.ordered.emplace_back("perturb.dpsi", format_double(spec.perturb.dpsi));
  provenance.ordered.emplace_back("perturb.ds_x", format_double(spec.perturb.ds.x()));
  provenance.ordered.emplace_back("perturb.ds_y", format_double(spec.perturb.ds.y()));
  provenance.ordered.emplace_back("perturb.ds_z", format_double(spec.perturb.ds.z()));
  provenance.ordered.emplace_back("perturb.geotag_bias", format_double(spec.perturb.geotag_bias));
  provenance.ordered.emplace_back("seed", std::to_string(seed));
  write_key_value_file(provenance, out_dir / "spec.txt");
}

}  // namespace fieldreg
