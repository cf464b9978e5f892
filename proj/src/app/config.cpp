#include <fstream>
#include <functional>
#include <type_traits>
#include <string>
#include <vector>

#include "fieldreg/app.hpp"

namespace fieldreg {

namespace {

struct Entry {
  std::string key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(RunConfig&)> get;
};

template <typename Ref>
Entry real(std::string key, Ref ref) {
  return {key, [ref, key](RunConfig& c, const std::string& v) { ref(c) = parse_double(v, key); },
          [ref](RunConfig& c) { return format_double(ref(c)); }};
}

template <typename Ref>
Entry integer(std::string key, Ref ref, long long min_value) {
  return {key,
          [ref, key, min_value](RunConfig& c, const std::string& v) {
            const long long x = parse_int(v, key);
            if (x < min_value) throw Error(ErrorCode::kInvalidArgument, key + " must be >= " + std::to_string(min_value));
            ref(c) = static_cast<std::remove_reference_t<decltype(ref(c))>>(x);
          },
          [ref](RunConfig& c) { return std::to_string(ref(c)); }};
}

template <typename Ref>
Entry boolean(std::string key, Ref ref) {
  return {key, [ref, key](RunConfig& c, const std::string& v) { ref(c) = parse_bool(v, key); },
          [ref](RunConfig& c) { return std::string(ref(c) ? "true" : "false"); }};
}

const char* model_name(PreliminaryModel m) {
  switch (m) {
    case PreliminaryModel::kFull3D: return "full3d";
    case PreliminaryModel::kPlanar: return "planar";
    case PreliminaryModel::kIsotropic: return "isotropic";
  }
  return "full3d";
}

PreliminaryModel parse_model(const std::string& v, const std::string& key) {
  if (v == "full3d") return PreliminaryModel::kFull3D;
  if (v == "planar") return PreliminaryModel::kPlanar;
  if (v == "isotropic") return PreliminaryModel::kIsotropic;
  throw Error(ErrorCode::kInvalidArgument, key + ": expected full3d, planar or isotropic, got '" + v + "'");
}

#define FR_REF(expr) [](RunConfig& c) -> auto& { return c.expr; }

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = [] {
    std::vector<Entry> t;
    t.push_back(real("grid.cell_size", FR_REF(pipeline.grid.cell_size)));
    t.push_back(real("grid.sigma_avg", FR_REF(pipeline.grid.sigma_avg)));
    t.push_back(integer("daisy.radius", FR_REF(pipeline.flow.daisy.radius), 3));
    t.push_back(integer("fpfh.radius_cells", FR_REF(pipeline.flow.fpfh_radius_cells), 2));
    t.push_back(real("flow.alpha", FR_REF(pipeline.flow.alpha)));
    t.push_back(real("flow.beta", FR_REF(pipeline.flow.beta)));
    t.push_back(integer("flow.seed_spacing", FR_REF(pipeline.flow.seed_spacing), 1));
    t.push_back(integer("flow.pyramid_levels", FR_REF(pipeline.flow.pyramid_levels), 1));
    t.push_back(real("flow.scale_factor", FR_REF(pipeline.flow.scale_factor)));
    t.push_back(integer("flow.iterations_per_level", FR_REF(pipeline.flow.iterations_per_level), 1));
    t.push_back(integer("flow.random_search_radius_init", FR_REF(pipeline.flow.random_search_radius_init), 1));
    t.push_back(integer("flow.refine_search_radius", FR_REF(pipeline.flow.refine_search_radius), 0));
    t.push_back(real("flow.forward_backward_tol", FR_REF(pipeline.flow.forward_backward_tol)));
    t.push_back(boolean("flow.forward_backward_check", FR_REF(pipeline.flow.forward_backward_check)));
    t.push_back(real("vote.bin_step", FR_REF(pipeline.vote.bin_step)));
    t.push_back(boolean("vote.include_neighbor_bins", FR_REF(pipeline.vote.include_neighbor_bins)));
    t.push_back(integer("preliminary.max_iterations", FR_REF(pipeline.preliminary.max_iterations), 1));
    t.push_back(real("preliminary.tolerance", FR_REF(pipeline.preliminary.tolerance)));
    t.push_back({"preliminary.model",
                 [](RunConfig& c, const std::string& v) {
                   c.pipeline.preliminary.model = parse_model(v, "preliminary.model");
                 },
                 [](RunConfig& c) { return std::string(model_name(c.pipeline.preliminary.model)); }});
    t.push_back({"veg.mode",
                 [](RunConfig& c, const std::string& v) {
                   if (v == "fixed") {
                     c.pipeline.veg.mode = VegFilterMode::kFixed;
                   } else if (v == "automatic") {
                     c.pipeline.veg.mode = VegFilterMode::kAutomatic;
                   } else {
                     throw Error(ErrorCode::kInvalidArgument, "veg.mode: expected fixed or automatic, got '" + v + "'");
                   }
                 },
                 [](RunConfig& c) {
                   return std::string(c.pipeline.veg.mode == VegFilterMode::kFixed ? "fixed" : "automatic");
                 }});
    t.push_back(real("veg.threshold", FR_REF(pipeline.veg.threshold)));
    t.push_back({"cpd.model",
                 [](RunConfig& c, const std::string& v) {
                   if (v == "affine") {
                     c.pipeline.cpd.model = CpdModel::kAffine;
                   } else if (v == "planar") {
                     c.pipeline.cpd.model = CpdModel::kPlanar;
                   } else {
                     throw Error(ErrorCode::kInvalidArgument, "cpd.model: expected affine or planar, got '" + v + "'");
                   }
                 },
                 [](RunConfig& c) {
                   return std::string(c.pipeline.cpd.model == CpdModel::kAffine ? "affine" : "planar");
                 }});
    t.push_back(real("cpd.initial_sigma2", FR_REF(pipeline.cpd.initial_sigma2)));
    t.push_back(real("cpd.outlier_weight", FR_REF(pipeline.cpd.outlier_weight)));
    t.push_back(integer("cpd.max_iterations", FR_REF(pipeline.cpd.max_iterations), 1));
    t.push_back(real("cpd.tolerance", FR_REF(pipeline.cpd.tolerance)));
    t.push_back(integer("cpd.max_points", FR_REF(pipeline.cpd.max_points), 0));
    t.push_back(integer("icp.max_iterations", FR_REF(icp.max_iterations), 1));
    t.push_back({"icp.model",
                 [](RunConfig& c, const std::string& v) { c.icp.model = parse_model(v, "icp.model"); },
                 [](RunConfig& c) { return std::string(model_name(c.icp.model)); }});
    t.push_back(real("icp.tolerance", FR_REF(icp.tolerance)));
    t.push_back(integer("icp.max_points", FR_REF(icp.max_points), 0));
    t.push_back(real("pipeline.coarse_bin_step", FR_REF(pipeline.coarse_bin_step)));
    t.push_back(real("pipeline.coarse_margin", FR_REF(pipeline.coarse_margin)));
    t.push_back(integer("pipeline.refine_passes", FR_REF(pipeline.refine_passes), 0));
    t.push_back(real("pipeline.refine_bin_step", FR_REF(pipeline.refine_bin_step)));
    t.push_back(integer("pipeline.refine_search_radius", FR_REF(pipeline.refine_search_radius), 1));
    t.push_back(real("pipeline.refine_margin", FR_REF(pipeline.refine_margin)));
    t.push_back(integer("pipeline.scale_hypotheses", FR_REF(pipeline.scale_hypotheses), 1));
    t.push_back(real("pipeline.scale_ratio", FR_REF(pipeline.scale_ratio)));
    t.push_back(real("pipeline.cpd_crop_radius", FR_REF(pipeline.cpd_crop_radius)));
    t.push_back(real("pipeline.baseline_crop_margin", FR_REF(pipeline.baseline_crop_margin)));
    t.push_back(real("pipeline.geotag_sanity_radius", FR_REF(pipeline.geotag_sanity_radius)));
    t.push_back(real("metrics.max_e_t", FR_REF(thresholds.max_e_t)));
    t.push_back(real("metrics.max_e_R", FR_REF(thresholds.max_e_R)));
    t.push_back(real("metrics.max_e_s", FR_REF(thresholds.max_e_s)));
    t.push_back({"metrics.scale_mode",
                 [](RunConfig& c, const std::string& v) {
                   if (v == "l2") {
                     c.thresholds.scale_mode = ScaleErrorMode::kL2;
                   } else if (v == "max") {
                     c.thresholds.scale_mode = ScaleErrorMode::kMaxAxis;
                   } else {
                     throw Error(ErrorCode::kInvalidArgument, "metrics.scale_mode: expected l2 or max, got '" + v + "'");
                   }
                 },
                 [](RunConfig& c) {
                   return std::string(c.thresholds.scale_mode == ScaleErrorMode::kL2 ? "l2" : "max");
                 }});
    t.push_back(integer("seed", FR_REF(seed), 0));
    return t;
  }();
  return table;
}

#undef FR_REF

void check(const RunConfig& c) {
  const auto fail = [](const std::string& msg) { throw Error(ErrorCode::kInvalidArgument, msg); };
  if (!(c.pipeline.grid.cell_size > 0.0)) fail("grid.cell_size must be positive");
  if (!(c.pipeline.grid.sigma_avg > 0.0)) fail("grid.sigma_avg must be positive");
  validate(c.pipeline.flow);
  if (!(c.pipeline.vote.bin_step > 0.0)) fail("vote.bin_step must be positive");
  if (!(c.pipeline.cpd.outlier_weight >= 0.0 && c.pipeline.cpd.outlier_weight < 1.0)) {
    fail("cpd.outlier_weight must lie in [0, 1)");
  }
  if (!(c.pipeline.cpd.tolerance > 0.0)) fail("cpd.tolerance must be positive");
  if (!(c.pipeline.scale_ratio > 1.0)) fail("pipeline.scale_ratio must exceed 1");
  if (!(c.pipeline.cpd_crop_radius > 0.0)) fail("pipeline.cpd_crop_radius must be positive");
  if (!(c.thresholds.max_e_t > 0.0 && c.thresholds.max_e_R > 0.0 && c.thresholds.max_e_s > 0.0)) {
    fail("metrics thresholds must be positive");
  }
}

}  // namespace

void apply_setting(RunConfig& config, const std::string& key, const std::string& value) {
  if (key.rfind("field.", 0) == 0) {
    KeyValueFile kv = to_key_value(config.field);
    kv.ordered.clear();
    for (const auto& [k, v] : kv.values) kv.ordered.emplace_back(k, v);
    kv.ordered.emplace_back(key.substr(6), value);
    config.field = parse_field_spec(kv);
    return;
  }
  for (const Entry& e : entries()) {
    if (e.key == key) {
      RunConfig next = config;
      e.set(next, value);
      check(next);
      config = next;
      config.pipeline.seed = config.seed;
      config.pipeline.cpd.seed = config.seed;
      config.icp.seed = config.seed;
      return;
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown configuration key '" + key + "'");
}

void apply_settings(RunConfig& config, const KeyValueFile& kv) {
  for (const auto& [k, v] : kv.ordered) apply_setting(config, k, v);
}

RunConfig load_run_config(const std::filesystem::path& path) {
  RunConfig config;
  apply_settings(config, read_key_value_file(path));
  return config;
}

KeyValueFile to_key_value(const RunConfig& config) {
  KeyValueFile kv;
  RunConfig copy = config;
  for (const Entry& e : entries()) kv.values[e.key] = e.get(copy);
  for (const auto& [k, v] : to_key_value(config.field).values) kv.values["field." + k] = v;
  for (const auto& [k, v] : kv.values) kv.ordered.emplace_back(k, v);
  return kv;
}

void write_key_value_file(const KeyValueFile& kv, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  for (const auto& [k, v] : kv.ordered) out << k << '=' << v << '\n';
  if (!out) throw Error(ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

void write_text_file(const std::string& text, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

}  // namespace fieldreg
