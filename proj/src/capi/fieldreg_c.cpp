#include "fieldreg/fieldreg.h"

#include <exception>
#include <memory>
#include <filesystem>
#include <optional>
#include <string>

#include "fieldreg/app.hpp"
#include "fieldreg/correspond.hpp"
#include "fieldreg/io.hpp"

struct fr_config {
  fieldreg::RunConfig value;
};

struct fr_cloud {
  fieldreg::ColoredGeoCloud value;
};

struct fr_result {
  fieldreg::PipelineResult value;
  std::optional<fieldreg::AnisoAffine> truth;
  fieldreg::SuccessThresholds thresholds;
};

namespace {

thread_local std::string last_error;

fr_status fail(fr_status status, const std::string& message) {
  last_error = message;
  return status;
}

template <typename F>
fr_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return FR_OK;
  } catch (const fieldreg::Error& e) {
    return fail(static_cast<fr_status>(fieldreg::exit_code(e.code())),
                std::string(fieldreg::to_string(e.code())) + ": " + e.what());
  } catch (const std::bad_alloc&) {
    return fail(FR_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(FR_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(FR_ERR_INTERNAL, "unknown exception");
  }
}

fr_status null_arg(const char* name) { return fail(FR_ERR_INPUT, std::string("null argument: ") + name); }

}  // namespace

extern "C" {

const char* fr_version(void) { return "0.1.0"; }

const char* fr_last_error(void) { return last_error.c_str(); }

fr_status fr_config_create(fr_config** out) {
  if (!out) return null_arg("out");
  return guarded([&] { *out = new fr_config(); });
}

fr_status fr_config_load(fr_config* config, const char* path) {
  if (!config) return null_arg("config");
  if (!path) return null_arg("path");
  return guarded([&] {
    fieldreg::RunConfig next = config->value;
    fieldreg::apply_settings(next, fieldreg::read_key_value_file(path));
    config->value = next;
  });
}

fr_status fr_config_set(fr_config* config, const char* key, const char* value) {
  if (!config) return null_arg("config");
  if (!key) return null_arg("key");
  if (!value) return null_arg("value");
  return guarded([&] { fieldreg::apply_setting(config->value, key, value); });
}

fr_status fr_config_write(const fr_config* config, const char* path) {
  if (!config) return null_arg("config");
  if (!path) return null_arg("path");
  return guarded([&] { fieldreg::write_key_value_file(fieldreg::to_key_value(config->value), path); });
}

void fr_config_destroy(fr_config* config) { delete config; }

fr_status fr_cloud_load(const char* path, fr_cloud** out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  return guarded([&] {
    auto cloud = std::make_unique<fr_cloud>();
    cloud->value = fieldreg::load_cloud(fieldreg::CloudFileBundle::from_geometry(path));
    *out = cloud.release();
  });
}

fr_status fr_cloud_save(const fr_cloud* cloud, const char* path) {
  if (!cloud) return null_arg("cloud");
  if (!path) return null_arg("path");
  return guarded([&] { fieldreg::save_cloud(cloud->value, fieldreg::CloudFileBundle::from_geometry(path)); });
}

size_t fr_cloud_size(const fr_cloud* cloud) { return cloud ? cloud->value.points.size() : 0; }

void fr_cloud_destroy(fr_cloud* cloud) { delete cloud; }

fr_status fr_register(const fr_config* config, const fr_cloud* aerial, const fr_cloud* ground, fr_result** out) {
  if (!aerial) return null_arg("aerial");
  if (!ground) return null_arg("ground");
  if (!out) return null_arg("out");
  return guarded([&] {
    const fieldreg::RunConfig defaults;
    const fieldreg::RunConfig& cfg = config ? config->value : defaults;
    auto result = std::make_unique<fr_result>();
    result->value = fieldreg::register_maps(aerial->value, ground->value, cfg.pipeline);
    result->thresholds = cfg.thresholds;
    *out = result.release();
  });
}

fr_status fr_result_matrix(const fr_result* result, double out[16]) {
  if (!result) return null_arg("result");
  if (!out) return null_arg("out");
  for (int i = 0; i < 16; ++i) out[i] = result->value.refined(i / 4, i % 4);
  last_error.clear();
  return FR_OK;
}

fr_status fr_result_set_truth(fr_result* result, const char* path) {
  if (!result) return null_arg("result");
  if (!path) return null_arg("path");
  return guarded([&] { result->truth = fieldreg::read_truth(path); });
}

fr_status fr_result_write(const fr_result* result, const char* path) {
  if (!result) return null_arg("result");
  if (!path) return null_arg("path");
  return guarded([&] {
    fieldreg::write_key_value_file(fieldreg::transform_report(result->value, result->truth, result->thresholds), path);
  });
}

fr_status fr_result_dump_flow(const fr_result* result, const char* path) {
  if (!result) return null_arg("result");
  if (!path) return null_arg("path");
  return guarded([&] { fieldreg::write_flow_csv(result->value.flow, path); });
}

fr_status fr_result_dump_correspondences(const fr_result* result, const char* path) {
  if (!result) return null_arg("result");
  if (!path) return null_arg("path");
  return guarded([&] { fieldreg::write_correspondences_csv(result->value.correspondences, path); });
}

void fr_result_destroy(fr_result* result) { delete result; }

fr_status fr_generate(const char* spec_path, const char* out_dir, uint64_t seed) {
  if (!spec_path) return null_arg("spec_path");
  if (!out_dir) return null_arg("out_dir");
  return guarded([&] {
    const fieldreg::GenerateSpec spec = fieldreg::parse_generate_spec(fieldreg::read_key_value_file(spec_path));
    fieldreg::generate_pair(spec, out_dir, seed);
  });
}

fr_status fr_evaluate(const fr_config* config, const char* suite_path, const char* methods, int trials, int threads,
                      const char* csv_path) {
  if (!suite_path) return null_arg("suite_path");
  if (!methods) return null_arg("methods");
  if (!csv_path) return null_arg("csv_path");
  return guarded([&] {
    const fieldreg::RunConfig defaults;
    const fieldreg::RunConfig& cfg = config ? config->value : defaults;
    const std::vector<fieldreg::Method> list = fieldreg::parse_methods(methods);
    fieldreg::Suite suite = fieldreg::load_suite(suite_path);
    if (trials > 0) suite.trials = trials;
    const int n_threads = threads > 0 ? threads : fieldreg::thread_count_from_env();
    const std::vector<fieldreg::TrialRow> rows = fieldreg::run_suite(suite, list, cfg, n_threads);
    const std::filesystem::path csv(csv_path);
    fieldreg::write_sweep_csv(rows, csv);
    std::filesystem::path summary = csv;
    summary.replace_filename(csv.stem().string() + ".summary.csv");
    fieldreg::write_text_file(fieldreg::sweep_summary(suite, rows, list), summary);
  });
}

}  // extern "C"
