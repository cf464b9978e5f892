// Command-line front end. Talks to the library only through the C API.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "fieldreg/fieldreg.h"

namespace {

struct ConfigHandle {
  fr_config* ptr = nullptr;
  ~ConfigHandle() { fr_config_destroy(ptr); }
};

struct CloudHandle {
  fr_cloud* ptr = nullptr;
  ~CloudHandle() { fr_cloud_destroy(ptr); }
};

struct ResultHandle {
  fr_result* ptr = nullptr;
  ~ResultHandle() { fr_result_destroy(ptr); }
};

int report(fr_status status) {
  if (status != FR_OK) std::cerr << "fieldreg: " << fr_last_error() << '\n';
  return static_cast<int>(status);
}

// --config first, then --seed, then --set in order given.
fr_status build_config(ConfigHandle& config, const std::string& path, const std::vector<std::string>& sets,
                       const std::string& seed) {
  fr_status s = fr_config_create(&config.ptr);
  if (s != FR_OK) return s;
  if (!path.empty() && (s = fr_config_load(config.ptr, path.c_str())) != FR_OK) return s;
  if (!seed.empty() && (s = fr_config_set(config.ptr, "seed", seed.c_str())) != FR_OK) return s;
  for (const std::string& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::cerr << "fieldreg: --set expects key=value, got '" << kv << "'\n";
      return FR_ERR_INPUT;
    }
    const std::string key = kv.substr(0, eq);
    const std::string value = kv.substr(eq + 1);
    if ((s = fr_config_set(config.ptr, key.c_str(), value.c_str())) != FR_OK) return s;
  }
  return FR_OK;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Register ground-robot point-cloud maps into aerial crop-field maps"};
  app.set_version_flag("--version", std::string(fr_version()));
  app.require_subcommand(1);

  std::string aerial, ground, out, config_path, dump_flow, dump_corr, truth, seed;
  std::vector<std::string> sets;
  CLI::App* reg = app.add_subcommand("register", "Estimate the ground-to-aerial affine");
  reg->add_option("--aerial", aerial, "Aerial map (.ply with .meta sidecar)")->required();
  reg->add_option("--ground", ground, "Ground map (.ply with .meta sidecar)")->required();
  reg->add_option("--out", out, "Transform output file")->required();
  reg->add_option("--config", config_path, "key=value configuration file");
  reg->add_option("--dump-flow", dump_flow, "Write the surviving seed flows as CSV");
  reg->add_option("--dump-corr", dump_corr, "Write the 3D correspondences as CSV");
  reg->add_option("--truth", truth, "Truth transform file; adds a metrics block to the output");
  reg->add_option("--set", sets, "Override one setting, key=value (repeatable)");
  reg->add_option("--seed", seed, "RNG seed");

  std::string spec, out_dir;
  std::string gen_seed = "1";
  CLI::App* gen = app.add_subcommand("generate", "Write a synthetic aerial/ground pair");
  gen->add_option("--spec", spec, "Field and perturbation spec (key=value)")->required();
  gen->add_option("--out-dir", out_dir, "Output directory")->required();
  gen->add_option("--seed", gen_seed, "RNG seed");

  std::string suite, methods = "agricolmap,icp,cpd", csv;
  int trials = 0, threads = 0;
  CLI::App* eval = app.add_subcommand("evaluate", "Run a perturbation sweep");
  eval->add_option("--suite", suite, "Suite file (key=value)")->required();
  eval->add_option("--methods", methods, "Comma-separated: agricolmap, icp, cpd");
  eval->add_option("--trials", trials, "Trials per bucket, overrides the suite");
  eval->add_option("--out", csv, "Per-trial CSV")->required();
  eval->add_option("--config", config_path, "key=value configuration file");
  eval->add_option("--set", sets, "Override one setting, key=value (repeatable)");
  eval->add_option("--threads", threads, "Worker threads; default FIELDREG_THREADS or 1");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(FR_ERR_INPUT);
  }

  if (*reg) {
    ConfigHandle config;
    if (fr_status s = build_config(config, config_path, sets, seed); s != FR_OK) return report(s);
    CloudHandle a, g;
    if (fr_status s = fr_cloud_load(aerial.c_str(), &a.ptr); s != FR_OK) return report(s);
    if (fr_status s = fr_cloud_load(ground.c_str(), &g.ptr); s != FR_OK) return report(s);
    ResultHandle result;
    if (fr_status s = fr_register(config.ptr, a.ptr, g.ptr, &result.ptr); s != FR_OK) return report(s);
    if (!truth.empty()) {
      if (fr_status s = fr_result_set_truth(result.ptr, truth.c_str()); s != FR_OK) return report(s);
    }
    if (fr_status s = fr_result_write(result.ptr, out.c_str()); s != FR_OK) return report(s);
    if (!dump_flow.empty()) {
      if (fr_status s = fr_result_dump_flow(result.ptr, dump_flow.c_str()); s != FR_OK) return report(s);
    }
    if (!dump_corr.empty()) {
      if (fr_status s = fr_result_dump_correspondences(result.ptr, dump_corr.c_str()); s != FR_OK) return report(s);
    }
    return 0;
  }

  if (*gen) {
    unsigned long long seed_value = 0;
    try {
      std::size_t used = 0;
      seed_value = std::stoull(gen_seed, &used);
      if (used != gen_seed.size()) throw std::invalid_argument(gen_seed);
    } catch (const std::exception&) {
      std::cerr << "fieldreg: --seed must be a non-negative integer, got '" << gen_seed << "'\n";
      return FR_ERR_INPUT;
    }
    return report(fr_generate(spec.c_str(), out_dir.c_str(), seed_value));
  }

  ConfigHandle config;
  if (fr_status s = build_config(config, config_path, sets, ""); s != FR_OK) return report(s);
  if (fr_status s = fr_evaluate(config.ptr, suite.c_str(), methods.c_str(), trials, threads, csv.c_str()); s != FR_OK) {
    return report(s);
  }
  std::filesystem::path summary(csv);
  summary.replace_filename(summary.stem().string() + ".summary.csv");
  std::ifstream in(summary);
  std::cout << in.rdbuf();
  return 0;
}
