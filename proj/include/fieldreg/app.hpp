#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fieldreg/keyvalue.hpp"
#include "fieldreg/metrics.hpp"
#include "fieldreg/registration.hpp"
#include "fieldreg/synth.hpp"

namespace fieldreg {

/// Every tunable of a run (alpha 1, beta 0.5, s 0.02 m, sigma_avg 0.04 m, t_f 1 by default).
struct RunConfig {
  PipelineParams pipeline;
  IcpParams icp;
  SuccessThresholds thresholds;
  FieldSpec field;
  std::uint64_t seed = 1;
};

/// Sets one dotted key (`flow.alpha`, `cpd.max_points`, `seed`, ...).
/// Throws kInvalidArgument naming an unknown key, kParse on a bad value.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);
void apply_settings(RunConfig& config, const KeyValueFile& kv);
RunConfig load_run_config(const std::filesystem::path& path);

/// Full flat dump, keys sorted.
KeyValueFile to_key_value(const RunConfig& config);

// Transform files ----------------------------------------------------------------

/// Row-major 4x4 as 16 space-separated numbers.
std::string format_matrix(const Mat4& m);
Mat4 parse_matrix(const std::string& text, const std::string& context);

void put_transform(KeyValueFile& kv, const std::string& prefix, const AnisoAffine& t);
AnisoAffine get_transform(const KeyValueFile& kv, const std::string& prefix);

/// Pipeline result as key=value text; the metrics block is present when
/// a truth transform is given.
KeyValueFile transform_report(const PipelineResult& result, const std::optional<AnisoAffine>& truth,
                              const SuccessThresholds& thresholds);
void write_key_value_file(const KeyValueFile& kv, const std::filesystem::path& path);
void write_text_file(const std::string& text, const std::filesystem::path& path);

/// Truth transform from a file written by `generate` (`truth.*` keys) or a
/// transform report (`final.*`).
AnisoAffine read_truth(const std::filesystem::path& path);

// Generation ---------------------------------------------------------------------

struct GenerateSpec {
  FieldSpec field;
  PerturbationSpec perturb;
};

GenerateSpec parse_generate_spec(const KeyValueFile& kv);

/// Writes aerial.{ply,meta}, ground.{ply,meta}, truth.txt and spec.txt.
void generate_pair(const GenerateSpec& spec, const std::filesystem::path& out_dir, std::uint64_t seed);

// Evaluation ---------------------------------------------------------------------

enum class Method { kFlowPipeline, kIcp, kCpd };

const char* method_name(Method m);
std::vector<Method> parse_methods(const std::string& csv);

struct Bucket {
  PerturbationSpec perturb;
};

struct Suite {
  std::vector<Bucket> buckets;
  int trials = 10;  // per bucket
  std::uint64_t seed = 1;
  FieldSpec field;
  KeyValueFile overrides;  // `config.*` keys applied to the run config
};

Suite parse_suite(const KeyValueFile& kv);
Suite load_suite(const std::filesystem::path& path);

struct TrialRow {
  int trial = 0;
  int bucket = 0;
  double dt_init = 0.0;
  double dpsi_init = 0.0;
  double ds_init = 0.0;
  double e_t = 0.0;
  double e_R = 0.0;
  double e_s = 0.0;
  bool success = false;
  Method method = Method::kFlowPipeline;
  std::string error;  // stage error message, empty on a completed run
};

/// Seed of trial `index` derived by counter from the suite seed.
std::uint64_t trial_seed(std::uint64_t master, std::uint64_t index);

/// Runs every (bucket, trial, method); rows come back sorted by trial then
/// method order, whatever the thread count.
std::vector<TrialRow> run_suite(const Suite& suite, const std::vector<Method>& methods, const RunConfig& config,
                                int threads);

/// Generates the pair of trial `trial_index` (bucket-major numbering) and
/// runs each method on it.
std::vector<TrialRow> run_trial(const Suite& suite, int trial_index, const std::vector<Method>& methods,
                                const RunConfig& config);

void write_sweep_csv(const std::vector<TrialRow>& rows, const std::filesystem::path& path);
std::string sweep_summary(const Suite& suite, const std::vector<TrialRow>& rows, const std::vector<Method>& methods);

/// FIELDREG_THREADS, default 1.
int thread_count_from_env();

}  // namespace fieldreg
