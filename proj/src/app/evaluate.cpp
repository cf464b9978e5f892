#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <thread>

#include "fieldreg/app.hpp"

namespace fieldreg {

const char* method_name(Method m) {
  switch (m) {
    case Method::kFlowPipeline: return "agricolmap";
    case Method::kIcp: return "icp";
    case Method::kCpd: return "cpd";
  }
  return "unknown";
}

std::vector<Method> parse_methods(const std::string& csv) {
  std::vector<Method> out;
  for (const std::string& name : split(csv, ',')) {
    Method m;
    if (name == "agricolmap" || name == "flow") {
      m = Method::kFlowPipeline;
    } else if (name == "icp") {
      m = Method::kIcp;
    } else if (name == "cpd") {
      m = Method::kCpd;
    } else {
      throw Error(ErrorCode::kInvalidArgument, "unknown method '" + name + "' (expected agricolmap, icp or cpd)");
    }
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  }
  if (out.empty()) throw Error(ErrorCode::kInvalidArgument, "no method given");
  return out;
}

Suite parse_suite(const KeyValueFile& kv) {
  Suite suite;
  std::map<int, Bucket> buckets;
  KeyValueFile field_kv;
  for (const auto& [key, value] : kv.ordered) {
    if (key == "trials") {
      const long long t = parse_int(value, key);
      if (t < 1) throw Error(ErrorCode::kInvalidArgument, "trials must be >= 1");
      suite.trials = static_cast<int>(t);
    } else if (key == "seed") {
      suite.seed = static_cast<std::uint64_t>(parse_int(value, key));
    } else if (key == "name") {
      continue;
    } else if (key.rfind("field.", 0) == 0) {
      field_kv.ordered.emplace_back(key, value);
    } else if (key.rfind("config.", 0) == 0) {
      suite.overrides.ordered.emplace_back(key.substr(7), value);
      suite.overrides.values[key.substr(7)] = value;
    } else if (key.rfind("bucket.", 0) == 0) {
      const std::vector<std::string> parts = split(key, '.');
      if (parts.size() != 3) throw Error(ErrorCode::kParse, "bucket keys look like bucket.<n>.<name>, got '" + key + "'");
      const long long index = parse_int(parts[1], key);
      if (index < 0) throw Error(ErrorCode::kInvalidArgument, "bucket index must be >= 0");
      PerturbationSpec& p = buckets[static_cast<int>(index)].perturb;
      const double v = parse_double(value, key);
      if (!(v >= 0.0)) throw Error(ErrorCode::kInvalidArgument, key + " must be >= 0");
      const std::string& name = parts[2];
      if (name == "dt") {
        p.dt = v;
      } else if (name == "dpsi") {
        p.dpsi = v;
      } else if (name == "dpsi_deg") {
        p.dpsi = v * std::numbers::pi / 180.0;
      } else if (name == "ds") {
        p.ds = Vec3(v, v, 0.0);
      } else if (name == "ds_x") {
        p.ds.x() = v;
      } else if (name == "ds_y") {
        p.ds.y() = v;
      } else if (name == "ds_z") {
        p.ds.z() = v;
      } else if (name == "geotag_bias") {
        p.geotag_bias = v;
      } else {
        throw Error(ErrorCode::kInvalidArgument, "unknown bucket key '" + key + "'");
      }
    } else {
      throw Error(ErrorCode::kInvalidArgument, "unknown suite key '" + key + "'");
    }
  }
  suite.field = parse_field_spec(field_kv);
  for (auto& [index, bucket] : buckets) suite.buckets.push_back(bucket);
  if (suite.buckets.empty()) throw Error(ErrorCode::kSchema, "suite defines no bucket");
  return suite;
}

Suite load_suite(const std::filesystem::path& path) { return parse_suite(read_key_value_file(path)); }

std::uint64_t trial_seed(std::uint64_t master, std::uint64_t index) {
  // splitmix64 over the counter
  std::uint64_t z = master + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::vector<TrialRow> run_trial(const Suite& suite, int trial_index, const std::vector<Method>& methods,
                                const RunConfig& config) {
  const int bucket = trial_index / suite.trials;
  const PerturbationSpec& perturb = suite.buckets.at(static_cast<std::size_t>(bucket)).perturb;
  const std::uint64_t seed = trial_seed(suite.seed, static_cast<std::uint64_t>(trial_index));
  const SyntheticField field = generate_field(suite.field, trial_seed(seed, 0));
  const GroundView view = derive_ground_view(field, perturb, trial_seed(seed, 1));

  RunConfig cfg = config;
  cfg.pipeline.seed = seed;
  cfg.pipeline.cpd.seed = seed;
  cfg.icp.seed = seed;

  std::vector<TrialRow> rows;
  for (Method m : methods) {
    TrialRow row;
    row.trial = trial_index;
    row.bucket = bucket;
    row.dt_init = perturb.dt;
    row.dpsi_init = perturb.dpsi;
    row.ds_init = perturb.ds.head<2>().maxCoeff();
    row.method = m;
    try {
      AnisoAffine estimate;
      switch (m) {
        case Method::kFlowPipeline:
          estimate = register_maps(field.cloud, view.cloud, cfg.pipeline).decomposition.transform;
          break;
        case Method::kIcp:
          estimate = register_icp(field.cloud, view.cloud, cfg.pipeline, cfg.icp).transform;
          break;
        case Method::kCpd:
          estimate = decompose(register_cpd_only(field.cloud, view.cloud, cfg.pipeline).affine).transform;
          break;
      }
      const ErrorMetrics e = compare(estimate, view.truth, cfg.thresholds.scale_mode);
      row.e_t = e.e_t;
      row.e_R = e.e_R;
      row.e_s = e.e_s;
      row.success = classify(e, cfg.thresholds);
    } catch (const Error& e) {
      if (e.stage().empty()) throw;  // not a registration failure
      row.e_t = row.e_R = row.e_s = std::numeric_limits<double>::quiet_NaN();
      row.success = false;
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<TrialRow> run_suite(const Suite& suite, const std::vector<Method>& methods, const RunConfig& config,
                                int threads) {
  RunConfig cfg = config;
  apply_settings(cfg, suite.overrides);
  const int total = suite.trials * static_cast<int>(suite.buckets.size());
  std::vector<std::vector<TrialRow>> per_trial(static_cast<std::size_t>(total));
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(std::max(1, threads)));

  const auto worker = [&](std::size_t slot) {
    try {
      for (int i = next++; i < total; i = next++) per_trial[static_cast<std::size_t>(i)] = run_trial(suite, i, methods, cfg);
    } catch (...) {
      errors[slot] = std::current_exception();
      next = total;
    }
  };
  if (threads <= 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker, static_cast<std::size_t>(t));
    for (std::thread& th : pool) th.join();
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<TrialRow> rows;
  for (auto& trial : per_trial) {
    for (auto& row : trial) rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

std::string csv_number(double v) { return std::isnan(v) ? "nan" : format_double(v); }

}  // namespace

void write_sweep_csv(const std::vector<TrialRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  out << "trial,dt_init,dpsi_init,ds_init,e_t,e_R,e_s,success,method\n";
  for (const TrialRow& r : rows) {
    out << r.trial << ',' << csv_number(r.dt_init) << ',' << csv_number(r.dpsi_init) << ',' << csv_number(r.ds_init)
        << ',' << csv_number(r.e_t) << ',' << csv_number(r.e_R) << ',' << csv_number(r.e_s) << ','
        << (r.success ? 1 : 0) << ',' << method_name(r.method) << '\n';
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

std::string sweep_summary(const Suite& suite, const std::vector<TrialRow>& rows, const std::vector<Method>& methods) {
  std::ostringstream out;
  out << "bucket,dt,dpsi,ds,method,successes,trials,rate\n";
  for (std::size_t b = 0; b < suite.buckets.size(); ++b) {
    const PerturbationSpec& p = suite.buckets[b].perturb;
    for (Method m : methods) {
      int ok = 0, n = 0;
      for (const TrialRow& r : rows) {
        if (r.bucket != static_cast<int>(b) || r.method != m) continue;
        ++n;
        ok += r.success ? 1 : 0;
      }
      char rate[32];
      std::snprintf(rate, sizeof(rate), "%.4f", n > 0 ? static_cast<double>(ok) / n : 0.0);
      out << b << ',' << format_double(p.dt) << ',' << format_double(p.dpsi) << ','
          << format_double(p.ds.head<2>().maxCoeff()) << ',' << method_name(m) << ',' << ok << ',' << n << ',' << rate
          << '\n';
    }
  }
  return out.str();
}

int thread_count_from_env() {
  const char* v = std::getenv("FIELDREG_THREADS");
  if (!v || !*v) return 1;
  const long long n = parse_int(v, "FIELDREG_THREADS");
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "FIELDREG_THREADS must be >= 1");
  return static_cast<int>(std::min<long long>(n, 256));
}

}  // namespace fieldreg
