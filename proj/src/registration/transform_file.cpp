#include <sstream>
#include <string>

#include "fieldreg/app.hpp"

namespace fieldreg {

namespace {

void put(KeyValueFile& kv, const std::string& key, const std::string& value) {
  kv.ordered.emplace_back(key, value);
  kv.values[key] = value;
}

template <typename Derived>
std::string join(const Eigen::DenseBase<Derived>& m) {
  std::string out;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (!out.empty()) out += ' ';
      out += format_double(m(r, c));
    }
  }
  return out;
}

std::vector<double> numbers(const std::string& text, std::size_t count, const std::string& context) {
  std::istringstream in(text);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(parse_double(tok, context));
  if (out.size() != count) {
    throw Error(ErrorCode::kParse, context + ": expected " + std::to_string(count) + " numbers, got " +
                                       std::to_string(out.size()));
  }
  return out;
}

const std::string& require(const KeyValueFile& kv, const std::string& key) {
  const auto it = kv.values.find(key);
  if (it == kv.values.end()) throw Error(ErrorCode::kSchema, "missing key '" + key + "'");
  return it->second;
}

}  // namespace

std::string format_matrix(const Mat4& m) { return join(m); }

Mat4 parse_matrix(const std::string& text, const std::string& context) {
  const std::vector<double> v = numbers(text, 16, context);
  Mat4 m;
  for (int i = 0; i < 16; ++i) m(i / 4, i % 4) = v[static_cast<std::size_t>(i)];
  return m;
}

void put_transform(KeyValueFile& kv, const std::string& prefix, const AnisoAffine& t) {
  put(kv, prefix + ".scale", join(t.scale().transpose()));
  put(kv, prefix + ".rotation", join(t.rotation()));
  put(kv, prefix + ".translation", join(t.translation().transpose()));
}

AnisoAffine get_transform(const KeyValueFile& kv, const std::string& prefix) {
  const std::vector<double> s = numbers(require(kv, prefix + ".scale"), 3, prefix + ".scale");
  const std::vector<double> r = numbers(require(kv, prefix + ".rotation"), 9, prefix + ".rotation");
  const std::vector<double> t = numbers(require(kv, prefix + ".translation"), 3, prefix + ".translation");
  Mat3 rot;
  for (int i = 0; i < 9; ++i) rot(i / 3, i % 3) = r[static_cast<std::size_t>(i)];
  return AnisoAffine(Vec3(s[0], s[1], s[2]), rot, Vec3(t[0], t[1], t[2]));
}

KeyValueFile transform_report(const PipelineResult& result, const std::optional<AnisoAffine>& truth,
                              const SuccessThresholds& thresholds) {
  KeyValueFile kv;
  put(kv, "final.matrix", format_matrix(result.refined));
  put(kv, "final.decomposition_valid", result.decomposition.valid ? "true" : "false");
  put(kv, "final.shear_residual", format_double(result.decomposition.shear_residual));
  if (result.decomposition.valid) put_transform(kv, "final", result.decomposition.transform);
  put_transform(kv, "preliminary", result.preliminary);
  put(kv, "preliminary.matrix", format_matrix(result.preliminary.matrix()));
  put_transform(kv, "initial", result.initial);
  for (std::size_t i = 0; i < result.passes.size(); ++i) {
    const PassStats& p = result.passes[i];
    const std::string pre = "pass." + std::to_string(i);
    put(kv, pre + ".seeds_total", std::to_string(p.seeds_total));
    put(kv, pre + ".seeds_consistent", std::to_string(p.seeds_consistent));
    put(kv, pre + ".winners", std::to_string(p.winners));
    put(kv, pre + ".correspondences", std::to_string(p.correspondences));
  }
  put(kv, "vegetation.aerial_points", std::to_string(result.veg_aerial));
  put(kv, "vegetation.ground_points", std::to_string(result.veg_ground));
  put(kv, "cpd.sigma2", format_double(result.cpd_sigma2));
  put(kv, "cpd.iterations", std::to_string(result.cpd_iterations));
  if (truth) {
    // Metrics use the polar factors even when the shear test fails.
    RegistrationReport report;
    score(report, result.decomposition.transform, *truth, thresholds);
    put(kv, "metrics.e_t", format_double(report.e_t));
    put(kv, "metrics.e_R", format_double(report.e_R));
    put(kv, "metrics.e_s", format_double(report.e_s));
    put(kv, "metrics.success", report.success ? "true" : "false");
  }
  return kv;
}

AnisoAffine read_truth(const std::filesystem::path& path) {
  const KeyValueFile kv = read_key_value_file(path);
  if (kv.values.count("truth.scale")) return get_transform(kv, "truth");
  return get_transform(kv, "final");
}

}  // namespace fieldreg
