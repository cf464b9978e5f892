#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "fieldreg/app.hpp"

using namespace fieldreg;

namespace {

KeyValueFile kv_of(std::initializer_list<std::pair<std::string, std::string>> items) {
  KeyValueFile kv;
  for (const auto& [k, v] : items) {
    kv.ordered.emplace_back(k, v);
    kv.values[k] = v;
  }
  return kv;
}

Suite tiny_suite() {
  return parse_suite(kv_of({{"trials", "2"},
                            {"seed", "77"},
                            {"field.extent_x", "4"},
                            {"field.extent_y", "4"},
                            {"field.ground_extent_x", "1.5"},
                            {"field.ground_extent_y", "1.5"},
                            {"field.point_density_aerial", "400"},
                            {"field.point_density_ground", "800"},
                            {"bucket.0.dt", "0.1"},
                            {"bucket.1.dt", "0.2"},
                            {"bucket.1.ds", "0.05"}}));
}

RunConfig fast_config() {
  RunConfig c;
  apply_setting(c, "cpd.max_iterations", "20");
  apply_setting(c, "icp.max_iterations", "10");
  return c;
}

}  // namespace

TEST(RunConfig, Defaults) {
  const RunConfig c;
  EXPECT_EQ(c.pipeline.flow.alpha, 1.0);
  EXPECT_EQ(c.pipeline.flow.beta, 0.5);
  EXPECT_EQ(c.pipeline.grid.cell_size, 0.02);
  EXPECT_EQ(c.pipeline.grid.sigma_avg, 0.04);
  EXPECT_EQ(c.pipeline.flow.forward_backward_tol, 1.0);
}

TEST(RunConfig, SetAndRoundTrip) {
  RunConfig c;
  apply_setting(c, "flow.alpha", "2.5");
  apply_setting(c, "seed", "9");
  EXPECT_EQ(c.pipeline.flow.alpha, 2.5);
  EXPECT_EQ(c.seed, 9u);
  RunConfig back;
  apply_settings(back, to_key_value(c));
  EXPECT_EQ(back.pipeline.flow.alpha, 2.5);
  EXPECT_EQ(to_key_value(back).ordered, to_key_value(c).ordered);
}

TEST(RunConfig, UnknownKeyAndBadValue) {
  RunConfig c;
  try {
    apply_setting(c, "flow.gamma", "1");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
    EXPECT_NE(std::string(e.what()).find("flow.gamma"), std::string::npos);
  }
  EXPECT_THROW(apply_setting(c, "flow.alpha", "abc"), Error);
  EXPECT_THROW(apply_setting(c, "daisy.radius", "1"), Error);
}

TEST(Methods, Parse) {
  EXPECT_EQ(parse_methods("agricolmap,icp,cpd").size(), 3u);
  EXPECT_EQ(parse_methods("icp,icp").size(), 1u);
  try {
    parse_methods("ransac");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
}

TEST(Suite, Parse) {
  const Suite s = tiny_suite();
  EXPECT_EQ(s.trials, 2);
  EXPECT_EQ(s.seed, 77u);
  ASSERT_EQ(s.buckets.size(), 2u);
  EXPECT_EQ(s.buckets[1].perturb.ds, Vec3(0.05, 0.05, 0.0));
  EXPECT_EQ(s.field.extent_x, 4.0);
}

TEST(Suite, Errors) {
  EXPECT_THROW(parse_suite(kv_of({{"trials", "2"}})), Error);
  EXPECT_THROW(parse_suite(kv_of({{"bucket.0.dt", "-1"}})), Error);
  EXPECT_THROW(parse_suite(kv_of({{"bucket.0.foo", "1"}})), Error);
  EXPECT_THROW(parse_suite(kv_of({{"bucket.x.dt", "1"}})), Error);
  EXPECT_THROW(parse_suite(kv_of({{"trials", "0"}, {"bucket.0.dt", "1"}})), Error);
  EXPECT_THROW(parse_suite(kv_of({{"whatever", "1"}, {"bucket.0.dt", "1"}})), Error);
}

TEST(TrialSeed, DeterministicAndDistinct) {
  EXPECT_EQ(trial_seed(5, 3), trial_seed(5, 3));
  std::set<std::uint64_t> seen;
  for (std::uint64_t m = 0; m < 10; ++m) {
    for (std::uint64_t i = 0; i < 100; ++i) seen.insert(trial_seed(m, i));
  }
  EXPECT_EQ(seen.size(), 1000u);
}

TEST(RunSuite, ThreadCountDoesNotChangeRows) {
  const Suite suite = tiny_suite();
  const std::vector<Method> methods{Method::kCpd, Method::kIcp};
  const RunConfig cfg = fast_config();
  const std::vector<TrialRow> one = run_suite(suite, methods, cfg, 1);
  const std::vector<TrialRow> two = run_suite(suite, methods, cfg, 2);
  ASSERT_EQ(one.size(), 8u);
  ASSERT_EQ(two.size(), one.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_EQ(one[i].trial, two[i].trial);
    EXPECT_EQ(one[i].method, two[i].method);
    EXPECT_EQ(one[i].e_t, two[i].e_t);
    EXPECT_EQ(one[i].e_R, two[i].e_R);
    EXPECT_EQ(one[i].success, two[i].success);
  }
  EXPECT_EQ(one[0].bucket, 0);
  EXPECT_EQ(one[4].bucket, 1);
  EXPECT_EQ(one[4].trial, 2);
}

TEST(RunSuite, CsvAndSummary) {
  const Suite suite = tiny_suite();
  const std::vector<Method> methods{Method::kCpd};
  const std::vector<TrialRow> rows = run_suite(suite, methods, fast_config(), 1);
  const auto dir = std::filesystem::temp_directory_path() / "fieldreg_app_csv";
  std::filesystem::create_directories(dir);
  write_sweep_csv(rows, dir / "a.csv");
  write_sweep_csv(run_suite(suite, methods, fast_config(), 1), dir / "b.csv");
  const auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::string a = slurp(dir / "a.csv");
  EXPECT_EQ(a, slurp(dir / "b.csv"));
  EXPECT_EQ(a.substr(0, a.find('\n')), "trial,dt_init,dpsi_init,ds_init,e_t,e_R,e_s,success,method");
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 5);

  const std::string summary = sweep_summary(suite, rows, methods);
  std::istringstream lines(summary);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "bucket,dt,dpsi,ds,method,successes,trials,rate");
  std::getline(lines, line);
  EXPECT_EQ(line.rfind("0,0.1,0,0,cpd,", 0), 0u) << line;
  EXPECT_NE(line.find(",2,"), std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST(Generate, SpecRejectsUnknownPerturbation) {
  EXPECT_THROW(parse_generate_spec(kv_of({{"perturb.foo", "1"}})), Error);
  EXPECT_THROW(parse_generate_spec(kv_of({{"perturb.dt", "-1"}})), Error);
  const GenerateSpec g = parse_generate_spec(kv_of({{"perturb.ds", "0.1"}, {"extent_x", "5"}}));
  EXPECT_EQ(g.perturb.ds, Vec3(0.1, 0.1, 0.0));
  EXPECT_EQ(g.field.extent_x, 5.0);
}

TEST(Matrix, FormatParseRoundTrip) {
  Mat4 m = Mat4::Identity();
  m(0, 1) = 0.1 + 0.2;
  m(2, 3) = -1e-17;
  EXPECT_EQ(parse_matrix(format_matrix(m), "m"), m);
  EXPECT_THROW(parse_matrix("1 2 3", "m"), Error);
}
