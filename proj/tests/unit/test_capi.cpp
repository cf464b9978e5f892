#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include "fieldreg/fieldreg.h"

namespace fs = std::filesystem;

namespace {

const char* kSmallField =
    "extent_x=4\n"
    "extent_y=4\n"
    "ground_extent_x=2\n"
    "ground_extent_y=2\n";

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("fieldreg_capi_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + FIELDREG_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(CApi, ConfigUnknownKey) {
  fr_config* c = nullptr;
  ASSERT_EQ(fr_config_create(&c), FR_OK);
  EXPECT_EQ(fr_config_set(c, "flow.alpha", "0.7"), FR_OK);
  EXPECT_STREQ(fr_last_error(), "");
  EXPECT_EQ(fr_config_set(c, "no.such.key", "1"), FR_ERR_INPUT);
  EXPECT_NE(std::string(fr_last_error()), "");
  fr_config_destroy(c);
}

TEST(CApi, NullArgumentsRejected) {
  EXPECT_EQ(fr_config_create(nullptr), FR_ERR_INPUT);
  EXPECT_EQ(fr_cloud_load(nullptr, nullptr), FR_ERR_INPUT);
  EXPECT_EQ(fr_cloud_size(nullptr), 0u);
  fr_config_destroy(nullptr);
  fr_cloud_destroy(nullptr);
  fr_result_destroy(nullptr);
}

TEST(CApi, MissingCloud) {
  fr_cloud* c = nullptr;
  EXPECT_EQ(fr_cloud_load("/nonexistent/fieldreg.ply", &c), FR_ERR_INPUT);
  EXPECT_EQ(c, nullptr);
  EXPECT_NE(std::string(fr_last_error()), "");
}

TEST(CApi, GenerateAndRegister) {
  const fs::path dir = scratch("register");
  write(dir / "spec.txt", std::string(kSmallField) + "perturb.dt=0.5\nperturb.dpsi=0.05\n");
  ASSERT_EQ(fr_generate((dir / "spec.txt").c_str(), (dir / "pair").c_str(), 3), FR_OK) << fr_last_error();

  fr_cloud* a = nullptr;
  fr_cloud* g = nullptr;
  ASSERT_EQ(fr_cloud_load((dir / "pair" / "aerial.ply").c_str(), &a), FR_OK);
  ASSERT_EQ(fr_cloud_load((dir / "pair" / "ground.ply").c_str(), &g), FR_OK);
  EXPECT_GT(fr_cloud_size(a), 0u);
  EXPECT_GT(fr_cloud_size(g), 0u);

  fr_config* c = nullptr;
  ASSERT_EQ(fr_config_create(&c), FR_OK);
  fr_result* r = nullptr;
  ASSERT_EQ(fr_register(c, a, g, &r), FR_OK) << fr_last_error();
  double m[16];
  ASSERT_EQ(fr_result_matrix(r, m), FR_OK);
  EXPECT_EQ(m[12], 0.0);
  EXPECT_EQ(m[15], 1.0);
  ASSERT_EQ(fr_result_set_truth(r, (dir / "pair" / "truth.txt").c_str()), FR_OK);
  ASSERT_EQ(fr_result_write(r, (dir / "out.txt").c_str()), FR_OK);
  std::ifstream in(dir / "out.txt");
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_NE(text.find("e_t"), std::string::npos);

  fr_result_destroy(r);
  fr_config_destroy(c);
  fr_cloud_destroy(a);
  fr_cloud_destroy(g);
  fs::remove_all(dir);
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("cli");
  write(dir / "field.txt", kSmallField);
  write(dir / "bare.txt", std::string(kSmallField) + "missing_plant_rate=1\nsoil_exg_std=0\n");
  ASSERT_EQ(run_cli("generate --spec " + (dir / "field.txt").string() + " --out-dir " + (dir / "f").string()), 0);
  ASSERT_EQ(run_cli("generate --spec " + (dir / "bare.txt").string() + " --out-dir " + (dir / "b").string()), 0);
  const std::string f_args = "--aerial " + (dir / "f" / "aerial.ply").string() + " --ground ";
  const std::string out = " --out " + (dir / "out.txt").string();

  EXPECT_EQ(run_cli("register --aerial " + (dir / "nope.ply").string() + " --ground " +
                    (dir / "nope.ply").string() + out),
            2);
  EXPECT_EQ(run_cli("evaluate --suite " + (dir / "field.txt").string() + " --methods ransac --out " +
                    (dir / "x.csv").string()),
            2);
  EXPECT_EQ(run_cli("register " + f_args + (dir / "f" / "ground.ply").string() + out + " --set flow.gamma=1"), 2);
  EXPECT_EQ(run_cli("register --aerial " + (dir / "b" / "aerial.ply").string() + " --ground " +
                    (dir / "b" / "ground.ply").string() + out),
            5);
  EXPECT_EQ(run_cli("register " + f_args + (dir / "f" / "ground.ply").string() + out), 0);
  EXPECT_TRUE(fs::exists(dir / "out.txt"));
  EXPECT_EQ(run_cli("frobnicate"), 2);
  fs::remove_all(dir);
}
