#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
};

CliRun run(const std::string& args) {
  const fs::path log = fs::temp_directory_path() / ("mfgfem_cli_" + std::to_string(::getpid()) + ".log");
  const std::string cmd = std::string(MFGFEM_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  CliRun r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  fs::remove(log);
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("mfgfem_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string out_arg(const fs::path& sub = {}) const {
    return "-s output.dir=\"" + (dir_ / sub).string() + "\"";
  }
  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, HelpAndMissingSubcommand) {
  EXPECT_EQ(run("--help").code, 0);
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
}

TEST_F(CliTest, CheckMeshReportsConditions) {
  const CliRun ok = run("check-mesh -s mesh.level=3");
  EXPECT_EQ(ok.code, 0) << ok.out;
  const auto doc = nlohmann::ordered_json::parse(ok.out);
  EXPECT_TRUE(doc["condition_satisfied"].get<bool>());
  EXPECT_EQ(doc["triangles"], 128);
  EXPECT_EQ(doc.begin().key(), "config_hash");

  EXPECT_EQ(run("check-mesh -s stabilization=acute").code, 1);
  const CliRun rhombus = run("check-mesh -s mesh.family=acute_rhombus -s mesh.level=2");
  EXPECT_EQ(rhombus.code, 0) << rhombus.out;
}

TEST_F(CliTest, CheckMeshFromFile) {
  const fs::path mesh = dir_ / "kite.mesh";
  {
    std::ofstream out(mesh);
    // two triangles whose opposite angles are 100 degrees each
    out << "MFGMESH 1\nvertices 4\n-1 0\n1 0\n0 0.83909963117728\n0 -0.83909963117728\n"
           "triangles 2\n0 1 2\n1 0 3\n";
  }
  const CliRun r = run("check-mesh -s mesh.family=\"file:" + mesh.string() + "\" -s mesh.level=0");
  EXPECT_EQ(r.code, 1) << r.out;

  const fs::path broken = dir_ / "broken.mesh";
  {
    std::ofstream out(broken);
    out << "MFGMESH 1\nvertices 3\n0 0\n1 0\n";
  }
  EXPECT_EQ(run("check-mesh -s mesh.family=\"file:" + broken.string() + "\"").code, 2);
}

TEST_F(CliTest, InputErrors) {
  EXPECT_EQ(run("solve -s mesh.colour=red").code, 2);
  EXPECT_EQ(run("solve -s stabilization=none " + out_arg()).code, 2);
  EXPECT_EQ(run("solve -c /nonexistent/run.cfg").code, 2);
  EXPECT_EQ(run("solve -s stabilization.omega_factor=0.5 " + out_arg()).code, 2);
}

TEST_F(CliTest, SolveWritesOutputsDeterministically) {
  const std::string args = "solve -s mesh.level=3 ";
  const CliRun a = run(args + out_arg("a"));
  ASSERT_EQ(a.code, 0) << a.out;
  const CliRun b = run(args + out_arg("b"));
  ASSERT_EQ(b.code, 0) << b.out;
  for (const char* name : {"solution_u.csv", "solution_m.csv", "telemetry.json"}) {
    ASSERT_TRUE(fs::exists(dir_ / "a" / name)) << name;
    // output.dir differs, so compare everything except the config echo
    if (std::string(name) != "telemetry.json") {
      const std::string sa = slurp(dir_ / "a" / name);
      const std::string sb = slurp(dir_ / "b" / name);
      EXPECT_EQ(sa.substr(sa.find('\n')), sb.substr(sb.find('\n'))) << name;
      EXPECT_EQ(sa.rfind("# config_hash=", 0), 0u);
    }
  }
  const auto ta = nlohmann::ordered_json::parse(slurp(dir_ / "a" / "telemetry.json"));
  const auto tb = nlohmann::ordered_json::parse(slurp(dir_ / "b" / "telemetry.json"));
  EXPECT_TRUE(ta["converged"].get<bool>());
  EXPECT_LE(ta["residual1_dual"].get<double>(), 1e-9);
  EXPECT_EQ(ta["history"], tb["history"]);
  EXPECT_FALSE(ta["history"][0].contains("seconds"));

  const CliRun c = run(args + out_arg("a"));
  ASSERT_EQ(c.code, 0);
  EXPECT_EQ(slurp(dir_ / "a" / "telemetry.json"), ta.dump(2) + "\n");
}

TEST_F(CliTest, NonconvergenceExitCode) {
  const CliRun r = run("solve -s mesh.level=3 -s solver.max_outer=1 " + out_arg());
  EXPECT_EQ(r.code, 3) << r.out;
  const auto t = nlohmann::ordered_json::parse(slurp(dir_ / "telemetry.json"));
  EXPECT_FALSE(t["converged"].get<bool>());
}

TEST_F(CliTest, ConvergenceWritesTables) {
  const CliRun r = run("convergence -s 'mesh.levels=[2,4]' " + out_arg());
  ASSERT_TRUE(r.code == 0 || r.code == 1) << r.out;
  const std::string csv = slurp(dir_ / "eoc.csv");
  EXPECT_EQ(csv.rfind("# config_hash=", 0), 0u);
  EXPECT_NE(csv.find("level,h,ndof,err_u_H1,eoc_u_H1"), std::string::npos);
  const auto report = nlohmann::ordered_json::parse(slurp(dir_ / "report.json"));
  EXPECT_EQ(report["table"]["rows"].size(), 3u);
  EXPECT_TRUE(report["verdicts"]["h1_rates"].contains("pass"));
  EXPECT_EQ(run("convergence -s 'mesh.levels=[2,3]' " + out_arg()).code, 2);
}

TEST_F(CliTest, VerifyPassesOnSmallBudget) {
  const CliRun r = run(
      "verify -s verify.level=3 -s verify.dmp_trials=10 -s verify.monotonicity_pairs=5 "
      "-s verify.gradient_samples=100 -s verify.convexity_triples=100 -s verify.bound_samples=100 "
      "-s verify.semismooth_pairs=3 " +
      out_arg());
  EXPECT_EQ(r.code, 0) << r.out;
  const auto report = nlohmann::ordered_json::parse(slurp(dir_ / "report.json"));
  EXPECT_EQ(report.begin().key(), "config_hash");
}
