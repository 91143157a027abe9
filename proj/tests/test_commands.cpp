#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "smvar/commands.hpp"

using namespace smvar;
namespace fs = std::filesystem;

namespace {

RunConfig default_config() { return load_config(SMVAR_CONFIG_DIR "/default.json"); }

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("smvar_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run(const std::string& cmd) {
  const int st = std::system((cmd + " > /dev/null 2>&1").c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

fs::path write_config(const fs::path& dir, const RunConfig& c) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << dump_config(c);
  return p;
}

}  // namespace

TEST(Constants, DefaultReport) {
  RunConfig c = default_config();
  c.rho0.reset();
  std::ostringstream out, err;
  EXPECT_EQ(cmd_constants(c, out, err), exit_ok);
  const auto j = nlohmann::json::parse(out.str());
  EXPECT_NEAR(j.at("c_f").get<double>(), 1.0 / (1.0 + 4.0 * std::sqrt(pi)), 1e-9);
  EXPECT_FALSE(j.at("threshold_unbounded").get<bool>());
  EXPECT_FALSE(j.at("interval").at("vacuous").get<bool>());
  EXPECT_TRUE(j.at("d_star").at("estimated").get<bool>());
}

TEST(Constants, LogSquareBound) {
  RunConfig c = default_config();
  c.nonlinearity.kind = "log-square";
  c.rho0.reset();
  for (double e : {0.1, 1.0, 10.0}) {
    c.e = e;
    const auto j = constants_report(c);
    EXPECT_LE(j.at("c_f").get<double>(), 0.8047 + 1e-3);
  }
}

TEST(Constants, FailedHypothesisIsExitTwo) {
  RunConfig c = default_config();
  c.nonlinearity = {"custom-table", 0.5, 2.0, {-1.0, 1.0}, {0.0, 0.0}};
  std::ostringstream out, err;
  EXPECT_EQ(cmd_constants(c, out, err), exit_invalid_model);
  EXPECT_NE(err.str().find("f3"), std::string::npos);
}

TEST(Solve, ZeroLambdaWritesOnlyTheTrivialSolution) {
  RunConfig c = default_config();
  c.lambda = 0.0;
  const fs::path dir = scratch("solve0");
  std::ostringstream err;
  EXPECT_EQ(cmd_solve(c, dir, err), exit_ok);
  const auto j = nlohmann::json::parse(slurp(dir / "solutions.json"));
  EXPECT_EQ(j.at("n_solutions").get<int>(), 0);
  ASSERT_EQ(j.at("solutions").size(), 1u);
  EXPECT_EQ(j.at("solutions")[0].at("kind"), "trivial");
  EXPECT_TRUE(fs::exists(dir / "profile_0_trivial.csv"));
  EXPECT_TRUE(j.at("nonexistence").at("passes").get<bool>());
}

TEST(Solve, BelowThresholdEmbedsTheCertificate) {
  RunConfig c = default_config();
  c.lambda = 4.0;
  const fs::path dir = scratch("solve4");
  std::ostringstream err;
  EXPECT_EQ(cmd_solve(c, dir, err), exit_ok);
  const auto j = nlohmann::json::parse(slurp(dir / "solutions.json"));
  const auto& ne = j.at("nonexistence");
  EXPECT_TRUE(ne.at("applicable").get<bool>());
  EXPECT_TRUE(ne.at("passes").get<bool>());
  EXPECT_EQ(ne.at("candidates").size(), 2u + c.solver.random_starts);
}

TEST(Solve, AboveThresholdWritesBothProfiles) {
  RunConfig c = default_config();
  const fs::path dir = scratch("solve50");
  std::ostringstream err;
  EXPECT_EQ(cmd_solve(c, dir, err), exit_ok);
  const auto j = nlohmann::json::parse(slurp(dir / "solutions.json"));
  EXPECT_EQ(j.at("n_solutions").get<int>(), 2);
  EXPECT_FALSE(j.contains("nonexistence"));
  for (const auto& s : j.at("solutions")) EXPECT_TRUE(fs::exists(dir / s.at("profile").get<std::string>()));
  const std::string csv = slurp(dir / "profile_1_minimizer.csv");
  EXPECT_EQ(csv.rfind("r,u,phi\n", 0), 0u);
}

TEST(Sweep, CsvLayout) {
  EXPECT_EQ(sweep_csv({}), "lambda,n_solutions,min_energy,mp_energy,u_norms,status\n");
  RunConfig c = default_config();
  c.lambdas = {1.0, 3.0, 6.0};
  const fs::path dir = scratch("sweep");
  std::ostringstream err;
  EXPECT_EQ(cmd_sweep(c, dir, 1, err), exit_ok);
  const std::string csv = slurp(dir / "sweep.csv");
  EXPECT_EQ(csv.find("nan"), std::string::npos);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_NE(line.find(",0,,,,ok"), std::string::npos) << line;
  }
  EXPECT_EQ(rows, 3);
}

TEST(Verify, DefaultBatteryPasses) {
  const fs::path dir = scratch("verify");
  std::ostringstream err;
  EXPECT_EQ(cmd_verify(default_config(), dir, err), exit_ok) << err.str();
  const auto j = nlohmann::json::parse(slurp(dir / "verify.json"));
  EXPECT_TRUE(j.at("passed").get<bool>());
  EXPECT_GE(j.at("checks").size(), 9u);
}

TEST(Verify, CoarseGridUsesScaledTolerances) {
  RunConfig c = default_config();
  c.n = 64;
  c.verify_samples = 3;
  std::ostringstream err;
  EXPECT_EQ(cmd_verify(c, scratch("verify64"), err), exit_ok) << err.str();
  EXPECT_DOUBLE_EQ(scaled_tolerance(1e-3, 0.1), 0.1);
  EXPECT_DOUBLE_EQ(scaled_tolerance(1e-3, 1e-3), 1e-3);
}

TEST(Cli, ExitCodes) {
  const std::string bin = SMVAR_BIN;
  const fs::path dir = scratch("cli");
  RunConfig c = default_config();
  c.lambda = 2.0;
  c.verify_samples = 3;
  const fs::path cfg = write_config(dir, c);
  const std::string common = " --config " + cfg.string() + " --out " + (dir / "out").string();
  EXPECT_EQ(run(bin + " constants" + common), 0);
  EXPECT_EQ(run(bin + " solve" + common), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "solutions.json"));
  EXPECT_EQ(run(bin + " verify" + common), 0);
  EXPECT_EQ(run("SMVAR_SEED=7 " + bin + " solve" + common), 0);
  EXPECT_EQ(nlohmann::json::parse(slurp(dir / "out" / "solutions.json")).at("seed").get<int>(), 7);

  EXPECT_EQ(run(bin), 2);
  EXPECT_EQ(run(bin + " solve --config /nonexistent.json"), 2);
  EXPECT_EQ(run(bin + " --help"), 0);

  std::ofstream(dir / "bad.json") << R"({"problem": {"e": -1}})";
  EXPECT_EQ(run(bin + " constants --config " + (dir / "bad.json").string()), 2);

  RunConfig zero = c;
  zero.nonlinearity = {"custom-table", 0.5, 2.0, {-1.0, 1.0}, {0.0, 0.0}};
  const fs::path zdir = dir / "zero";
  fs::create_directories(zdir);
  EXPECT_EQ(run(bin + " solve --config " + write_config(zdir, zero).string() + " --out " + zdir.string()), 2);

  RunConfig capped = c;
  capped.lambda = 50.0;
  capped.solver.max_iter = 2;
  const fs::path cdir = dir / "capped";
  fs::create_directories(cdir);
  EXPECT_EQ(run(bin + " solve --config " + write_config(cdir, capped).string() + " --out " + cdir.string()), 3);
}

// The mutant binary flips the sign of the coupling term in the gradient; the
// battery must catch it.
TEST(Cli, MutantFailsVerification) {
  const fs::path dir = scratch("mutant");
  RunConfig c = default_config();
  c.verify_samples = 3;
  const fs::path cfg = write_config(dir, c);
  EXPECT_EQ(run(std::string(SMVAR_MUTANT_BIN) + " verify --config " + cfg.string() + " --out " + dir.string()), 1);
  EXPECT_FALSE(nlohmann::json::parse(slurp(dir / "verify.json")).at("passed").get<bool>());
}
