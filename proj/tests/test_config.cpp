#include <gtest/gtest.h>

#include <cstdlib>

#include "smvar/config.hpp"

using namespace smvar;

namespace {

struct SeedEnv {
  explicit SeedEnv(const char* v) { v ? setenv("SMVAR_SEED", v, 1) : unsetenv("SMVAR_SEED"); }
  ~SeedEnv() { unsetenv("SMVAR_SEED"); }
};

}  // namespace

TEST(Config, DefaultFileLoads) {
  const RunConfig c = load_config(SMVAR_CONFIG_DIR "/default.json");
  EXPECT_EQ(c.e, 1.0);
  ASSERT_TRUE(c.lambda);
  EXPECT_EQ(*c.lambda, 50.0);
  EXPECT_EQ(c.n, 2000u);
  EXPECT_EQ(c.solver.seed, 42u);
  EXPECT_FALSE(c.d_star);
  EXPECT_EQ(c.nonlinearity.kind, "min-abs-powers");
}

TEST(Config, RoundTripPreservesEveryField) {
  RunConfig c;
  c.e = 0.25;
  c.lambda = 12.5;
  c.lambdas = {1.0, 2.0, 8.0};
  c.nonlinearity = {"custom-table", 0.5, 2.0, {-1.0, 0.0, 2.0}, {-0.5, 0.0, 0.75}};
  c.weight.kind = "custom-table";
  c.weight.r = {0.0, 1.0, 2.0};
  c.weight.alpha = {1.0, 0.5, 0.0};
  c.weight.r_outer = 1.0;
  c.weight.alpha0 = 0.5;
  c.r_max = 15.0;
  c.n = 777;
  c.quadrature = "simpson";
  c.d_star = 0.42;
  c.rho0 = 1e-3;
  c.solver.seed = 99;
  c.solver.path_nodes = 17;
  c.verify_samples = 3;
  c.out_dir = "somewhere";
  const RunConfig back = parse_config(dump_config(c));
  EXPECT_EQ(back, c);
  EXPECT_FALSE(back.s125);
  EXPECT_NO_THROW(back.problem(1.0));
}

TEST(Config, MissingSectionsTakeDefaults) {
  const RunConfig c = parse_config("{}");
  EXPECT_EQ(c, RunConfig{});
}

TEST(Config, InvalidDocumentsAreRejected) {
  EXPECT_THROW(parse_config("{"), std::invalid_argument);
  EXPECT_THROW(parse_config(R"({"problem": {"e": -1}})"), std::invalid_argument);
  EXPECT_THROW(parse_config(R"({"problem": {"e": "one"}})"), std::invalid_argument);
  EXPECT_THROW(parse_config(R"({"problem": {"lambdas": [1, -2]}})"), std::invalid_argument);
  EXPECT_THROW(parse_config(R"({"discretization": {"n": 10}})"), std::invalid_argument);
  EXPECT_THROW(parse_config(R"({"discretization": {"r_max": 0.5}})"), std::invalid_argument);
  EXPECT_THROW(parse_config(R"({"discretization": {"quadrature": "gauss"}})"), std::invalid_argument);
  EXPECT_THROW(parse_config(R"({"solver": {"path_nodes": 2}})"), std::invalid_argument);
  EXPECT_THROW(parse_config(R"({"constants": {"rho0": 0}})"), std::invalid_argument);
  EXPECT_THROW(load_config("/nonexistent/config.json"), std::invalid_argument);
  // Unknown kinds surface when the model is built.
  const RunConfig c = parse_config(R"({"problem": {"nonlinearity": {"kind": "cubic"}}})");
  EXPECT_ANY_THROW(c.problem(1.0));
}

TEST(Config, SeedEnvironmentOverride) {
  RunConfig c;
  {
    SeedEnv env("1234");
    apply_env_overrides(c);
    EXPECT_EQ(c.solver.seed, 1234u);
  }
  {
    SeedEnv env("12x");
    EXPECT_THROW(apply_env_overrides(c), std::invalid_argument);
  }
  {
    SeedEnv env(nullptr);
    c.solver.seed = 5;
    apply_env_overrides(c);
    EXPECT_EQ(c.solver.seed, 5u);
  }
}
