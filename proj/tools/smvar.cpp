// smvar constants|solve|sweep|verify --config <file> [--jobs N] [--out DIR]

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "smvar/smvar.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Radial variational solver and verification toolkit for the Schrodinger-Maxwell system"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir;
  unsigned jobs = 1;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--jobs", jobs, "worker threads for lambda jobs")->check(CLI::PositiveNumber);
    sub->add_option("--out", out_dir, "output directory (default: output.directory from the config)");
  };
  CLI::App* constants = app.add_subcommand("constants", "print c_f, threshold, hypotheses and interval estimates");
  CLI::App* solve = app.add_subcommand("solve", "find the solutions at problem.lambda");
  CLI::App* sweep = app.add_subcommand("sweep", "solve over problem.lambdas and write sweep.csv");
  CLI::App* verify = app.add_subcommand("verify", "run the invariant battery and write verify.json");
  for (CLI::App* sub : {constants, solve, sweep, verify}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : smvar::exit_invalid_model;
  }

  try {
    smvar::RunConfig cfg = smvar::load_config(config_path);
    smvar::apply_env_overrides(cfg);
    const std::string out = out_dir.empty() ? cfg.out_dir : out_dir;
    if (*constants) return smvar::cmd_constants(cfg);
    if (*solve) return smvar::cmd_solve(cfg, out);
    if (*sweep) return smvar::cmd_sweep(cfg, out, jobs);
    if (*verify) return smvar::cmd_verify(cfg, out);
  } catch (const smvar::InvalidModel& ex) {
    std::cerr << "invalid model: " << ex.what() << '\n';
    return smvar::exit_invalid_model;
  } catch (const std::invalid_argument& ex) {
    std::cerr << "invalid configuration: " << ex.what() << '\n';
    return smvar::exit_invalid_model;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return smvar::exit_not_converged;
  }
  return smvar::exit_ok;
}
