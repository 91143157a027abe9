#pragma once

// Subcommands behind the smvar executable. Each returns the process exit
// code: 0 success, 1 verification failure, 2 invalid model or config,
// 3 solver non-convergence.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "smvar/bounds.hpp"
#include "smvar/config.hpp"
#include "smvar/energy.hpp"
#include "smvar/model.hpp"
#include "smvar/poisson.hpp"
#include "smvar/solvers.hpp"

namespace smvar {

inline constexpr int exit_ok = 0;
inline constexpr int exit_verification_failed = 1;
inline constexpr int exit_invalid_model = 2;
inline constexpr int exit_not_converged = 3;

namespace detail {

using nlohmann::json;

inline json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json energy_json(const EnergyBreakdown& en) {
  return {{"dirichlet", en.dirichlet}, {"mass", en.mass},  {"coupling", en.coupling},
          {"potential", en.potential}, {"e1", en.e1},      {"i_lambda", en.i_lambda}};
}

inline std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << text;
}

inline void write_profile(const std::filesystem::path& file, const RadialFunction& u, const RadialFunction& phi) {
  std::ostringstream os;
  os << "r,u,phi\n" << std::setprecision(17);
  for (std::size_t i = 0; i < u.size(); ++i) os << u.grid()[i] << ',' << u[i] << ',' << phi[i] << '\n';
  write_text(file, os.str());
}

inline double threshold_of(const Problem& prob, double c_f) {
  const double sup = prob.weight().sup_norm();
  return sup > 0.0 ? 1.0 / (sup * c_f) : std::numeric_limits<double>::infinity();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// constants

inline nlohmann::json constants_report(const RunConfig& cfg) {
  using nlohmann::json;
  const Problem prob = cfg.problem(cfg.lambda.value_or(0.0));
  const Nonlinearity& f = prob.nonlinearity();
  const HypothesisReport hyp = check_hypotheses(f);
  json j;
  j["nonlinearity"] = f.describe();
  j["hypotheses"] = {{"f1", hyp.f1_ok},
                     {"f2", hyp.f2_ok},
                     {"f3", hyp.f3_ok},
                     {"tail_ratio", hyp.tail_ratio},
                     {"origin_ratio", hyp.origin_ratio},
                     {"s0", hyp.s0},
                     {"F_s0", hyp.F_s0},
                     {"failed", hyp.failures()}};
  if (!hyp.all_ok()) return j;
  const double c_f = compute_cf(f, cfg.e);
  const double threshold = detail::threshold_of(prob, c_f);
  j["c_f"] = c_f;
  j["n_f"] = hyp.n_f;
  j["L_f"] = f.lipschitz() ? json(*f.lipschitz()) : json(nullptr);
  j["threshold"] = detail::finite_or_null(threshold);
  j["threshold_unbounded"] = !std::isfinite(threshold);
  const IntegrabilityReport integ = weight_integrability(prob.weight(), prob.grid());
  j["weight_integrability"] = {{"exponent", 6.0 / (5.0 - prob.weight().q())},
                               {"norm", integ.norm},
                               {"radius", integ.radius},
                               {"doublings", integ.doublings},
                               {"diverged", integ.diverged}};
  const double d_star = cfg.d_star.value_or(estimate_d_star());
  const double s125 = cfg.s125.value_or(estimate_s125());
  j["d_star"] = {{"value", d_star}, {"estimated", !cfg.d_star}};
  j["s_125"] = {{"value", s125}, {"estimated", !cfg.s125}};
  try {
    const IntervalEstimate est = interval_estimate(prob, d_star, s125);
    json iv = {{"threshold", detail::finite_or_null(est.threshold)},
               {"upper", est.upper},
               {"upper_quadrature", est.upper_quadrature},
               {"sharper_upper", detail::finite_or_null(est.sharper_upper)},
               {"m_value", est.m_value},
               {"n_value", est.n_value},
               {"t_value", est.t_value},
               {"s0", est.truncation.s0},
               {"sigma", est.truncation.sigma},
               {"vacuous", est.vacuous}};
    if (cfg.rho0 && !prob.weight().is_zero() && est.truncation.r_outer < prob.grid().r_max()) {
      const EnergyBreakdown en = energy(build_truncation(est.truncation, prob.grid_ptr()), prob);
      const SupRatioProbe probe = sup_ratio_probe(prob, *cfg.rho0, 10 * cfg.verify_samples, cfg.solver.seed);
      try {
        const AbarReport ab = abar(*cfg.rho0, en.e1, en.potential, probe.ratio);
        iv["abar"] = {{"value", detail::finite_or_null(ab.value)},
                      {"unbounded", ab.unbounded},
                      {"regime", ab.regime},
                      {"below_over_a", ab.below_over_a},
                      {"sup_ratio", probe.ratio}};
      } catch (const NotApplicable& ex) {
        iv["abar"] = {{"not_applicable", ex.what()}};
      }
    }
    j["interval"] = iv;
  } catch (const NotApplicable& ex) {
    j["interval"] = {{"not_applicable", ex.what()}};
  }
  return j;
}

inline int cmd_constants(const RunConfig& cfg, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  const nlohmann::json j = constants_report(cfg);
  out << j.dump(2) << '\n';
  if (!j.at("hypotheses").at("failed").get<std::string>().empty()) {
    err << "invalid model: hypothesis " << j.at("hypotheses").at("failed").get<std::string>() << " fails\n";
    return exit_invalid_model;
  }
  return exit_ok;
}

// ---------------------------------------------------------------------------
// solve

inline nlohmann::json solution_json(const SolutionPair& s, const std::string& profile) {
  return {{"kind", to_string(s.kind)},
          {"status", to_string(s.status)},
          {"lambda", s.lambda},
          {"energy", detail::energy_json(s.energy)},
          {"h1_norm", s.h1_norm},
          {"d12_norm", s.d12_norm},
          {"residual", s.residual},
          {"iterations", s.iterations},
          {"profile", profile}};
}

inline nlohmann::json nonexistence_json(const NonexistenceReport& rep) {
  nlohmann::json cands = nlohmann::json::array();
  for (const auto& c : rep.candidates)
    cands.push_back({{"h1_norm", c.h1_norm},
                     {"trivial", c.trivial},
                     {"residual", c.residual},
                     {"solution", c.solution},
                     {"identity_lhs", c.identity_lhs},
                     {"identity_rhs", c.identity_rhs},
                     {"identity_ok", c.identity_ok},
                     {"cubic_lhs", c.cubic_lhs},
                     {"cubic_rhs", c.cubic_rhs},
                     {"cubic_ok", c.cubic_ok},
                     {"contraction_lhs", c.contraction_lhs},
                     {"contraction_rhs", c.contraction_rhs},
                     {"inconsistent", c.inconsistent}});
  return {{"applicable", rep.applicable}, {"passes", rep.passes},   {"lambda", rep.lambda},
          {"threshold", detail::finite_or_null(rep.threshold)},      {"c_f", rep.c_f},
          {"candidates", cands}};
}

inline int cmd_solve(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& err = std::cerr) {
  if (!cfg.lambda) throw std::invalid_argument("solve: the config needs problem.lambda");
  const Problem prob = cfg.problem(*cfg.lambda);
  const HypothesisReport hyp = check_hypotheses(prob.nonlinearity());
  if (!hyp.all_ok()) {
    err << "invalid model: hypothesis " << hyp.failures() << " fails\n";
    return exit_invalid_model;
  }
  const double c_f = compute_cf(prob.nonlinearity(), prob.e());
  const double threshold = detail::threshold_of(prob, c_f);
  const SweepRecord rec = solve_at(prob, cfg.solver, job_seed(cfg.solver.seed, 0), threshold);

  std::filesystem::create_directories(out_dir);
  nlohmann::json sols = nlohmann::json::array();
  const SolverOptions opt = cfg.solver;
  SolutionPair zero = detail::make_pair(prob.zero(), prob, SolutionKind::trivial, SolverStatus::converged, 0, opt);
  detail::write_profile(out_dir / "profile_0_trivial.csv", zero.u, zero.phi);
  sols.push_back(solution_json(zero, "profile_0_trivial.csv"));
  for (std::size_t k = 0; k < rec.solutions.size(); ++k) {
    const auto& s = rec.solutions[k];
    const std::string name = "profile_" + std::to_string(k + 1) + "_" + to_string(s.kind) + ".csv";
    detail::write_profile(out_dir / name, s.u, s.phi);
    sols.push_back(solution_json(s, name));
  }
  nlohmann::json j = {{"lambda", prob.lambda()},
                      {"threshold", detail::finite_or_null(threshold)},
                      {"c_f", c_f},
                      {"n_solutions", rec.n_solutions},
                      {"status", rec.status},
                      {"seed", cfg.solver.seed},
                      {"solutions", sols}};
  if (prob.lambda() < threshold) j["nonexistence"] = nonexistence_json(certify_nonexistence(prob, rec.descents, c_f, opt));
  detail::write_text(out_dir / "solutions.json", j.dump(2) + "\n");
  if (rec.failed) {
    err << "solver did not converge: " << rec.status << '\n';
    return exit_not_converged;
  }
  return exit_ok;
}

// ---------------------------------------------------------------------------
// sweep

inline std::string sweep_csv(const std::vector<SweepRecord>& records) {
  std::ostringstream os;
  os << "lambda,n_solutions,min_energy,mp_energy,u_norms,status\n";
  for (const auto& r : records) {
    os << detail::format_double(r.lambda) << ',' << r.n_solutions << ',';
    if (r.min_energy && std::isfinite(*r.min_energy)) os << detail::format_double(*r.min_energy);
    os << ',';
    if (r.mp_energy && std::isfinite(*r.mp_energy)) os << detail::format_double(*r.mp_energy);
    os << ',';
    for (std::size_t k = 0; k < r.h1_norms.size(); ++k) os << (k ? ";" : "") << detail::format_double(r.h1_norms[k]);
    std::string status = r.status;
    std::replace(status.begin(), status.end(), ',', ';');
    os << ',' << status << '\n';
  }
  return os.str();
}

inline int cmd_sweep(const RunConfig& cfg, const std::filesystem::path& out_dir, unsigned jobs,
                     std::ostream& err = std::cerr) {
  const Problem prob = cfg.problem(0.0);
  const HypothesisReport hyp = check_hypotheses(prob.nonlinearity());
  if (!hyp.all_ok()) {
    err << "invalid model: hypothesis " << hyp.failures() << " fails\n";
    return exit_invalid_model;
  }
  std::vector<double> lambdas = cfg.lambdas;
  std::sort(lambdas.begin(), lambdas.end());
  const std::vector<SweepRecord> records = sweep(prob, lambdas, cfg.solver, jobs);
  std::filesystem::create_directories(out_dir);
  detail::write_text(out_dir / "sweep.csv", sweep_csv(records));
  std::size_t failed = 0;
  for (const auto& r : records)
    if (r.failed) {
      ++failed;
      err << "lambda " << r.lambda << ": " << r.status << '\n';
    }
  if (!records.empty() && failed == records.size()) return exit_not_converged;
  return exit_ok;
}

// ---------------------------------------------------------------------------
// verify

struct CheckResult {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

/// Tolerance for discretization-limited checks: base, or 10 h^2 on coarse grids.
inline double scaled_tolerance(double base, double h) { return std::max(base, 10.0 * h * h); }

namespace detail {

/// Constant-ball charge u^2 = 1 on r < R with R a grid node (u^2 = 1/2 there),
/// whose potential is 4 pi e (R^2/2 - r^2/6) inside and 4 pi e R^3 / (3 r) outside.
inline double ball_oracle_error(const GridPtr& g, double e) {
  std::size_t k = g->locate(1.0);
  if ((*g)[k + 1] - 1.0 < 1.0 - (*g)[k]) ++k;
  k = std::max<std::size_t>(k, 1);
  const double R = (*g)[k];
  std::vector<double> u(g->size(), 0.0);
  for (std::size_t i = 0; i < k; ++i) u[i] = 1.0;
  u[k] = std::sqrt(0.5);
  const PoissonSolution sol = solve_phi(RadialFunction(g, u), e);
  double err = 0.0;
  for (std::size_t i = 0; i < g->size(); ++i) {
    const double r = (*g)[i];
    const double exact = r < R ? four_pi * e * (R * R / 2.0 - r * r / 6.0) : four_pi * e * R * R * R / (3.0 * r);
    err = std::max(err, std::abs(sol.phi[i] - exact));
  }
  return err;
}

}  // namespace detail

inline std::vector<CheckResult> verify_battery(const RunConfig& cfg) {
  std::vector<CheckResult> out;
  auto add = [&](std::string name, double value, double tol, bool passed, std::string info = {}) {
    out.push_back({std::move(name), value, tol, passed, std::move(info)});
  };
  const GridPtr g = cfg.grid();
  const double h = g->max_spacing();
  const Nonlinearity f = cfg.nonlinearity.build();
  const Weight a = cfg.weight.build();
  const double c_f = compute_cf(f, cfg.e);
  const double threshold = a.sup_norm() > 0.0 ? 1.0 / (a.sup_norm() * c_f) : 1.0;
  const double lam_ref = cfg.lambda.value_or(2.0 * threshold);
  const Problem prob(g, cfg.e, lam_ref, a, f);
  std::mt19937_64 rng(cfg.solver.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  {
    const double err = detail::ball_oracle_error(g, cfg.e);
    const double tol = scaled_tolerance(1e-3, h);
    add("poisson_ball_oracle", err, tol, err <= tol, "max node error against the constant-ball potential");
  }

  std::vector<RadialFunction> profiles;
  for (std::size_t k = 0; k < cfg.verify_samples; ++k) {
    RadialFunction u = detail::random_bump(prob, rng);
    u.mutable_values().back() = 0.0;
    profiles.push_back(std::move(u));
  }
  {
    double worst = 0.0;
    for (const auto& u : profiles) worst = std::max(worst, potential_identity_residual(u, cfg.e));
    const double tol = scaled_tolerance(1e-3, h);
    add("potential_identity", worst, tol, worst <= tol, "|‖phi‖^2 - 4 pi e int phi u^2| / max(1, ‖phi‖^2)");
  }
  {
    const double d_star = cfg.d_star.value_or(estimate_d_star());
    double worst = std::numeric_limits<double>::infinity();
    bool ok = true;
    for (const auto& u : profiles) {
      const BoundsReport b = potential_bounds_check(u, cfg.e, d_star);
      ok = ok && b.ok;
      worst = std::min({worst, b.slack_d12 / b.phi_d12_bound, b.slack_interaction / b.interaction_bound});
    }
    add("potential_bounds", worst, 0.0, ok, "smallest relative slack of the d* bounds");
  }
  {
    double worst = 0.0;
    for (const auto& u : profiles) {
      const PoissonSolution sol = solve_phi(u, cfg.e);
      const double i = energy(u, prob, sol).i_lambda;
      worst = std::max(worst, std::abs(energy_full(u, sol.phi, prob) - i) / std::max(1.0, std::abs(i)));
    }
    add("reduced_energy_identity", worst, 1e-10, worst <= 1e-10, "J(u, phi_u) = I(u)");
  }
  {
    double worst = 0.0;
    for (const auto& u : profiles) {
      const Problem p = prob.with_lambda(4.0 * threshold * unit(rng));
      RadialFunction v = detail::random_bump(p, rng);
      v.mutable_values().back() = 0.0;
      const RadialFunction grad = gradient(u, p);
      double dot = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) dot += grad[i] * v[i];
      const double eps = 1e-7;
      std::vector<double> up(u.values().begin(), u.values().end()), um = up;
      for (std::size_t i = 0; i < up.size(); ++i) up[i] += eps * v[i], um[i] -= eps * v[i];
      const double fd = (energy(RadialFunction(g, up), p).i_lambda - energy(RadialFunction(g, um), p).i_lambda) /
                        (2.0 * eps);
      worst = std::max(worst, std::abs(fd - dot) / std::max(std::abs(fd), 1e-300));
    }
    add("gradient_fd", worst, 1e-5, worst <= 1e-5, "central-difference directional derivative");
  }
  if (!a.is_zero() && a.annulus().r_outer < g->r_max()) {
    double worst_h1 = std::numeric_limits<double>::infinity(), worst_m = worst_h1, worst_n = worst_h1;
    const double d_star = cfg.d_star.value_or(estimate_d_star());
    const double s125 = cfg.s125.value_or(estimate_s125());
    for (double s0 : {0.5, 1.0, 2.0}) {
      for (double sigma : {0.5, 0.9}) {
        const TruncationSpec spec{s0, sigma, a.annulus().r_inner, a.annulus().r_outer};
        const RadialFunction u = build_truncation(spec, g);
        const double h1sq = std::pow(discrete_h1(prob, u.values()), 2);
        const double lb = truncation_h1_lower_bound(spec);
        worst_h1 = std::min(worst_h1, (h1sq - lb) / std::max(1.0, lb));
        const EnergyBreakdown en = energy(u, prob);
        const double M = m_lower_bound(a, f, spec);
        worst_m = std::min(worst_m, (en.potential - M) / std::max(1.0, std::abs(M)));
        if (spec.r_inner == 0.0) {
          const double N = n_upper_bound(spec, cfg.e, d_star, s125);
          worst_n = std::min(worst_n, (N - en.e1) / std::max(1.0, N));
        }
      }
    }
    const double tol = scaled_tolerance(1e-3, h);
    add("truncation_h1_lower_bound", worst_h1, tol, worst_h1 >= -tol, "relative slack of the plateau H^1 bound");
    add("truncation_m_lower_bound", worst_m, tol, worst_m >= -tol, "relative slack of E2(u_sigma) >= M");
    if (std::isfinite(worst_n))
      add("truncation_n_upper_bound", worst_n, tol, worst_n >= -tol, "relative slack of E1(u_sigma) <= N");
  }
  if (!a.is_zero()) {
    std::vector<double> ratios;
    bool decreasing = true;
    for (double rho : {1e-1, 1e-2, 1e-3}) {
      const SupRatioProbe p = sup_ratio_probe(prob, rho, 10 * cfg.verify_samples, cfg.solver.seed);
      if (!ratios.empty() && !(p.ratio < ratios.back())) decreasing = false;
      ratios.push_back(p.ratio);
    }
    add("small_energy_probe", ratios.back(), 0.0, decreasing, "sup{E2 : E1 < rho}/rho decreases over rho = 1e-1, 1e-2, 1e-3");
  }
  return out;
}

inline int cmd_verify(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& err = std::cerr) {
  const HypothesisReport hyp = check_hypotheses(cfg.nonlinearity.build());
  if (!hyp.all_ok()) {
    err << "invalid model: hypothesis " << hyp.failures() << " fails\n";
    return exit_invalid_model;
  }
  const std::vector<CheckResult> checks = verify_battery(cfg);
  nlohmann::json arr = nlohmann::json::array();
  bool all = true;
  for (const auto& c : checks) {
    arr.push_back({{"name", c.name},
                   {"value", detail::finite_or_null(c.value)},
                   {"tolerance", c.tolerance},
                   {"passed", c.passed},
                   {"detail", c.detail}});
    if (!c.passed) {
      all = false;
      err << "check failed: " << c.name << " (value " << c.value << ", tolerance " << c.tolerance << ")\n";
    }
  }
  std::filesystem::create_directories(out_dir);
  detail::write_text(out_dir / "verify.json", nlohmann::json{{"passed", all}, {"checks", arr}}.dump(2) + "\n");
  return all ? exit_ok : exit_verification_failed;
}

}  // namespace smvar
