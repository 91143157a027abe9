#pragma once

// Run configuration: a JSON document, parsed and written field for field.

#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "smvar/energy.hpp"
#include "smvar/model.hpp"
#include "smvar/radial.hpp"
#include "smvar/solvers.hpp"

namespace smvar {

struct NonlinearitySpec {
  std::string kind = "min-abs-powers";
  double r = 0.5;
  double p = 2.0;
  std::vector<double> s;  // custom-table abscissae
  std::vector<double> f;  // custom-table values

  Nonlinearity build() const {
    switch (nonlinearity_kind_from_string(kind)) {
      case NonlinearityKind::min_abs_powers: return Nonlinearity::min_abs_powers(r, p);
      case NonlinearityKind::min_plus_powers: return Nonlinearity::min_plus_powers(r, p);
      case NonlinearityKind::log_square: return Nonlinearity::log_square();
      case NonlinearityKind::custom_table: return Nonlinearity::table(s, f);
    }
    throw InvalidModel("unknown nonlinearity kind");
  }

  friend bool operator==(const NonlinearitySpec&, const NonlinearitySpec&) = default;
};

struct WeightSpec {
  std::string kind = "constant-annulus";
  double level = 1.0;
  double r_inner = 0.0;
  double r_outer = 1.0;
  double q = 0.5;
  double beta = 2.0;
  double alpha0 = 0.0;       // custom-table annulus lower bound; 0 means "take the table minimum"
  std::vector<double> r;     // custom-table radii
  std::vector<double> alpha; // custom-table values

  Weight build() const {
    switch (weight_kind_from_string(kind)) {
      case WeightKind::constant_annulus: return Weight::constant_annulus(level, r_inner, r_outer, q);
      case WeightKind::gaussian: return Weight::gaussian(r_outer, q);
      case WeightKind::power_decay: return Weight::power_decay(beta, r_outer, q);
      case WeightKind::custom_table: return Weight::table(r, alpha, Annulus{r_inner, r_outer, alpha0}, q);
    }
    throw InvalidModel("unknown weight kind");
  }

  friend bool operator==(const WeightSpec&, const WeightSpec&) = default;
};

struct RunConfig {
  // problem
  double e = 1.0;
  std::optional<double> lambda;
  std::vector<double> lambdas;
  NonlinearitySpec nonlinearity;
  WeightSpec weight;
  // discretization
  double r_max = 20.0;
  std::size_t n = 2000;
  std::string quadrature = "trapezoid";
  // constants (estimated when absent)
  std::optional<double> d_star;
  std::optional<double> s125;
  std::optional<double> rho0;
  // solver
  SolverOptions solver;
  // verification battery
  std::size_t verify_samples = 10;
  // output
  std::string out_dir = "out";

  void validate() const {
    if (!(e > 0.0) || !std::isfinite(e)) throw std::invalid_argument("config: e must be positive");
    if (!(r_max > weight.r_outer)) throw std::invalid_argument("config: r_max must exceed weight.r_outer");
    if (n < 64) throw std::invalid_argument("config: n must be at least 64");
    quadrature_from_string(quadrature);
    if (lambda && !(*lambda >= 0.0)) throw std::invalid_argument("config: lambda must be >= 0");
    for (double l : lambdas)
      if (!(l >= 0.0) || !std::isfinite(l)) throw std::invalid_argument("config: lambdas must be finite and >= 0");
    if (d_star && !(*d_star > 0.0)) throw std::invalid_argument("config: d_star must be positive");
    if (s125 && !(*s125 > 0.0)) throw std::invalid_argument("config: s_125 must be positive");
    if (rho0 && !(*rho0 > 0.0)) throw std::invalid_argument("config: rho0 must be positive");
    if (verify_samples == 0) throw std::invalid_argument("config: verify.samples must be positive");
    solver.validate();
  }

  GridPtr grid() const { return RadialGrid::uniform(r_max, n, quadrature_from_string(quadrature)); }

  Problem problem(double lam) const { return Problem(grid(), e, lam, weight.build(), nonlinearity.build()); }

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

namespace detail {

template <class T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) j.at(key).get_to(out);
}

template <class T>
void read_opt(const nlohmann::json& j, const char* key, std::optional<T>& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

template <class T>
nlohmann::json opt_json(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace detail

inline nlohmann::json to_json(const RunConfig& c) {
  using nlohmann::json;
  json j;
  j["problem"] = {
      {"e", c.e},
      {"lambda", detail::opt_json(c.lambda)},
      {"lambdas", c.lambdas},
      {"nonlinearity", {{"kind", c.nonlinearity.kind}, {"r", c.nonlinearity.r}, {"p", c.nonlinearity.p},
                        {"s", c.nonlinearity.s}, {"f", c.nonlinearity.f}}},
      {"weight", {{"kind", c.weight.kind}, {"level", c.weight.level}, {"r_inner", c.weight.r_inner},
                  {"r_outer", c.weight.r_outer}, {"q", c.weight.q}, {"beta", c.weight.beta},
                  {"alpha0", c.weight.alpha0}, {"r", c.weight.r}, {"alpha", c.weight.alpha}}},
  };
  j["discretization"] = {{"r_max", c.r_max}, {"n", c.n}, {"quadrature", c.quadrature}};
  j["constants"] = {{"d_star", detail::opt_json(c.d_star)},
                    {"s_125", detail::opt_json(c.s125)},
                    {"rho0", detail::opt_json(c.rho0)}};
  j["solver"] = {{"tol", c.solver.tol},
                 {"mp_tol", c.solver.mp_tol},
                 {"max_iter", c.solver.max_iter},
                 {"mp_max_iter", c.solver.mp_max_iter},
                 {"trivial_cutoff", c.solver.trivial_cutoff},
                 {"distinct_cutoff", c.solver.distinct_cutoff},
                 {"path_nodes", c.solver.path_nodes},
                 {"random_starts", c.solver.random_starts},
                 {"seed", c.solver.seed}};
  j["verify"] = {{"samples", c.verify_samples}};
  j["output"] = {{"directory", c.out_dir}};
  return j;
}

inline RunConfig config_from_json(const nlohmann::json& j) {
  using detail::read_opt;
  RunConfig c;
  try {
    if (j.contains("problem")) {
      const auto& p = j.at("problem");
      read_opt(p, "e", c.e);
      read_opt(p, "lambda", c.lambda);
      read_opt(p, "lambdas", c.lambdas);
      if (p.contains("nonlinearity")) {
        const auto& f = p.at("nonlinearity");
        read_opt(f, "kind", c.nonlinearity.kind);
        read_opt(f, "r", c.nonlinearity.r);
        read_opt(f, "p", c.nonlinearity.p);
        read_opt(f, "s", c.nonlinearity.s);
        read_opt(f, "f", c.nonlinearity.f);
      }
      if (p.contains("weight")) {
        const auto& a = p.at("weight");
        read_opt(a, "kind", c.weight.kind);
        read_opt(a, "level", c.weight.level);
        read_opt(a, "r_inner", c.weight.r_inner);
        read_opt(a, "r_outer", c.weight.r_outer);
        read_opt(a, "q", c.weight.q);
        read_opt(a, "beta", c.weight.beta);
        read_opt(a, "alpha0", c.weight.alpha0);
        read_opt(a, "r", c.weight.r);
        read_opt(a, "alpha", c.weight.alpha);
      }
    }
    if (j.contains("discretization")) {
      const auto& d = j.at("discretization");
      read_opt(d, "r_max", c.r_max);
      read_opt(d, "n", c.n);
      read_opt(d, "quadrature", c.quadrature);
    }
    if (j.contains("constants")) {
      const auto& k = j.at("constants");
      read_opt(k, "d_star", c.d_star);
      read_opt(k, "s_125", c.s125);
      read_opt(k, "rho0", c.rho0);
    }
    if (j.contains("solver")) {
      const auto& s = j.at("solver");
      read_opt(s, "tol", c.solver.tol);
      read_opt(s, "mp_tol", c.solver.mp_tol);
      read_opt(s, "max_iter", c.solver.max_iter);
      read_opt(s, "mp_max_iter", c.solver.mp_max_iter);
      read_opt(s, "trivial_cutoff", c.solver.trivial_cutoff);
      read_opt(s, "distinct_cutoff", c.solver.distinct_cutoff);
      read_opt(s, "path_nodes", c.solver.path_nodes);
      read_opt(s, "random_starts", c.solver.random_starts);
      read_opt(s, "seed", c.solver.seed);
    }
    if (j.contains("verify")) read_opt(j.at("verify"), "samples", c.verify_samples);
    if (j.contains("output")) read_opt(j.at("output"), "directory", c.out_dir);
  } catch (const nlohmann::json::exception& ex) {
    throw std::invalid_argument(std::string("config: ") + ex.what());
  }
  c.validate();
  return c;
}

inline RunConfig parse_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& ex) {
    throw std::invalid_argument(std::string("config: ") + ex.what());
  }
  return config_from_json(j);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

inline std::string dump_config(const RunConfig& c) { return to_json(c).dump(2); }

/// SMVAR_SEED, when set, replaces solver.seed.
inline void apply_env_overrides(RunConfig& c) {
  if (const char* s = std::getenv("SMVAR_SEED"); s && *s) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s, &end, 10);
    if (*end != '\0') throw std::invalid_argument(std::string("SMVAR_SEED is not an unsigned integer: ") + s);
    c.solver.seed = v;
  }
}

}  // namespace smvar
