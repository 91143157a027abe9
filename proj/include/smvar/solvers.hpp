#pragma once

// Critical points of I_lambda on the radial grid: descent to minimizers, a
// climbing-string mountain-pass search, the non-existence certificate and
// the lambda sweep driver.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "smvar/bounds.hpp"
#include "smvar/energy.hpp"
#include "smvar/model.hpp"
#include "smvar/poisson.hpp"
#include "smvar/radial.hpp"

namespace smvar {

struct SolverOptions {
  double tol = 1e-6;            // minimizer residual
  double mp_tol = 1e-5;         // mountain-pass residual
  std::size_t max_iter = 100000;
  std::size_t mp_max_iter = 20000;
  double trivial_cutoff = 1e-4; // ‖u‖_{H^1} below this is the zero solution
  double distinct_cutoff = 1e-2;
  std::size_t path_nodes = 32;
  std::size_t random_starts = 3;
  std::uint64_t seed = 42;

  void validate() const {
    if (!(tol > 0.0 && mp_tol > 0.0 && trivial_cutoff > 0.0 && distinct_cutoff > 0.0))
      throw std::invalid_argument("SolverOptions: tolerances must be positive");
    if (max_iter == 0 || mp_max_iter == 0) throw std::invalid_argument("SolverOptions: iteration caps must be positive");
    if (path_nodes < 3) throw std::invalid_argument("SolverOptions: path needs at least 3 nodes");
  }

  friend bool operator==(const SolverOptions&, const SolverOptions&) = default;
};

enum class SolutionKind { trivial, minimizer, mountain_pass };
enum class SolverStatus { converged, iteration_cap, stalled, not_found };

inline std::string to_string(SolutionKind k) {
  switch (k) {
    case SolutionKind::trivial: return "trivial";
    case SolutionKind::minimizer: return "minimizer";
    case SolutionKind::mountain_pass: return "mountain-pass";
  }
  return "?";
}

inline std::string to_string(SolverStatus s) {
  switch (s) {
    case SolverStatus::converged: return "converged";
    case SolverStatus::iteration_cap: return "iteration-cap";
    case SolverStatus::stalled: return "stalled";
    case SolverStatus::not_found: return "not-found";
  }
  return "?";
}

struct SolutionPair {
  RadialFunction u;
  RadialFunction phi;
  double lambda = 0.0;
  EnergyBreakdown energy;
  double residual = 0.0;
  SolutionKind kind = SolutionKind::trivial;
  SolverStatus status = SolverStatus::converged;
  double h1_norm = 0.0;   // discrete ‖u‖_{H^1}
  double d12_norm = 0.0;  // ‖phi‖_{D^{1,2}}
  std::size_t iterations = 0;

  bool converged() const { return status == SolverStatus::converged; }
  bool nontrivial() const { return kind != SolutionKind::trivial; }
};

namespace detail {

inline SolutionPair make_pair(RadialFunction u, const Problem& prob, SolutionKind kind, SolverStatus status,
                              std::size_t iterations, const SolverOptions& opt) {
  PoissonSolution sol = solve_phi(u, prob.e());
  const EnergyBreakdown en = energy(u, prob, sol);
  const double res = dual_norm(gradient(u, prob, sol), prob);
  const double h1 = discrete_h1(prob, u.values());
  if (h1 < opt.trivial_cutoff) kind = SolutionKind::trivial;
  return SolutionPair{std::move(u), std::move(sol.phi), prob.lambda(), en, res, kind, status, h1, sol.d12_norm,
                      iterations};
}

inline double h1_distance(const Problem& prob, const RadialFunction& a, const RadialFunction& b) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = a[i] - b[i];
  return discrete_h1(prob, d);
}

/// Local metric P = A + W (1 + e phi + lambda alpha |f'(u)|), a positive
/// bound on the diagonal part of the Hessian of I_lambda; returns the
/// per-node mass factor.
inline std::vector<double> local_metric(const Problem& prob, std::span<const double> u, std::span<const double> phi) {
  const std::size_t n = prob.size();
  const auto a = prob.alpha();
  const auto& f = prob.nonlinearity();
  std::vector<double> local(n);
  for (std::size_t k = 0; k < n; ++k) {
    local[k] = 1.0 + prob.e() * phi[k];
    if (a[k] != 0.0) {
      const double h = 1e-6 * (1.0 + std::abs(u[k]));
      local[k] += prob.lambda() * a[k] * std::abs(f(u[k] + h) - f(u[k] - h)) / (2.0 * h);
    }
  }
  return local;
}

inline std::vector<double> local_metric_solve(const Problem& prob, std::span<const double> local,
                                              std::span<const double> g) {
  const std::size_t m = prob.size() - 1;
  const auto w = prob.grid().weights();
  const auto c = prob.stiffness();
  std::vector<double> diag(m), off(m - 1);
  for (std::size_t k = 0; k < m; ++k) {
    diag[k] = w[k] * local[k] + c[k] + (k > 0 ? c[k - 1] : 0.0);
    if (k + 1 < m) off[k] = -c[k];
  }
  std::vector<double> x = solve_tridiagonal(diag, off, g.first(m));
  x.push_back(0.0);
  return x;
}

/// v^T P v.
inline double local_metric_norm2(const Problem& prob, std::span<const double> local, std::span<const double> v) {
  const auto w = prob.grid().weights();
  const auto c = prob.stiffness();
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < v.size(); ++k) {
    const double d = v[k + 1] - v[k];
    s += c[k] * d * d + w[k] * local[k] * v[k] * v[k];
  }
  return s;
}

}  // namespace detail

/// Preconditioned steepest descent d = -P(u)^{-1} grad with Armijo
/// backtracking; the trial step starts at twice the last accepted one. The
/// stopping test uses the fixed H^{-1} residual.
inline SolutionPair minimize(const Problem& prob, const RadialFunction& u_init, const SolverOptions& opt = {}) {
  opt.validate();
  detail::check_compatible(u_init, prob);
  std::vector<double> start(u_init.values().begin(), u_init.values().end());
  start.back() = 0.0;
  RadialFunction u(prob.grid_ptr(), std::move(start));
  if (!std::isfinite(energy(u, prob).i_lambda)) throw std::invalid_argument("minimize: initial energy is not finite");

  const double armijo = 1e-4;
  double step = 1.0;
  SolverStatus status = SolverStatus::iteration_cap;
  std::size_t it = 0;
  for (; it < opt.max_iter; ++it) {
    const PoissonSolution sol = solve_phi(u, prob.e());
    const RadialFunction g = gradient(u, prob, sol);
    if (dual_norm(g, prob) <= opt.tol) {
      status = SolverStatus::converged;
      break;
    }
    std::vector<double> d = detail::local_metric_solve(prob, detail::local_metric(prob, u.values(), sol.phi.values()),
                                                       g.values());
    double slope = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) slope += g[i] * d[i];
    for (double& x : d) x = -x;
    double t = std::min(2.0 * step, 1e3);
    bool accepted = false;
    while (t > 1e-14) {
      if (energy_difference(u, sol, d, t, prob) <= -armijo * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      status = SolverStatus::stalled;
      break;
    }
    step = t;
    auto& v = u.mutable_values();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += t * d[i];
  }
  return detail::make_pair(std::move(u), prob, SolutionKind::minimizer, status, it, opt);
}

namespace detail {

struct PathNode {
  std::vector<double> u;
  double energy = 0.0;
  std::vector<double> grad;
  std::vector<double> local;  // mass factor of P
  std::vector<double> dir;    // P^{-1} grad
  double residual = 0.0;    // H^{-1} norm of grad
};

inline void evaluate_node(const Problem& prob, PathNode& node) {
  RadialFunction u(prob.grid_ptr(), node.u);
  const PoissonSolution sol = solve_phi(u, prob.e());
  node.energy = energy(u, prob, sol).i_lambda;
  const RadialFunction g = gradient(u, prob, sol);
  node.grad.assign(g.values().begin(), g.values().end());
  node.local = local_metric(prob, node.u, sol.phi.values());
  node.dir = local_metric_solve(prob, node.local, node.grad);
  node.residual = dual_norm(g, prob);
}

/// Moves nodes first+1..last-1 to equal H^1 arclength along the polygon
/// through nodes first..last.
inline void redistribute(const Problem& prob, std::vector<PathNode>& path, std::size_t first, std::size_t last) {
  if (last <= first + 1) return;
  const std::size_t m = last - first;
  std::vector<double> s(m + 1, 0.0);
  std::vector<double> diff(path[first].u.size());
  for (std::size_t j = 0; j < m; ++j) {
    const auto& a = path[first + j].u;
    const auto& b = path[first + j + 1].u;
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = b[i] - a[i];
    s[j + 1] = s[j] + discrete_h1(prob, diff);
  }
  if (!(s[m] > 0.0)) return;
  std::vector<std::vector<double>> old(m + 1);
  for (std::size_t j = 0; j <= m; ++j) old[j] = path[first + j].u;
  std::size_t seg = 0;
  for (std::size_t j = 1; j < m; ++j) {
    const double target = s[m] * static_cast<double>(j) / static_cast<double>(m);
    while (seg + 1 < m && s[seg + 1] < target) ++seg;
    const double len = s[seg + 1] - s[seg];
    const double theta = len > 0.0 ? (target - s[seg]) / len : 0.0;
    auto& out = path[first + j].u;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (1.0 - theta) * old[seg][i] + theta * old[seg + 1][i];
  }
}

/// A few power iterations on 3 I - P^{-1} H at node.u, which converge to the
/// most negative direction of the preconditioned Hessian H. Hessian-vector
/// products are central differences of the gradient. v is P-normalized.
inline void refine_unstable_direction(const Problem& prob, const PathNode& node, std::vector<double>& v,
                                      int iterations) {
  const std::size_t n = node.u.size();
  const double shift = 3.0;
  auto normalize = [&] {
    const double nv = std::sqrt(local_metric_norm2(prob, node.local, v));
    if (nv > 0.0)
      for (double& x : v) x /= nv;
  };
  normalize();
  const double scale = std::max(1.0, discrete_h1(prob, node.u));
  std::vector<double> up(n), um(n);
  for (int k = 0; k < iterations; ++k) {
    const double eps = 1e-6 * scale / std::max(discrete_h1(prob, v), 1e-300);
    for (std::size_t i = 0; i < n; ++i) up[i] = node.u[i] + eps * v[i], um[i] = node.u[i] - eps * v[i];
    const RadialFunction gp = gradient(RadialFunction(prob.grid_ptr(), up), prob);
    const RadialFunction gm = gradient(RadialFunction(prob.grid_ptr(), um), prob);
    std::vector<double> hv(n);
    for (std::size_t i = 0; i < n; ++i) hv[i] = (gp[i] - gm[i]) / (2.0 * eps);
    const std::vector<double> phv = local_metric_solve(prob, node.local, hv);
    for (std::size_t i = 0; i < n; ++i) v[i] = shift * v[i] - phv[i];
    v.back() = 0.0;
    normalize();
  }
}

}  // namespace detail

/// Climbing-string search between the wells 0 and u_well: interior path nodes
/// descend along -G^{-1} grad, the highest node climbs along the path tangent,
/// and the two halves are kept at equal H^1 arclength.
inline SolutionPair mountain_pass(const Problem& prob, const SolutionPair& u_well, const SolverOptions& opt = {}) {
  opt.validate();
  detail::check_compatible(u_well.u, prob);
  const double well_energy = energy(u_well.u, prob).i_lambda;
  if (!(well_energy < 0.0))
    throw std::invalid_argument("mountain_pass: the well must have negative energy, got " + std::to_string(well_energy));

  const std::size_t K = opt.path_nodes, n = prob.size();
  // The string spans [0, s_end u_well], s_end being the first point past the
  // energy barrier along the ray where I_lambda turns negative.
  double s_end = 1.0;
  {
    const int samples = 2000;
    double peak = 0.0;
    bool past_peak = false;
    for (int k = 1; k <= samples; ++k) {
      const double s = static_cast<double>(k) / samples;
      const double i = energy(u_well.u.scaled(s), prob).i_lambda;
      if (i >= peak) peak = i;
      else past_peak = true;
      if (past_peak && i < 0.0) {
        s_end = std::min(1.0, 1.5 * s);
        break;
      }
    }
  }
  std::vector<detail::PathNode> path(K);
  for (std::size_t j = 0; j < K; ++j) {
    const double s = s_end * static_cast<double>(j) / static_cast<double>(K - 1);
    path[j].u.resize(n);
    for (std::size_t i = 0; i < n; ++i) path[j].u[i] = s * u_well.u[i];
    path[j].u.back() = 0.0;
  }
  for (std::size_t j = 1; j + 1 < K; ++j) detail::evaluate_node(prob, path[j]);

  const std::vector<double> zero(n, 0.0);
  auto dist = [&](const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
    return discrete_h1(prob, d);
  };

  // String phase: runs until the peak residual stops improving.
  double dt = 0.5;
  double last_res = std::numeric_limits<double>::infinity(), best_res = last_res;
  std::size_t best_it = 0;
  SolverStatus status = SolverStatus::iteration_cap;
  std::size_t top = 1;
  std::size_t it = 0;
  std::vector<double> tau(n);
  for (; it < opt.mp_max_iter; ++it) {
    top = 1;
    for (std::size_t j = 2; j + 1 < K; ++j)
      if (path[j].energy > path[top].energy) top = j;
    const detail::PathNode& peak = path[top];
    for (std::size_t i = 0; i < n; ++i) tau[i] = path[top + 1].u[i] - path[top - 1].u[i];
    if (peak.residual <= opt.mp_tol) {
      status = SolverStatus::converged;
      break;
    }
    if (peak.residual < best_res) best_res = peak.residual, best_it = it;
    if (it >= best_it + 50) break;
    if (peak.residual > last_res) dt = std::max(0.5 * dt, 0.05);
    else dt = std::min(1.05 * dt, 1.0);
    last_res = peak.residual;

    // Reflect the P-component of the step along the path tangent.
    double gt = 0.0;
    for (std::size_t i = 0; i < n; ++i) gt += peak.grad[i] * tau[i];
    const double tpt = detail::local_metric_norm2(prob, peak.local, tau);
    const double coef = tpt > 0.0 ? 2.0 * gt / tpt : 0.0;
    for (std::size_t j = 1; j + 1 < K; ++j) {
      auto& u = path[j].u;
      const auto& d = path[j].dir;
      if (j == top) {
        for (std::size_t i = 0; i < n; ++i) u[i] -= dt * (d[i] - coef * tau[i]);
      } else {
        for (std::size_t i = 0; i < n; ++i) u[i] -= dt * d[i];
      }
      u.back() = 0.0;
    }
    detail::redistribute(prob, path, 0, top);
    detail::redistribute(prob, path, top, K - 1);
    for (std::size_t j = 1; j + 1 < K; ++j) detail::evaluate_node(prob, path[j]);
  }

  detail::PathNode x = path[top];
  if (status != SolverStatus::converged && it < opt.mp_max_iter) {
    // Refinement phase: the peak node alone climbs along the unstable
    // direction of the P-preconditioned Hessian, tracked by power iteration.
    std::vector<double> v = tau;
    detail::PathNode y;
    double step = 1.0;
    bool first = true;
    for (; it < opt.mp_max_iter; ++it) {
      if (x.residual <= opt.mp_tol) {
        status = SolverStatus::converged;
        break;
      }
      detail::refine_unstable_direction(prob, x, v, first ? 40 : 4);
      first = false;
      double gv = 0.0;
      for (std::size_t i = 0; i < n; ++i) gv += x.grad[i] * v[i];
      const double coef = 2.0 * gv / detail::local_metric_norm2(prob, x.local, v);
      bool accepted = false;
      while (step > 1e-8) {
        y.u = x.u;
        for (std::size_t i = 0; i < n; ++i) y.u[i] -= step * (x.dir[i] - coef * v[i]);
        y.u.back() = 0.0;
        detail::evaluate_node(prob, y);
        if (y.residual < x.residual) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) {
        status = SolverStatus::stalled;
        break;
      }
      std::swap(x, y);
      step = std::min(1.0, 2.0 * step);
    }
  }

  const std::vector<double> well(u_well.u.values().begin(), u_well.u.values().end());
  if (dist(x.u, zero) < opt.distinct_cutoff || dist(x.u, well) < opt.distinct_cutoff)
    status = SolverStatus::not_found;
  RadialFunction saddle(prob.grid_ptr(), std::move(x.u));
  return detail::make_pair(std::move(saddle), prob, SolutionKind::mountain_pass, status, it, opt);
}

// ---------------------------------------------------------------------------
// Non-existence certificate.

struct CandidateCheck {
  double h1_norm = 0.0;
  bool trivial = true;
  double residual = 0.0;
  bool solution = false;  // residual within the solver tolerance
  // (i) tested identity: int |u'|^2 + u^2 + e phi u^2 = lambda int alpha f(u) u
  double identity_lhs = 0.0, identity_rhs = 0.0, identity_tol = 0.0;
  bool identity_ok = true;
  // (ii) 4 sqrt(pi) e int |u|^3 <= int (|phi'|^2 / (4 pi) + |u'|^2)
  double cubic_lhs = 0.0, cubic_rhs = 0.0;
  bool cubic_ok = true;
  // (iii) int (u^2 + 4 sqrt(pi) e |u|^3) <= lambda ‖alpha‖_inf c_f int (u^2 + 4 sqrt(pi) e |u|^3)
  double contraction_lhs = 0.0, contraction_rhs = 0.0;
  bool inconsistent = false;  // a nontrivial solution on which the whole chain holds
};

struct NonexistenceReport {
  bool applicable = false;
  bool passes = false;
  double lambda = 0.0;
  double threshold = 0.0;
  double c_f = 0.0;
  std::vector<CandidateCheck> candidates;
};

/// Evaluates the non-existence chain of inequalities on each candidate.
/// Passes iff every candidate is trivial; a nontrivial candidate on which the
/// whole chain holds is flagged as an inconsistency.
inline NonexistenceReport certify_nonexistence(const Problem& prob, const std::vector<SolutionPair>& candidates,
                                               std::optional<double> c_f = std::nullopt,
                                               const SolverOptions& opt = {}) {
  NonexistenceReport rep;
  rep.lambda = prob.lambda();
  rep.c_f = c_f.value_or(compute_cf(prob.nonlinearity(), prob.e()));
  const double sup_alpha = prob.weight().sup_norm();
  rep.threshold = sup_alpha > 0.0 ? 1.0 / (sup_alpha * rep.c_f) : std::numeric_limits<double>::infinity();
  rep.applicable = prob.lambda() < rep.threshold;
  if (!rep.applicable) return rep;

  const auto w = prob.grid().weights();
  const auto a = prob.alpha();
  const auto& f = prob.nonlinearity();
  const double e = prob.e(), k4 = 4.0 * sqrt_pi() * e;
  rep.passes = true;
  for (const SolutionPair& c : candidates) {
    detail::check_compatible(c.u, prob);
    CandidateCheck chk;
    const PoissonSolution sol = solve_phi(c.u, e);
    chk.h1_norm = discrete_h1(prob, c.u.values());
    chk.trivial = chk.h1_norm < opt.trivial_cutoff;
    const double grad2 = 2.0 * detail::dirichlet_sum(prob, c.u.values());
    double m = 0.0, inter = 0.0, tested = 0.0, cubic = 0.0;
    for (std::size_t i = 0; i < c.u.size(); ++i) {
      const double v = c.u[i];
      m += w[i] * v * v;
      inter += w[i] * sol.phi[i] * v * v;
      if (a[i] != 0.0) tested += w[i] * a[i] * f(v) * v;
      cubic += w[i] * std::abs(v) * v * v;
    }
    chk.identity_lhs = grad2 + m + e * inter;
    chk.identity_rhs = prob.lambda() * tested;
    // |<grad I, u>| <= residual ‖u‖_{H^1}
    const double res = dual_norm(gradient(c.u, prob, sol), prob);
    chk.residual = res;
    chk.solution = res <= std::max(opt.tol, opt.mp_tol);
    chk.identity_tol = res * chk.h1_norm + 1e-12 * std::max(1.0, chk.identity_lhs);
    chk.identity_ok = std::abs(chk.identity_lhs - chk.identity_rhs) <= chk.identity_tol;
    chk.cubic_lhs = k4 * cubic;
    chk.cubic_rhs = sol.d12_norm * sol.d12_norm / four_pi + grad2;
    chk.cubic_ok = chk.cubic_lhs <= chk.cubic_rhs * (1.0 + 1e-6) + 1e-14;
    chk.contraction_lhs = m + k4 * cubic;
    chk.contraction_rhs = prob.lambda() * sup_alpha * rep.c_f * chk.contraction_lhs;
    chk.inconsistent = !chk.trivial && chk.solution && chk.identity_ok && chk.cubic_ok;
    if (!chk.trivial) rep.passes = false;
    rep.candidates.push_back(chk);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Lambda sweep.

struct SweepRecord {
  double lambda = 0.0;
  std::size_t n_solutions = 0;         // distinct nontrivial converged solutions
  std::vector<double> energies;        // I_lambda of each, ascending
  std::vector<double> h1_norms;
  double threshold = 0.0;
  std::optional<double> min_energy;    // lowest minimizer energy
  std::optional<double> mp_energy;     // mountain-pass energy
  std::string status = "ok";           // "ok" or a description of the failures
  std::vector<SolutionPair> solutions; // the distinct nontrivial solutions
  std::vector<SolutionPair> descents;  // every multi-start descent output, trivial ones included
  bool failed = false;                 // some job hit its iteration cap or stalled
};

namespace detail {

inline RadialFunction random_start(const Problem& prob, std::mt19937_64& rng) {
  RadialFunction v = random_bump(prob, rng);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double scale = std::pow(10.0, -0.5 + 1.5 * unit(rng));
  v = v.scaled(scale);
  v.mutable_values().back() = 0.0;
  return v;
}

/// Start built from the truncation profile: plateau over the annulus with a
/// value that makes I_lambda(u) negative when possible.
inline RadialFunction truncation_start(const Problem& prob) {
  const Annulus ann = prob.weight().annulus();
  const double r_outer = std::min(ann.r_outer, 0.5 * prob.grid().r_max());
  if (!(r_outer > ann.r_inner)) return prob.zero();
  RadialFunction best = prob.zero();
  double best_i = 0.0;
  for (int k = -6; k <= 12; ++k) {
    TruncationSpec spec{std::pow(2.0, k), 0.9, ann.r_inner, r_outer};
    RadialFunction u = build_truncation(spec, prob.grid_ptr());
    const double i = energy(u, prob).i_lambda;
    if (i < best_i) best_i = i, best = std::move(u);
  }
  if (best_i < 0.0) return best;
  return build_truncation(TruncationSpec{1.0, 0.9, ann.r_inner, r_outer}, prob.grid_ptr());
}

inline void insert_distinct(const Problem& prob, std::vector<SolutionPair>& found, SolutionPair s,
                            const SolverOptions& opt) {
  for (const auto& f : found)
    if (h1_distance(prob, f.u, s.u) <= opt.distinct_cutoff) return;
  found.push_back(std::move(s));
}

}  // namespace detail

/// Multi-start descent (zero, truncation profile, random starts) and a
/// mountain-pass search from the lowest negative-energy minimizer.
inline SweepRecord solve_at(const Problem& prob, const SolverOptions& opt, std::uint64_t seed, double threshold) {
  SweepRecord rec;
  rec.lambda = prob.lambda();
  rec.threshold = threshold;
  std::vector<std::string> failures;
  std::vector<RadialFunction> starts;
  starts.push_back(prob.zero());
  starts.push_back(detail::truncation_start(prob));
  std::mt19937_64 rng(seed);
  for (std::size_t k = 0; k < opt.random_starts; ++k) starts.push_back(detail::random_start(prob, rng));

  std::vector<SolutionPair> found;
  std::vector<std::string> notes;
  for (const auto& s : starts) {
    SolutionPair m = minimize(prob, s, opt);
    rec.descents.push_back(m);
    if (!m.converged()) {
      failures.push_back("minimize " + to_string(m.status));
      continue;
    }
    if (m.nontrivial()) detail::insert_distinct(prob, found, std::move(m), opt);
  }
  const SolutionPair* well = nullptr;
  for (const auto& s : found)
    if (s.energy.i_lambda < 0.0 && (!well || s.energy.i_lambda < well->energy.i_lambda)) well = &s;
  if (well) {
    rec.min_energy = well->energy.i_lambda;
    SolutionPair mp = mountain_pass(prob, *well, opt);
    if (mp.converged() && mp.nontrivial()) {
      rec.mp_energy = mp.energy.i_lambda;
      detail::insert_distinct(prob, found, std::move(mp), opt);
    } else if (mp.status == SolverStatus::not_found || mp.converged()) {
      notes.push_back("mountain-pass not-found");
    } else {
      failures.push_back("mountain-pass " + to_string(mp.status));
    }
  } else {
    for (const auto& s : found)
      if (!rec.min_energy || s.energy.i_lambda < *rec.min_energy) rec.min_energy = s.energy.i_lambda;
  }
  std::sort(found.begin(), found.end(),
            [](const SolutionPair& x, const SolutionPair& y) { return x.energy.i_lambda < y.energy.i_lambda; });
  for (const auto& s : found) {
    rec.energies.push_back(s.energy.i_lambda);
    rec.h1_norms.push_back(s.h1_norm);
  }
  rec.n_solutions = found.size();
  rec.solutions = std::move(found);
  rec.failed = !failures.empty();
  failures.insert(failures.end(), notes.begin(), notes.end());
  if (!failures.empty()) {
    rec.status.clear();
    for (std::size_t i = 0; i < failures.size(); ++i) rec.status += (i ? "; " : "") + failures[i];
  }
  return rec;
}

/// Per-lambda seed derived from the run seed and the lambda index.
inline std::uint64_t job_seed(std::uint64_t seed, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

/// One record per lambda (ascending), computed on up to `jobs` threads.
inline std::vector<SweepRecord> sweep(const Problem& templ, const std::vector<double>& lambdas,
                                      const SolverOptions& opt = {}, unsigned jobs = 1) {
  opt.validate();
  if (!std::is_sorted(lambdas.begin(), lambdas.end())) throw std::invalid_argument("sweep: lambdas must be ascending");
  const double c_f = compute_cf(templ.nonlinearity(), templ.e());
  const double sup_alpha = templ.weight().sup_norm();
  const double threshold = sup_alpha > 0.0 ? 1.0 / (sup_alpha * c_f) : std::numeric_limits<double>::infinity();
  std::vector<SweepRecord> out(lambdas.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < lambdas.size(); i = next++) {
      try {
        out[i] = solve_at(templ.with_lambda(lambdas[i]), opt, job_seed(opt.seed, i), threshold);
      } catch (const std::exception& ex) {
        out[i] = SweepRecord{};
        out[i].lambda = lambdas[i];
        out[i].threshold = threshold;
        out[i].failed = true;
        out[i].status = std::string("error: ") + ex.what();
      }
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(1, lambdas.size()))));
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return out;
}

}  // namespace smvar
