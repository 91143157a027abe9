#pragma once

// Reduction map u -> phi_u solving -Laplace(phi) = 4 pi e u^2 on R^3, and the
// identity/bound checks for phi_u.
//
// The primary solver is the Newton potential in closed form,
//
//   phi(r) = 4 pi e [ (1/r) int_0^r s^2 u^2 ds + int_r^inf s u^2 ds ]
//          = e sum_j w_j u_j^2 / max(r, r_j),
//
// evaluated with the grid quadrature weights w_j. The kernel 1/max(r_i, r_j)
// is the exact inverse of the discrete Dirichlet form
//
//   D(phi) = 4 pi [ sum_k r_k r_{k+1} (phi_{k+1} - phi_k)^2 / h_k + r_max phi_{n-1}^2 ],
//
// whose last term is the energy of the monopole tail phi(r_max) r_max / r
// outside the grid. Hence D(phi_u) = 4 pi e sum_i w_i phi_i u_i^2 holds to
// round-off, which is what makes J(u, phi_u) = I(u) exact on the grid.

#include <cmath>
#include <span>
#include <vector>

#include "smvar/radial.hpp"

namespace smvar {

struct PoissonSolution {
  RadialFunction phi;
  double d12_norm = 0.0;     // sqrt(D(phi)), includes the exterior tail
  double interaction = 0.0;  // int phi u^2
  double charge = 0.0;       // e int u^2, the monopole coefficient: phi ~ charge / r outside supp u
};

namespace detail {

/// phi_i = e sum_j w_j rho_j / max(r_i, r_j) in O(n).
inline std::vector<double> newton_potential(const RadialGrid& g, std::span<const double> rho, double e) {
  const std::size_t n = g.size();
  const auto w = g.weights();
  std::vector<double> phi(n);
  std::vector<double> outer(n + 1, 0.0);  // outer[i] = sum_{j >= i} w_j rho_j / r_j
  for (std::size_t j = n; j-- > 1;) outer[j] = outer[j + 1] + w[j] * rho[j] / g[j];
  outer[0] = outer[1];  // w_0 = 0
  double inner = 0.0;   // sum_{j <= i} w_j rho_j
  phi[0] = e * outer[1];
  for (std::size_t i = 1; i < n; ++i) {
    inner += w[i] * rho[i];
    phi[i] = e * (inner / g[i] + outer[i + 1]);
  }
  return phi;
}

/// D(phi) / (4 pi) with the geometric-mean radial weights and exterior tail.
inline double potential_dirichlet_form(const RadialGrid& g, std::span<const double> phi) {
  const std::size_t n = g.size();
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double d = phi[k + 1] - phi[k];
    s += g[k] * g[k + 1] * d * d / g.spacing(k);
  }
  s += g.r_max() * phi[n - 1] * phi[n - 1];
  return s;
}

}  // namespace detail

/// ||phi||_{D^{1,2}}^2 for a potential whose exterior continuation is the
/// monopole phi(r_max) r_max / r.
inline double potential_d12_squared(const RadialFunction& phi) {
  return four_pi * detail::potential_dirichlet_form(phi.grid(), phi.values());
}

inline PoissonSolution solve_phi(const RadialFunction& u, double e) {
  if (!(e > 0.0)) throw std::invalid_argument("solve_phi: coupling e must be positive");
  const auto& g = u.grid();
  std::vector<double> rho(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) rho[i] = u[i] * u[i];
  RadialFunction phi(u.grid_ptr(), detail::newton_potential(g, rho, e));
  const auto w = g.weights();
  double inter = 0.0, mass = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    inter += w[i] * phi[i] * rho[i];
    mass += w[i] * rho[i];
  }
  const double d12 = std::sqrt(potential_d12_squared(phi));
  return {std::move(phi), d12, inter, e * mass};
}

/// Independent cross-check: vertex-centred finite volumes for
/// -(1/r^2)(r^2 phi')' = 4 pi e u^2 with symmetry at r = 0 and the Robin
/// condition r phi' + phi = 0 at r_max.
inline RadialFunction solve_phi_fd(const RadialFunction& u, double e) {
  const auto& g = u.grid();
  const std::size_t n = g.size();
  std::vector<double> diag(n, 0.0), off(n - 1, 0.0), rhs(n, 0.0);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double rm = 0.5 * (g[k] + g[k + 1]);
    const double c = rm * rm / g.spacing(k);
    diag[k] += c;
    diag[k + 1] += c;
    off[k] = -c;
  }
  diag[n - 1] += g.r_max();
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = i == 0 ? 0.0 : 0.5 * (g[i - 1] + g[i]);
    const double hi = i + 1 == n ? g[i] : 0.5 * (g[i] + g[i + 1]);
    const double vol = (hi * hi * hi - lo * lo * lo) / 3.0;
    rhs[i] = four_pi * e * u[i] * u[i] * vol;
  }
  return RadialFunction(u.grid_ptr(), solve_tridiagonal(diag, off, rhs));
}

/// |‖phi_u‖^2_{D^{1,2}} - 4 pi e int phi_u u^2| / max(1, ‖phi_u‖^2), with the
/// gradient norm taken from the generic finite-difference norm algebra plus
/// the exact exterior tail, so the residual measures discretization error.
inline double potential_identity_residual(const RadialFunction& u, double e) {
  const PoissonSolution sol = solve_phi(u, e);
  const double inside = norms(sol.phi).d12;
  const double tail = four_pi * u.grid().r_max() * sol.phi.values().back() * sol.phi.values().back();
  const double d12_sq = inside * inside + tail;
  return std::abs(d12_sq - four_pi * e * sol.interaction) / std::max(1.0, d12_sq);
}

struct BoundsReport {
  double phi_d12 = 0.0;
  double phi_d12_bound = 0.0;     // 4 pi e d* ‖u‖^2_{12/5}
  double interaction = 0.0;
  double interaction_bound = 0.0; // 4 pi e d*^2 ‖u‖^4_{12/5}
  double slack_d12 = 0.0;         // bound - value
  double slack_interaction = 0.0;
  bool ok = true;
};

inline BoundsReport potential_bounds_check(const RadialFunction& u, double e, double d_star, double rel_tol = 1e-9) {
  if (!(d_star > 0.0)) throw std::invalid_argument("potential_bounds_check: d_star must be positive");
  const PoissonSolution sol = solve_phi(u, e);
  const double l125 = lp_norm(u, p_twelve_fifths);
  BoundsReport rep;
  rep.phi_d12 = sol.d12_norm;
  rep.phi_d12_bound = four_pi * e * d_star * l125 * l125;
  rep.interaction = sol.interaction;
  rep.interaction_bound = four_pi * e * d_star * d_star * l125 * l125 * l125 * l125;
  rep.slack_d12 = rep.phi_d12_bound - rep.phi_d12;
  rep.slack_interaction = rep.interaction_bound - rep.interaction;
  rep.ok = rep.slack_d12 >= -rel_tol * rep.phi_d12_bound && rep.slack_interaction >= -rel_tol * rep.interaction_bound;
  return rep;
}

// ---------------------------------------------------------------------------
// Embedding-constant estimates (usable values, not claimed sharp).

namespace detail {

template <class Fn>
double golden_max(Fn&& fn, double lo, double hi, int iters = 120) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = fn(x1), f2 = fn(x2);
  for (int it = 0; it < iters; ++it) {
    if (f1 < f2) {
      lo = x1; x1 = x2; f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = fn(x2);
    } else {
      hi = x2; x2 = x1; f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = fn(x1);
    }
  }
  return std::max(f1, f2);
}

}  // namespace detail

/// Estimate of d* (‖phi‖_6 <= d* ‖phi‖_{D^{1,2}}) from the family
/// phi_beta(r) = (1 + r^2)^{-beta}, beta >= 1/2, whose norms are Beta integrals:
/// ‖phi‖_6^6 = 2 pi B(3/2, 6 beta - 3/2), ‖phi‖_D^2 = 8 pi beta^2 B(5/2, 2 beta - 1/2).
inline double estimate_d_star() {
  auto ratio = [](double beta) {
    const double l6 = std::pow(2.0 * pi * std::beta(1.5, 6.0 * beta - 1.5), 1.0 / 6.0);
    const double d = std::sqrt(8.0 * pi * beta * beta * std::beta(2.5, 2.0 * beta - 0.5));
    return l6 / d;
  };
  double best = ratio(0.5);
  for (double b = 0.5; b <= 4.0; b += 0.05) best = std::max(best, ratio(b));
  return std::max(best, detail::golden_max(ratio, 0.5, 1.0));
}

/// Estimate of s_{12/5} (‖u‖_{12/5} <= s ‖u‖_{H^1}) over Gaussians exp(-r^2/a^2):
/// ‖u‖_p^p = (pi a^2 / p)^{3/2}, ‖u‖_{H^1}^2 = (pi a^2 / 2)^{3/2} (1 + 3 / a^2).
inline double estimate_s125() {
  auto ratio = [](double log_a) {
    const double a2 = std::exp(2.0 * log_a);
    const double l = std::pow(pi * a2 * 5.0 / 12.0, 1.5 * 5.0 / 12.0);
    const double h = std::sqrt(std::pow(pi * a2 / 2.0, 1.5) * (1.0 + 3.0 / a2));
    return l / h;
  };
  double best = 0.0, arg = 0.0;
  for (double t = -3.0; t <= 3.0; t += 0.01) {
    const double v = ratio(t);
    if (v > best) best = v, arg = t;
  }
  return std::max(best, detail::golden_max(ratio, arg - 0.02, arg + 0.02));
}

}  // namespace smvar
