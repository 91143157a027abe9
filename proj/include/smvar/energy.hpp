#pragma once

// Reduced functional I_lambda = E1 - lambda E2 on the radial grid, its exact
// discrete gradient and the H^{-1} residual.
//
// Discrete energy (u_{n-1} = 0 is held fixed):
//   dirichlet = 1/2 sum_k c_k (u_{k+1} - u_k)^2,  c_k = 4 pi (r_k^2 + r_k r_{k+1} + r_{k+1}^2) / (3 h_k)
//   mass      = 1/2 sum_i w_i u_i^2
//   coupling  = e/4 sum_i w_i phi_i u_i^2
//   potential = sum_i w_i alpha_i F(u_i)
// c_k integrates |u'|^2 exactly for piecewise-linear u.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "smvar/model.hpp"
#include "smvar/poisson.hpp"
#include "smvar/radial.hpp"

namespace smvar {

class Problem {
 public:
  Problem(GridPtr grid, double e, double lambda, Weight weight, Nonlinearity f)
      : grid_(std::move(grid)), e_(e), lambda_(lambda), weight_(std::move(weight)), f_(std::move(f)) {
    if (!grid_) throw std::invalid_argument("Problem: null grid");
    if (!(e_ > 0.0)) throw std::invalid_argument("Problem: coupling e must be positive");
    if (!(lambda_ >= 0.0) || !std::isfinite(lambda_)) throw std::invalid_argument("Problem: lambda must be >= 0");
    const std::size_t n = grid_->size();
    alpha_.resize(n);
    for (std::size_t i = 0; i < n; ++i) alpha_[i] = weight_((*grid_)[i]);
    stiffness_.resize(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
      const double a = (*grid_)[k], b = (*grid_)[k + 1];
      stiffness_[k] = four_pi * (a * a + a * b + b * b) / (3.0 * grid_->spacing(k));
    }
  }

  Problem with_lambda(double lambda) const {
    Problem p(*this);
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("Problem: lambda must be >= 0");
    p.lambda_ = lambda;
    return p;
  }

  const GridPtr& grid_ptr() const { return grid_; }
  const RadialGrid& grid() const { return *grid_; }
  double e() const { return e_; }
  double lambda() const { return lambda_; }
  const Weight& weight() const { return weight_; }
  const Nonlinearity& nonlinearity() const { return f_; }
  std::span<const double> alpha() const { return alpha_; }
  std::span<const double> stiffness() const { return stiffness_; }
  std::size_t size() const { return grid_->size(); }

  RadialFunction zero() const { return RadialFunction(grid_); }

 private:
  GridPtr grid_;
  double e_;
  double lambda_;
  Weight weight_;
  Nonlinearity f_;
  std::vector<double> alpha_;
  std::vector<double> stiffness_;
};

struct EnergyBreakdown {
  double dirichlet = 0.0;  // 1/2 int |u'|^2
  double mass = 0.0;       // 1/2 int u^2
  double coupling = 0.0;   // e/4 int phi_u u^2
  double potential = 0.0;  // int alpha F(u)
  double e1 = 0.0;
  double i_lambda = 0.0;
};

namespace detail {

inline void check_compatible(const RadialFunction& u, const Problem& prob) {
  if (u.grid_ptr() == prob.grid_ptr()) return;
  const auto a = u.grid().nodes(), b = prob.grid().nodes();
  if (a.size() != b.size() || !std::equal(a.begin(), a.end(), b.begin()))
    throw std::invalid_argument("profile and problem live on different grids");
}

inline double dirichlet_sum(const Problem& prob, std::span<const double> u) {
  const auto c = prob.stiffness();
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < u.size(); ++k) {
    const double d = u[k + 1] - u[k];
    s += c[k] * d * d;
  }
  return 0.5 * s;
}

}  // namespace detail

/// H^1 norm consistent with the energy discretization: sqrt(2 dirichlet + 2 mass).
inline double discrete_h1(const Problem& prob, std::span<const double> u) {
  const auto w = prob.grid().weights();
  double m = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) m += w[i] * u[i] * u[i];
  return std::sqrt(2.0 * detail::dirichlet_sum(prob, u) + m);
}

inline EnergyBreakdown energy(const RadialFunction& u, const Problem& prob, const PoissonSolution& sol) {
  detail::check_compatible(u, prob);
  const auto w = prob.grid().weights();
  const auto a = prob.alpha();
  const auto& f = prob.nonlinearity();
  EnergyBreakdown en;
  en.dirichlet = detail::dirichlet_sum(prob, u.values());
  double m = 0.0, pot = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    m += w[i] * u[i] * u[i];
    if (a[i] != 0.0) pot += w[i] * a[i] * f.F(u[i]);
  }
  en.mass = 0.5 * m;
  en.coupling = 0.25 * prob.e() * sol.interaction;
  en.potential = pot;
  en.e1 = en.dirichlet + en.mass + en.coupling;
  en.i_lambda = en.e1 - prob.lambda() * en.potential;
  return en;
}

inline EnergyBreakdown energy(const RadialFunction& u, const Problem& prob) {
  return energy(u, prob, solve_phi(u, prob.e()));
}

/// J_lambda(u, phi) = 1/2 int |u'|^2 + 1/2 int u^2 + e/2 int phi u^2
///                    - 1/(16 pi) int |phi'|^2 - lambda int alpha F(u).
inline double energy_full(const RadialFunction& u, const RadialFunction& phi, const Problem& prob) {
  detail::check_compatible(u, prob);
  detail::check_compatible(phi, prob);
  const auto w = prob.grid().weights();
  const auto a = prob.alpha();
  double m = 0.0, inter = 0.0, pot = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    m += w[i] * u[i] * u[i];
    inter += w[i] * phi[i] * u[i] * u[i];
    if (a[i] != 0.0) pot += w[i] * a[i] * prob.nonlinearity().F(u[i]);
  }
  return detail::dirichlet_sum(prob, u.values()) + 0.5 * m + 0.5 * prob.e() * inter -
         potential_d12_squared(phi) / (16.0 * pi) - prob.lambda() * pot;
}

/// Euclidean gradient of the discrete I_lambda: <g, v> is the directional
/// derivative along v for every v with v_{n-1} = 0. Nodal form
///   g_k = (A u)_k + w_k (u_k + e phi_k u_k - lambda alpha_k f(u_k)),
/// with A the conservative radial Laplacian; g_{n-1} = 0.
inline RadialFunction gradient(const RadialFunction& u, const Problem& prob, const PoissonSolution& sol) {
  detail::check_compatible(u, prob);
  const std::size_t n = u.size();
  const auto w = prob.grid().weights();
  const auto a = prob.alpha();
  const auto c = prob.stiffness();
  const auto& f = prob.nonlinearity();
  const double e = prob.e(), lambda = prob.lambda();
#ifdef SMVAR_INJECT_COUPLING_SIGN_ERROR
  const double coupling_sign = -1.0;
#else
  const double coupling_sign = 1.0;
#endif
  std::vector<double> g(n, 0.0);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double flux = c[k] * (u[k + 1] - u[k]);
    g[k] -= flux;
    g[k + 1] += flux;
  }
  for (std::size_t i = 0; i < n; ++i) {
    double local = u[i] + coupling_sign * e * sol.phi[i] * u[i];
    if (a[i] != 0.0) local -= lambda * a[i] * f(u[i]);
    g[i] += w[i] * local;
  }
  g[n - 1] = 0.0;
  return RadialFunction(u.grid_ptr(), std::move(g));
}

inline RadialFunction gradient(const RadialFunction& u, const Problem& prob) {
  return gradient(u, prob, solve_phi(u, prob.e()));
}

/// Riesz map of the discrete H^1 inner product (A + W) on the free nodes
/// 0..n-2: returns G^{-1} g, with a zero at the Dirichlet node.
inline std::vector<double> h1_riesz(const Problem& prob, std::span<const double> g) {
  const std::size_t n = prob.size(), m = n - 1;
  const auto w = prob.grid().weights();
  const auto c = prob.stiffness();
  std::vector<double> diag(m), off(m - 1);
  for (std::size_t k = 0; k < m; ++k) {
    diag[k] = w[k] + c[k] + (k > 0 ? c[k - 1] : 0.0);
    if (k + 1 < m) off[k] = -c[k];
  }
  std::vector<double> x = solve_tridiagonal(diag, off, g.first(m));
  x.push_back(0.0);
  return x;
}

/// Discrete H^{-1} norm of a gradient vector, sqrt(g^T G^{-1} g).
inline double dual_norm(const RadialFunction& grad, const Problem& prob) {
  const std::vector<double> x = h1_riesz(prob, grad.values());
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += grad[i] * x[i];
  return std::sqrt(std::max(0.0, s));
}

/// Weak-form residual of u in the discrete H^{-1} norm; zero exactly at the
/// discrete weak solutions (u, phi_u).
inline double residual_norm(const RadialFunction& u, const Problem& prob) {
  return dual_norm(gradient(u, prob), prob);
}

/// I(u + t d) - I(u), evaluated term by term so that tiny differences near a
/// critical point are not lost to cancellation.
inline double energy_difference(const RadialFunction& u, const PoissonSolution& sol, std::span<const double> d,
                                double t, const Problem& prob) {
  const std::size_t n = u.size();
  const auto w = prob.grid().weights();
  const auto a = prob.alpha();
  const auto c = prob.stiffness();
  const auto& f = prob.nonlinearity();
  double dd = 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double du = u[k + 1] - u[k], dv = t * (d[k + 1] - d[k]);
    dd += c[k] * dv * (2.0 * du + dv);
  }
  std::vector<double> drho(n);
  double dm = 0.0, dc = 0.0, dp = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = t * d[i];
    drho[i] = s * (2.0 * u[i] + s);
    dm += w[i] * drho[i];
    dc += 2.0 * w[i] * sol.phi[i] * drho[i];
    if (a[i] != 0.0) dp += w[i] * a[i] * f.F_increment(u[i], u[i] + s);
  }
  const std::vector<double> dphi = detail::newton_potential(prob.grid(), drho, prob.e());
  for (std::size_t i = 0; i < n; ++i) dc += w[i] * dphi[i] * drho[i];
  return 0.5 * dd + 0.5 * dm + 0.25 * prob.e() * dc - prob.lambda() * dp;
}

// ---------------------------------------------------------------------------
// Small-energy probe: sup { E2(u) : E1(u) < rho } / rho by random search.

struct SupRatioProbe {
  double rho = 0.0;
  double sup_e2 = 0.0;   // best sampled E2 with E1 < rho
  double ratio = 0.0;    // sup_e2 / rho
  std::size_t samples = 0;
};

namespace detail {

/// Random radial profile: sum of 1-3 Gaussian bumps, mostly placed over the
/// support of the weight.
inline RadialFunction random_bump(const Problem& prob, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double R = prob.weight().annulus().r_outer;
  const int bumps = 1 + static_cast<int>(unit(rng) * 3.0);
  std::vector<double> c(bumps), s(bumps), amp(bumps);
  for (int b = 0; b < bumps; ++b) {
    c[b] = unit(rng) * 1.5 * R;
    s[b] = 0.15 + unit(rng) * 2.0;
    amp[b] = (unit(rng) < 0.85 ? 1.0 : -1.0) * (0.2 + unit(rng));
  }
  const double r_max = prob.grid().r_max();
  return RadialFunction::sample(prob.grid_ptr(), [&](double r) {
    if (r >= r_max) return 0.0;
    double v = 0.0;
    for (int b = 0; b < bumps; ++b) {
      const double z = (r - c[b]) / s[b];
      v += amp[b] * std::exp(-z * z);
    }
    return v;
  });
}

}  // namespace detail

inline SupRatioProbe sup_ratio_probe(const Problem& prob, double rho, std::size_t samples, std::uint64_t seed) {
  if (!(rho > 0.0)) throw std::invalid_argument("sup_ratio_probe: rho must be positive");
  std::mt19937_64 rng(seed);
  SupRatioProbe out;
  out.rho = rho;
  for (std::size_t k = 0; k < samples; ++k) {
    const RadialFunction v = detail::random_bump(prob, rng);
    // E1(t v) increases in t; bisect for E1 = rho (1 - 1e-9), which places
    // t v inside {E1 < rho} and hence inside {‖u‖^2_{H^1} < 2 rho}.
    double lo = 0.0, hi = 1.0;
    while (energy(v.scaled(hi), prob).e1 < rho) hi *= 2.0;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      (energy(v.scaled(mid), prob).e1 < rho * (1.0 - 1e-9) ? lo : hi) = mid;
    }
    const EnergyBreakdown en = energy(v.scaled(lo), prob);
    if (en.e1 < rho && en.potential > out.sup_e2) out.sup_e2 = en.potential;
    ++out.samples;
  }
  out.ratio = out.sup_e2 / rho;
  return out;
}

}  // namespace smvar
