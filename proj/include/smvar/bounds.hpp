#pragma once

// Truncation profiles u_sigma and the explicit constants built from them:
// the H^1 lower bound, M (lower bound of E2(u_sigma)), t and N (upper bound
// of E1(u_sigma)), the enclosure (1/(‖alpha‖_inf c_f), 4N/M) of the
// multiplicity window, and a_bar.

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "smvar/energy.hpp"
#include "smvar/model.hpp"
#include "smvar/poisson.hpp"
#include "smvar/radial.hpp"

namespace smvar {

struct TruncationSpec {
  double s0 = 1.0;
  double sigma = 0.5;
  double r_inner = 0.0;
  double r_outer = 1.0;

  void validate() const {
    if (!(sigma > 0.0 && sigma < 1.0)) throw std::invalid_argument("TruncationSpec: sigma must lie in (0, 1)");
    if (!(r_inner >= 0.0 && r_outer > r_inner)) throw std::invalid_argument("TruncationSpec: need r_outer > r_inner >= 0");
    if (!std::isfinite(s0)) throw std::invalid_argument("TruncationSpec: s0 must be finite");
  }

  double plateau_end() const { return r_inner + sigma * (r_outer - r_inner); }
  double support_start() const { return std::max(0.0, r_inner - (1.0 - sigma) * (r_outer - r_inner)); }
};

/// u_sigma(r): plateau s0 on [r, r + sigma (R - r)], linear ramps down to 0 at
/// the support ends (R and (r - (1 - sigma)(R - r))_+).
inline double truncation_value(const TruncationSpec& spec, double x) {
  const double r = spec.r_inner, R = spec.r_outer;
  const double p_end = spec.plateau_end();
  if (x > R) return 0.0;
  if (x >= r && x <= p_end) return spec.s0;
  if (x > p_end) return spec.s0 * (R - x) / (R - p_end);
  const double a = spec.support_start();
  if (x < a) return 0.0;
  const double width = (1.0 - spec.sigma) * (R - r);  // unclipped ramp width
  return spec.s0 * (x - (r - width)) / width;
}

inline RadialFunction build_truncation(const TruncationSpec& spec, const GridPtr& grid) {
  spec.validate();
  if (spec.r_outer > grid->r_max()) throw std::domain_error("build_truncation: R_outer exceeds r_max");
  auto u = RadialFunction::sample(grid, [&](double x) { return truncation_value(spec, x); });
  u.mutable_values().back() = 0.0;
  return u;
}

/// (4 pi s0^2 / 3) [(r + sigma (R - r))^3 - r^3], a lower bound of ‖u_sigma‖^2_{H^1}.
inline double truncation_h1_lower_bound(const TruncationSpec& spec) {
  const double pe = spec.plateau_end(), r = spec.r_inner;
  return four_pi * spec.s0 * spec.s0 / 3.0 * (pe * pe * pe - r * r * r);
}

/// max_{|t| <= |s0|} |F(t)| by a 10^4-point scan.
inline double max_abs_primitive(const Nonlinearity& f, double s0) {
  const int m = 10000;
  const double a = std::abs(s0);
  double best = 0.0;
  for (int i = -m; i <= m; ++i) best = std::max(best, std::abs(f.F(a * i / m)));
  return best;
}

/// M = (4 pi / 3) [alpha0 F(s0) (p^3 - r^3)
///                 - ‖alpha‖_inf max|F| (r^3 - a^3 + R^3 - p^3)],
/// with p = r + sigma (R - r) and a = (r - (1 - sigma)(R - r))_+.
inline double m_value(double alpha0, double sup_alpha, double F_s0, double max_abs_F, const TruncationSpec& spec) {
  const double r = spec.r_inner, R = spec.r_outer, p = spec.plateau_end(), a = spec.support_start();
  const double ramp_volume = r * r * r - a * a * a + R * R * R - p * p * p;
  return four_pi / 3.0 * (alpha0 * F_s0 * (p * p * p - r * r * r) - sup_alpha * max_abs_F * ramp_volume);
}

inline double m_lower_bound(const Weight& a, const Nonlinearity& f, const TruncationSpec& spec) {
  spec.validate();
  return m_value(a.annulus().alpha0, a.sup_norm(), f.F(spec.s0), max_abs_primitive(f, spec.s0), spec);
}

inline const std::vector<double>& sigma_menu() {
  static const std::vector<double> menu{0.5, 0.6, 0.7, 0.8, 0.9, 0.99, 0.999};
  return menu;
}

/// Picks sigma from the fixed menu maximizing M(sigma); throws NotApplicable
/// when no sigma gives M > 0.
inline TruncationSpec sigma_search(const Weight& a, const Nonlinearity& f, double s0) {
  if (!(f.F(s0) > 0.0)) throw NotApplicable("sigma_search: F(s0) <= 0");
  if (!(a.annulus().alpha0 > 0.0)) throw NotApplicable("sigma_search: weight has no annulus with alpha0 > 0");
  TruncationSpec best{s0, 0.5, a.annulus().r_inner, a.annulus().r_outer};
  double best_m = -std::numeric_limits<double>::infinity();
  const double Fs0 = f.F(s0), maxF = max_abs_primitive(f, s0);
  for (double sigma : sigma_menu()) {
    TruncationSpec spec{s0, sigma, a.annulus().r_inner, a.annulus().r_outer};
    const double m = m_value(a.annulus().alpha0, a.sup_norm(), Fs0, maxF, spec);
    if (m > best_m) best_m = m, best = spec;
  }
  if (!(best_m > 0.0)) throw NotApplicable("sigma_search: no sigma in the menu gives M > 0");
  return best;
}

/// t = (4 pi / 3) R s0^2 [R^2 + (1 + sigma + sigma^2) / (1 - sigma)], an upper
/// bound of ‖u_sigma‖^2_{H^1} for r = 0.
inline double t_value(const TruncationSpec& spec) {
  const double R = spec.r_outer, s = spec.sigma;
  return four_pi / 3.0 * R * spec.s0 * spec.s0 * (R * R + (1.0 + s + s * s) / (1.0 - s));
}

/// N = t/2 + pi e^2 d*^2 s_{12/5}^4 t^2 >= E1(u_sigma), for r_inner = 0.
inline double n_upper_bound(const TruncationSpec& spec, double e, double d_star, double s125) {
  spec.validate();
  if (spec.r_inner != 0.0) throw NotApplicable("n_upper_bound: only the r_inner = 0 case is available");
  const double t = t_value(spec);
  return 0.5 * t + pi * e * e * d_star * d_star * std::pow(s125, 4) * t * t;
}

struct IntervalEstimate {
  double threshold = 0.0;     // 1 / (‖alpha‖_inf c_f), +inf for alpha == 0
  double c_f = 0.0;
  double m_value = 0.0;
  double n_value = 0.0;
  double t_value = 0.0;
  double upper = 0.0;         // 4 N / M
  double upper_quadrature = 0.0;  // 4 N / M with t and M integrated numerically
  double sharper_upper = 0.0; // 4 E1(u_sigma0) / E2(u_sigma0) on the problem grid
  double d_star = 0.0;
  double s125 = 0.0;
  TruncationSpec truncation;
  bool vacuous = false;
  std::optional<double> abar;
};

namespace detail {

/// Composite Simpson of g on [a, b] with m (even) panels.
template <class Fn>
double simpson(Fn&& g, double a, double b, int m = 20000) {
  if (!(b > a)) return 0.0;
  const double h = (b - a) / m;
  double s = g(a) + g(b);
  for (int i = 1; i < m; ++i) s += (i % 2 ? 4.0 : 2.0) * g(a + h * i);
  return s * h / 3.0;
}

}  // namespace detail

/// t and M recomputed by dense quadrature of the analytic profile, piece by
/// piece. Returns {t, M}.
inline std::pair<double, double> truncation_constants_by_quadrature(const Weight& a, const Nonlinearity& f,
                                                                    const TruncationSpec& spec) {
  const double R = spec.r_outer, p = spec.plateau_end();
  const double slope = spec.s0 / (R - p);
  // ‖u‖_2^2 over the ball of radius R with |u| <= |s0|, and the exact gradient part.
  const double ball = detail::simpson([&](double r) { return four_pi * r * r * spec.s0 * spec.s0; }, 0.0, R);
  const double grad = detail::simpson([&](double r) { return four_pi * r * r * slope * slope; }, p, R);
  const double t = ball + grad;
  const double maxF = max_abs_primitive(f, spec.s0);
  const double plateau = detail::simpson([&](double r) { return four_pi * r * r; }, spec.r_inner, p);
  const double ramps = detail::simpson([&](double r) { return four_pi * r * r; }, p, R) +
                       detail::simpson([&](double r) { return four_pi * r * r; }, spec.support_start(), spec.r_inner);
  const double M = a.annulus().alpha0 * f.F(spec.s0) * plateau - a.sup_norm() * maxF * ramps;
  return {t, M};
}

/// Enclosure of the multiplicity window for a problem whose weight has an
/// r_inner = 0 annulus. s0 is chosen on a log grid to minimize 4N/M.
inline IntervalEstimate interval_estimate(const Problem& prob, std::optional<double> d_star = std::nullopt,
                                          std::optional<double> s125 = std::nullopt,
                                          const SamplingSpec& sampling = {}) {
  const Weight& a = prob.weight();
  const Nonlinearity& f = prob.nonlinearity();
  const HypothesisReport hyp = check_hypotheses(f, sampling);
  if (!hyp.all_ok()) throw InvalidModel("interval_estimate: hypotheses fail (" + hyp.failures() + ")");
  IntervalEstimate est;
  est.c_f = compute_cf(f, prob.e(), sampling);
  est.d_star = d_star.value_or(estimate_d_star());
  est.s125 = s125.value_or(estimate_s125());
  if (a.is_zero()) {
    est.threshold = std::numeric_limits<double>::infinity();
    est.upper = 0.0;
    est.vacuous = true;
    return est;
  }
  est.threshold = 1.0 / (a.sup_norm() * est.c_f);
  if (a.annulus().r_inner != 0.0) throw NotApplicable("interval_estimate: needs an annulus with r_inner = 0");

  double best = std::numeric_limits<double>::infinity();
  for (int k = -30; k <= 30; ++k) {
    const double s0 = std::pow(10.0, k / 10.0);
    if (!(f.F(s0) > 0.0)) continue;
    TruncationSpec spec;
    try {
      spec = sigma_search(a, f, s0);
    } catch (const NotApplicable&) {
      continue;
    }
    const double M = m_lower_bound(a, f, spec);
    const double N = n_upper_bound(spec, prob.e(), est.d_star, est.s125);
    const double upper = 4.0 * N / M;
    if (upper < best) {
      best = upper;
      est.truncation = spec;
      est.m_value = M;
      est.n_value = N;
      est.t_value = t_value(spec);
    }
  }
  if (!std::isfinite(best)) throw NotApplicable("interval_estimate: no s0 with a positive M");
  est.upper = best;
  const auto [tq, mq] = truncation_constants_by_quadrature(a, f, est.truncation);
  const double nq = 0.5 * tq + pi * prob.e() * prob.e() * est.d_star * est.d_star * std::pow(est.s125, 4) * tq * tq;
  est.upper_quadrature = 4.0 * nq / mq;

  if (est.truncation.r_outer < prob.grid().r_max()) {
    const EnergyBreakdown en = energy(build_truncation(est.truncation, prob.grid_ptr()), prob);
    est.sharper_upper = en.potential > 0.0 ? 4.0 * en.e1 / en.potential : std::numeric_limits<double>::infinity();
  }
  est.vacuous = !(est.upper > est.threshold);
  return est;
}

struct AbarReport {
  double value = 0.0;         // +inf when unbounded
  bool unbounded = false;
  bool below_over_a = false;  // a_bar < 4 E1/E2, asserted in the regime rho0 < 1, sup-term < E2/(2 E1)
  bool regime = false;
};

/// a_bar = (1 + rho0) / (E2(u1)/E1(u1) - sup_ratio), where sup_ratio is the
/// sampled sup{E2 : E1 < rho0} / rho0.
inline AbarReport abar(double rho0, double e1_u, double e2_u, double sup_ratio) {
  if (!(rho0 > 0.0)) throw std::invalid_argument("abar: rho0 must be positive");
  if (!(e1_u > rho0)) throw NotApplicable("abar: hypothesis (i) rho0 < E1(u1) fails");
  const double q = e2_u / e1_u;
  const double denom = q - sup_ratio;
  if (!(denom >= 0.0)) throw NotApplicable("abar: hypothesis (ii) fails");
  AbarReport rep;
  if (denom <= std::numeric_limits<double>::min() * 1e10 * (1.0 + rho0)) {
    rep.value = std::numeric_limits<double>::infinity();
    rep.unbounded = true;
  } else {
    rep.value = (1.0 + rho0) / denom;
    rep.unbounded = !std::isfinite(rep.value);
  }
  rep.regime = rho0 < 1.0 && sup_ratio < q / 2.0;
  rep.below_over_a = rep.value < 4.0 * e1_u / e2_u;
  return rep;
}

}  // namespace smvar
