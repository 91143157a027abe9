#pragma once

// Nonlinearities f (with primitive F), radial weights alpha, the sampled
// hypothesis checks (f1)-(f3), growth envelopes and the constant c_f.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "smvar/radial.hpp"

namespace smvar {

/// Raised for a nonlinearity or weight that cannot be used (non-finite
/// samples, failed hypotheses where they are required).
class InvalidModel : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an operation's applicability conditions are not met.
class NotApplicable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double sqrt_pi() { return std::sqrt(pi); }

// ---------------------------------------------------------------------------
// Nonlinearity

enum class NonlinearityKind { min_abs_powers, min_plus_powers, log_square, custom_table };

inline std::string to_string(NonlinearityKind k) {
  switch (k) {
    case NonlinearityKind::min_abs_powers: return "min-abs-powers";
    case NonlinearityKind::min_plus_powers: return "min-plus-powers";
    case NonlinearityKind::log_square: return "log-square";
    case NonlinearityKind::custom_table: return "custom-table";
  }
  return "?";
}

inline NonlinearityKind nonlinearity_kind_from_string(const std::string& s) {
  if (s == "min-abs-powers") return NonlinearityKind::min_abs_powers;
  if (s == "min-plus-powers") return NonlinearityKind::min_plus_powers;
  if (s == "log-square") return NonlinearityKind::log_square;
  if (s == "custom-table") return NonlinearityKind::custom_table;
  throw std::invalid_argument("unknown nonlinearity kind '" + s + "'");
}

/// Continuous f : R -> R with primitive F(s) = int_0^s f. Tabulated f is
/// interpolated linearly between samples and held constant outside them.
class Nonlinearity {
 public:
  static Nonlinearity min_abs_powers(double r, double p) { return powers(NonlinearityKind::min_abs_powers, r, p); }
  static Nonlinearity min_plus_powers(double r, double p) { return powers(NonlinearityKind::min_plus_powers, r, p); }
  static Nonlinearity log_square() {
    Nonlinearity f;
    f.kind_ = NonlinearityKind::log_square;
    return f;
  }
  static Nonlinearity table(std::vector<double> s, std::vector<double> values) {
    if (s.size() != values.size() || s.size() < 2)
      throw InvalidModel("custom-table nonlinearity needs >= 2 matching (s, f) samples");
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!std::isfinite(s[i]) || !std::isfinite(values[i]))
        throw InvalidModel("custom-table nonlinearity has a non-finite sample");
      if (i > 0 && !(s[i] > s[i - 1])) throw InvalidModel("custom-table abscissae must be strictly increasing");
    }
    Nonlinearity f;
    f.kind_ = NonlinearityKind::custom_table;
    f.ts_ = std::move(s);
    f.tf_ = std::move(values);
    f.tP_.assign(f.ts_.size(), 0.0);
    for (std::size_t i = 1; i < f.ts_.size(); ++i)
      f.tP_[i] = f.tP_[i - 1] + 0.5 * (f.tf_[i] + f.tf_[i - 1]) * (f.ts_[i] - f.ts_[i - 1]);
    f.tP0_ = f.table_antiderivative(0.0);
    return f;
  }

  NonlinearityKind kind() const { return kind_; }
  double r_exponent() const { return r_; }
  double p_exponent() const { return p_; }
  std::span<const double> table_s() const { return ts_; }
  std::span<const double> table_f() const { return tf_; }

  double operator()(double s) const { return f(s); }

  double f(double s) const {
    switch (kind_) {
      case NonlinearityKind::min_abs_powers: {
        const double a = std::abs(s);
        return std::min(std::pow(a, r_), std::pow(a, p_));
      }
      case NonlinearityKind::min_plus_powers: {
        if (s <= 0.0) return 0.0;
        return std::min(std::pow(s, r_), std::pow(s, p_));
      }
      case NonlinearityKind::log_square: return std::log1p(s * s);
      case NonlinearityKind::custom_table: return table_value(s);
    }
    return 0.0;
  }

  double F(double s) const {
    switch (kind_) {
      case NonlinearityKind::min_abs_powers: return s < 0.0 ? -power_primitive(-s) : power_primitive(s);
      case NonlinearityKind::min_plus_powers: return s <= 0.0 ? 0.0 : power_primitive(s);
      case NonlinearityKind::log_square: return s * std::log1p(s * s) - 2.0 * s + 2.0 * std::atan(s);
      case NonlinearityKind::custom_table: return table_antiderivative(s) - tP0_;
    }
    return 0.0;
  }

  /// F(b) - F(a) without catastrophic cancellation when b is close to a.
  double F_increment(double a, double b) const {
    const double d = b - a;
    if (d == 0.0) return 0.0;
    if (std::abs(d) > 1e-3 * (1.0 + std::abs(a))) return F(b) - F(a);
    // Gauss-Legendre on the subintervals cut by the splice points of f.
    double lo = std::min(a, b), hi = std::max(a, b);
    std::vector<double> cuts{lo};
    for (double k : breakpoints())
      if (k > lo && k < hi) cuts.push_back(k);
    cuts.push_back(hi);
    static constexpr double gx[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
    static constexpr double gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    double acc = 0.0;
    for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
      const double m = 0.5 * (cuts[j] + cuts[j + 1]), h = 0.5 * (cuts[j + 1] - cuts[j]);
      for (int q = 0; q < 3; ++q) acc += gw[q] * h * f(m + h * gx[q]);
    }
    return d > 0 ? acc : -acc;
  }

  /// Points where f fails to be smooth.
  std::vector<double> breakpoints() const {
    switch (kind_) {
      case NonlinearityKind::min_abs_powers: return {-1.0, 0.0, 1.0};
      case NonlinearityKind::min_plus_powers: return {0.0, 1.0};
      case NonlinearityKind::log_square: return {};
      case NonlinearityKind::custom_table: return ts_;
    }
    return {};
  }

  /// Global Lipschitz constant where it is known in closed form.
  std::optional<double> lipschitz() const {
    switch (kind_) {
      case NonlinearityKind::min_abs_powers:
      case NonlinearityKind::min_plus_powers: return p_;
      case NonlinearityKind::log_square: return 1.0;
      case NonlinearityKind::custom_table: {
        double L = 0.0;
        for (std::size_t i = 1; i < ts_.size(); ++i)
          L = std::max(L, std::abs(tf_[i] - tf_[i - 1]) / (ts_[i] - ts_[i - 1]));
        return L;
      }
    }
    return std::nullopt;
  }

  std::string describe() const {
    switch (kind_) {
      case NonlinearityKind::min_abs_powers:
        return "min(|s|^" + std::to_string(r_) + ", |s|^" + std::to_string(p_) + ")";
      case NonlinearityKind::min_plus_powers:
        return "min(s_+^" + std::to_string(r_) + ", s_+^" + std::to_string(p_) + ")";
      case NonlinearityKind::log_square: return "ln(1+s^2)";
      case NonlinearityKind::custom_table: return "table[" + std::to_string(ts_.size()) + "]";
    }
    return "?";
  }

  friend bool operator==(const Nonlinearity&, const Nonlinearity&) = default;

 private:
  static Nonlinearity powers(NonlinearityKind k, double r, double p) {
    if (!(r > 0.0 && r < 1.0 && p > 1.0 && std::isfinite(p)))
      throw InvalidModel("power nonlinearity needs 0 < r < 1 < p");
    Nonlinearity f;
    f.kind_ = k;
    f.r_ = r;
    f.p_ = p;
    return f;
  }

  double power_primitive(double x) const {
    if (x <= 1.0) return std::pow(x, p_ + 1.0) / (p_ + 1.0);
    return 1.0 / (p_ + 1.0) + (std::pow(x, r_ + 1.0) - 1.0) / (r_ + 1.0);
  }

  double table_value(double s) const {
    if (s <= ts_.front()) return tf_.front();
    if (s >= ts_.back()) return tf_.back();
    const auto k = static_cast<std::size_t>(std::upper_bound(ts_.begin(), ts_.end(), s) - ts_.begin()) - 1;
    const double t = (s - ts_[k]) / (ts_[k + 1] - ts_[k]);
    return (1.0 - t) * tf_[k] + t * tf_[k + 1];
  }

  // antiderivative anchored at ts_.front()
  double table_antiderivative(double s) const {
    if (s <= ts_.front()) return (s - ts_.front()) * tf_.front();
    if (s >= ts_.back()) return tP_.back() + (s - ts_.back()) * tf_.back();
    const auto k = static_cast<std::size_t>(std::upper_bound(ts_.begin(), ts_.end(), s) - ts_.begin()) - 1;
    return tP_[k] + 0.5 * (tf_[k] + table_value(s)) * (s - ts_[k]);
  }

  NonlinearityKind kind_ = NonlinearityKind::log_square;
  double r_ = 0.0, p_ = 0.0;
  std::vector<double> ts_, tf_, tP_;
  double tP0_ = 0.0;
};

// ---------------------------------------------------------------------------
// Weight

enum class WeightKind { constant_annulus, gaussian, power_decay, custom_table };

inline std::string to_string(WeightKind k) {
  switch (k) {
    case WeightKind::constant_annulus: return "constant-annulus";
    case WeightKind::gaussian: return "gaussian";
    case WeightKind::power_decay: return "power-decay";
    case WeightKind::custom_table: return "custom-table";
  }
  return "?";
}

inline WeightKind weight_kind_from_string(const std::string& s) {
  if (s == "constant-annulus") return WeightKind::constant_annulus;
  if (s == "gaussian") return WeightKind::gaussian;
  if (s == "power-decay") return WeightKind::power_decay;
  if (s == "custom-table") return WeightKind::custom_table;
  throw std::invalid_argument("unknown weight kind '" + s + "'");
}

/// Annulus A[r_inner, R_outer] on which alpha >= alpha0 > 0.
struct Annulus {
  double r_inner = 0.0;
  double r_outer = 1.0;
  double alpha0 = 0.0;
  friend bool operator==(const Annulus&, const Annulus&) = default;
};

/// Non-negative radial weight alpha(|x|) with exponent q in (0, 1).
class Weight {
 public:
  /// alpha = level on [r_inner, r_outer], 0 elsewhere; level 0 encodes alpha == 0.
  static Weight constant_annulus(double level, double r_inner, double r_outer, double q = 0.5) {
    if (!(level >= 0.0) || !(r_outer > r_inner) || !(r_inner >= 0.0))
      throw InvalidModel("constant-annulus weight needs level >= 0 and r_outer > r_inner >= 0");
    Weight a(WeightKind::constant_annulus, q);
    a.level_ = level;
    a.annulus_ = {r_inner, r_outer, level};
    a.sup_ = level;
    return a;
  }
  static Weight gaussian(double r_outer = 1.0, double q = 0.5) {
    Weight a(WeightKind::gaussian, q);
    a.annulus_ = {0.0, r_outer, std::exp(-r_outer * r_outer)};
    a.sup_ = 1.0;
    return a;
  }
  static Weight power_decay(double beta, double r_outer = 1.0, double q = 0.5) {
    if (!(beta > 0.0)) throw InvalidModel("power-decay weight needs beta > 0");
    Weight a(WeightKind::power_decay, q);
    a.beta_ = beta;
    a.annulus_ = {0.0, r_outer, std::pow(1.0 + r_outer, -beta)};
    a.sup_ = 1.0;
    return a;
  }
  static Weight table(std::vector<double> r, std::vector<double> alpha, Annulus annulus, double q = 0.5) {
    if (r.size() != alpha.size() || r.size() < 2) throw InvalidModel("custom-table weight needs >= 2 samples");
    Weight a(WeightKind::custom_table, q);
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (!std::isfinite(r[i]) || !std::isfinite(alpha[i]) || alpha[i] < 0.0)
        throw InvalidModel("custom-table weight samples must be finite and non-negative");
      if (i > 0 && !(r[i] > r[i - 1])) throw InvalidModel("custom-table weight radii must increase");
    }
    a.tr_ = std::move(r);
    a.ta_ = std::move(alpha);
    a.sup_ = *std::max_element(a.ta_.begin(), a.ta_.end());
    a.annulus_ = annulus;
    // essinf over the annulus of the piecewise-linear table
    double m = a(annulus.r_inner);
    m = std::min(m, a(annulus.r_outer));
    for (double x : a.tr_)
      if (x >= annulus.r_inner && x <= annulus.r_outer) m = std::min(m, a(x));
    if (annulus.alpha0 > m + 1e-14) throw InvalidModel("custom-table weight: alpha0 exceeds the annulus minimum");
    if (a.annulus_.alpha0 <= 0.0) a.annulus_.alpha0 = m;
    return a;
  }

  WeightKind kind() const { return kind_; }
  double q() const { return q_; }
  double sup_norm() const { return sup_; }
  const Annulus& annulus() const { return annulus_; }
  double level() const { return level_; }
  double beta() const { return beta_; }
  std::span<const double> table_r() const { return tr_; }
  std::span<const double> table_alpha() const { return ta_; }
  bool is_zero() const { return sup_ == 0.0; }

  double operator()(double r) const {
    switch (kind_) {
      case WeightKind::constant_annulus:
        return (r >= annulus_.r_inner && r <= annulus_.r_outer) ? level_ : 0.0;
      case WeightKind::gaussian: return std::exp(-r * r);
      case WeightKind::power_decay: return std::pow(1.0 + r, -beta_);
      case WeightKind::custom_table: {
        if (r < tr_.front() || r > tr_.back()) return 0.0;
        const auto k = std::min<std::size_t>(
            static_cast<std::size_t>(std::upper_bound(tr_.begin(), tr_.end(), r) - tr_.begin()) - 1, tr_.size() - 2);
        const double t = (r - tr_[k]) / (tr_[k + 1] - tr_[k]);
        return (1.0 - t) * ta_[k] + t * ta_[k + 1];
      }
    }
    return 0.0;
  }

  RadialFunction sample(const GridPtr& grid) const {
    return RadialFunction::sample(grid, [this](double r) { return (*this)(r); });
  }

  friend bool operator==(const Weight&, const Weight&) = default;

 private:
  Weight(WeightKind k, double q) : kind_(k), q_(q) {
    if (!(q > 0.0 && q < 1.0)) throw InvalidModel("weight exponent q must lie in (0, 1)");
  }

  WeightKind kind_;
  double q_;
  double sup_ = 0.0;
  double level_ = 0.0;
  double beta_ = 0.0;
  Annulus annulus_;
  std::vector<double> tr_, ta_;
};

// ---------------------------------------------------------------------------
// Sampling of scalar functions of s over a symmetric log-scale range.

struct SamplingSpec {
  double s_min = 1e-6;
  double s_max = 1e6;
  int per_decade = 200;

  void validate() const {
    if (!(s_min > 0.0) || !(s_max >= 1e3) || !(s_max > s_min) || per_decade < 4)
      throw std::invalid_argument("SamplingSpec: need 0 < s_min < s_max, s_max >= 1e3, per_decade >= 4");
  }

  /// Magnitudes s_min = x_0 < ... < x_m = s_max, log-uniform.
  std::vector<double> magnitudes() const {
    const double decades = std::log10(s_max / s_min);
    const auto m = static_cast<std::size_t>(std::ceil(decades * per_decade));
    std::vector<double> x(m + 1);
    for (std::size_t i = 0; i <= m; ++i) x[i] = s_min * std::pow(10.0, decades * static_cast<double>(i) / m);
    x.front() = s_min;
    x.back() = s_max;
    return x;
  }
};

struct ScanMax {
  double argmax = 0.0;
  double value = -std::numeric_limits<double>::infinity();
};

namespace detail {

template <class Fn>
double golden_max_log(Fn&& fn, double sign, double a, double b, int iters = 80) {
  // maximize fn(sign * exp(t)) over t in [log a, log b]
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = std::log(a), hi = std::log(b);
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = fn(sign * std::exp(x1)), f2 = fn(sign * std::exp(x2));
  for (int it = 0; it < iters && hi - lo > 1e-14; ++it) {
    if (f1 < f2) {
      lo = x1; x1 = x2; f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = fn(sign * std::exp(x2));
    } else {
      hi = x2; x2 = x1; f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = fn(sign * std::exp(x1));
    }
  }
  return sign * std::exp(f1 >= f2 ? x1 : x2);
}

}  // namespace detail

/// Maximizes fn over s in [-s_max, -s_min] u [s_min, s_max]: log-grid scan
/// (with the extra points added), then golden-section refinement of every
/// sampled local maximum. Throws InvalidModel on a non-finite sample.
template <class Fn>
ScanMax scan_maximize(Fn&& fn, const SamplingSpec& spec, const std::vector<double>& extra = {}) {
  spec.validate();
  ScanMax best;
  const std::vector<double> base = spec.magnitudes();
  for (double sign : {1.0, -1.0}) {
    std::vector<double> x = base;
    for (double e : extra)
      if (e * sign > 0.0 && std::abs(e) > spec.s_min && std::abs(e) < spec.s_max) x.push_back(std::abs(e));
    std::sort(x.begin(), x.end());
    x.erase(std::unique(x.begin(), x.end()), x.end());
    std::vector<double> v(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      v[i] = fn(sign * x[i]);
      if (!std::isfinite(v[i]))
        throw InvalidModel("non-finite value at s = " + std::to_string(sign * x[i]));
      if (v[i] > best.value) best = {sign * x[i], v[i]};
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      const bool left = i == 0 || v[i] >= v[i - 1];
      const bool right = i + 1 == x.size() || v[i] >= v[i + 1];
      if (!(left && right)) continue;
      const double a = x[i == 0 ? 0 : i - 1], b = x[i + 1 == x.size() ? i : i + 1];
      if (!(b > a)) continue;
      const double s = detail::golden_max_log(fn, sign, a, b);
      const double val = fn(s);
      if (std::isfinite(val) && val > best.value) best = {s, val};
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Hypotheses (f1)-(f3)

struct HypothesisReport {
  bool f1_ok = false;      // f(s)/s -> 0 as |s| -> infinity, at the sampled resolution
  bool f2_ok = false;      // f(s)/s -> 0 as s -> 0
  bool f3_ok = false;      // some F(s0) > 0
  double tail_ratio = 0;   // max |f(s)/s| at the largest sampled |s|
  double origin_ratio = 0; // max |f(s)/s| at the smallest sampled |s|
  double s0 = 0.0;         // sampled maximizer of F
  double F_s0 = 0.0;
  double n_f = 0.0;        // sampled sup |f(s)|/|s|
  double tol_f1 = 1e-3;
  double tol_f2 = 1e-3;

  bool all_ok() const { return f1_ok && f2_ok && f3_ok; }
  std::string failures() const {
    std::string s;
    if (!f1_ok) s += "f1 ";
    if (!f2_ok) s += "f2 ";
    if (!f3_ok) s += "f3 ";
    if (!s.empty()) s.pop_back();
    return s;
  }
};

inline HypothesisReport check_hypotheses(const Nonlinearity& f, const SamplingSpec& spec = {},
                                         double tol_f1 = 1e-3, double tol_f2 = 1e-3) {
  spec.validate();
  HypothesisReport rep;
  rep.tol_f1 = tol_f1;
  rep.tol_f2 = tol_f2;
  auto ratio = [&](double s) {
    const double v = f(s);
    if (!std::isfinite(v)) throw InvalidModel("non-finite f at s = " + std::to_string(s));
    return std::abs(v) / std::abs(s);
  };
  const double big = spec.s_max, big_prev = spec.s_max / 10.0;
  const double small = spec.s_min, small_prev = spec.s_min * 10.0;
  rep.tail_ratio = std::max(ratio(big), ratio(-big));
  rep.origin_ratio = std::max(ratio(small), ratio(-small));
  const double tail_prev = std::max(ratio(big_prev), ratio(-big_prev));
  const double origin_prev = std::max(ratio(small_prev), ratio(-small_prev));
  rep.f1_ok = rep.tail_ratio <= tol_f1 && rep.tail_ratio <= tail_prev;
  rep.f2_ok = rep.origin_ratio <= tol_f2 && rep.origin_ratio <= origin_prev;

  const ScanMax nf = scan_maximize(ratio, spec, f.breakpoints());
  rep.n_f = nf.value;

  const ScanMax best = scan_maximize([&](double s) { return f.F(s); }, spec, f.breakpoints());
  rep.s0 = best.argmax;
  rep.F_s0 = best.value;
  rep.f3_ok = best.value > 0.0;
  return rep;
}

/// c_f = max_{s != 0} |f(s)| / (|s| + 4 sqrt(pi) e s^2).
inline double compute_cf(const Nonlinearity& f, double e, const SamplingSpec& spec = {}) {
  if (!(e > 0.0)) throw std::invalid_argument("compute_cf: coupling e must be positive");
  const double k = 4.0 * sqrt_pi() * e;
  auto ratio = [&](double s) {
    const double v = f(s);
    if (!std::isfinite(v)) throw InvalidModel("non-finite f at s = " + std::to_string(s));
    return std::abs(v) / (std::abs(s) + k * s * s);
  };
  return scan_maximize(ratio, spec, f.breakpoints()).value;
}

/// Smallest c with |f(s)| <= eps |s| + c s^2 on the sampled range.
inline double envelope_check_quadratic(const Nonlinearity& f, double eps, const SamplingSpec& spec = {}) {
  if (!(eps > 0.0)) throw std::invalid_argument("envelope_check_quadratic: eps must be positive");
  auto excess = [&](double s) { return std::max(0.0, std::abs(f(s)) - eps * std::abs(s)) / (s * s); };
  return std::max(0.0, scan_maximize(excess, spec, f.breakpoints()).value);
}

/// Smallest M with |f(s)| <= eps |s| + M |s|^q on the sampled range. The log
/// grid covers the band near 0, the band near infinity and the middle band
/// [delta, 1/delta] uniformly in log|s|.
inline double envelope_check_subcritical(const Nonlinearity& f, double eps, double q, const SamplingSpec& spec = {}) {
  if (!(eps > 0.0)) throw std::invalid_argument("envelope_check_subcritical: eps must be positive");
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("envelope_check_subcritical: q must lie in (0, 1)");
  auto excess = [&](double s) {
    return std::max(0.0, std::abs(f(s)) - eps * std::abs(s)) / std::pow(std::abs(s), q);
  };
  return std::max(0.0, scan_maximize(excess, spec, f.breakpoints()).value);
}

// ---------------------------------------------------------------------------
// Weight integrability

struct IntegrabilityReport {
  double norm = 0.0;       // ||alpha||_{6/(5-q)} over the ball of radius `radius`
  double radius = 0.0;     // truncation radius at which the value stabilized
  int doublings = 0;
  bool diverged = false;
};

/// ||alpha||_{6/(5-q)} on the truncated domain. The radius is doubled until
/// the value changes by at most 1%; failing that within max_doublings the
/// weight is flagged as not integrable.
inline IntegrabilityReport weight_integrability(const Weight& a, const RadialGrid& grid, int max_doublings = 10) {
  const double p = 6.0 / (5.0 - a.q());
  IntegrabilityReport rep;
  if (a.is_zero()) {
    rep.radius = grid.r_max();
    return rep;
  }
  double integral = 0.0;
  const auto w = grid.weights();
  for (std::size_t i = 0; i < grid.size(); ++i) integral += w[i] * std::pow(a(grid[i]), p);

  // Shell [R, 2R] by composite Simpson on the analytic weight.
  auto shell = [&](double R0, double R1) {
    const int m = 20000;
    const double h = (R1 - R0) / m;
    double s = 0.0;
    for (int i = 0; i <= m; ++i) {
      const double r = R0 + h * i;
      const double c = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      s += c * r * r * std::pow(a(r), p);
    }
    return four_pi * s * h / 3.0;
  };

  double R = grid.r_max();
  double value = std::pow(integral, 1.0 / p);
  for (int k = 0; k < max_doublings; ++k) {
    const double next_integral = integral + shell(R, 2.0 * R);
    const double next = std::pow(next_integral, 1.0 / p);
    const double change = std::abs(next - value) / std::max(next, 1e-300);
    if (change <= 0.01) {
      rep.norm = value;
      rep.radius = R;
      rep.doublings = k;
      return rep;
    }
    integral = next_integral;
    value = next;
    R *= 2.0;
  }
  rep.norm = value;
  rep.radius = R;
  rep.doublings = max_doublings;
  rep.diverged = true;
  return rep;
}

}  // namespace smvar
