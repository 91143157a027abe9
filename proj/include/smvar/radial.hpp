#pragma once

// Radial grids, quadrature and norm algebra for radially symmetric functions
// on R^3 truncated to the ball of radius r_max.

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace smvar {

inline constexpr double pi = std::numbers::pi;
inline constexpr double four_pi = 4.0 * std::numbers::pi;

enum class Quadrature { trapezoid, simpson };

inline std::string to_string(Quadrature q) { return q == Quadrature::trapezoid ? "trapezoid" : "simpson"; }

inline Quadrature quadrature_from_string(const std::string& s) {
  if (s == "trapezoid") return Quadrature::trapezoid;
  if (s == "simpson") return Quadrature::simpson;
  throw std::invalid_argument("unknown quadrature kind '" + s + "'");
}

/// Strictly increasing radii r_0 = 0 < ... < r_{n-1} = r_max together with
/// the quadrature weights of the volume measure 4 pi r^2 dr.
class RadialGrid {
 public:
  static constexpr std::size_t min_nodes = 16;

  explicit RadialGrid(std::vector<double> nodes, Quadrature q = Quadrature::trapezoid)
      : nodes_(std::move(nodes)), quadrature_(q) {
    if (nodes_.size() < min_nodes)
      throw std::invalid_argument("RadialGrid: need at least 16 nodes, got " + std::to_string(nodes_.size()));
    if (nodes_.front() != 0.0) throw std::invalid_argument("RadialGrid: first node must be r = 0");
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
      if (!std::isfinite(nodes_[i]) || !(nodes_[i] > nodes_[i - 1]))
        throw std::invalid_argument("RadialGrid: nodes must be finite and strictly increasing");
    }
    build_weights();
  }

  static std::shared_ptr<const RadialGrid> uniform(double r_max, std::size_t n,
                                                   Quadrature q = Quadrature::trapezoid) {
    if (!(r_max > 0.0) || !std::isfinite(r_max)) throw std::invalid_argument("RadialGrid: r_max must be positive");
    if (n < min_nodes) throw std::invalid_argument("RadialGrid: need at least 16 nodes");
    std::vector<double> r(n);
    const double h = r_max / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) r[i] = h * static_cast<double>(i);
    r.back() = r_max;
    return std::make_shared<const RadialGrid>(std::move(r), q);
  }

  std::size_t size() const { return nodes_.size(); }
  double r_max() const { return nodes_.back(); }
  double operator[](std::size_t i) const { return nodes_[i]; }
  std::span<const double> nodes() const { return nodes_; }
  /// w_i such that sum_i w_i g(r_i) approximates 4 pi int_0^{r_max} r^2 g(r) dr.
  std::span<const double> weights() const { return weights_; }
  double spacing(std::size_t k) const { return nodes_[k + 1] - nodes_[k]; }
  double max_spacing() const {
    double h = 0.0;
    for (std::size_t k = 0; k + 1 < size(); ++k) h = std::max(h, spacing(k));
    return h;
  }
  Quadrature quadrature() const { return quadrature_; }

  /// Index of the last node with r_i <= r (clamped).
  std::size_t locate(double r) const {
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), r);
    if (it == nodes_.begin()) return 0;
    return std::min<std::size_t>(static_cast<std::size_t>(it - nodes_.begin()) - 1, size() - 2);
  }

 private:
  void build_weights() {
    const std::size_t n = nodes_.size();
    std::vector<double> base(n, 0.0);
    auto trap = [&](std::size_t a, std::size_t b) {
      for (std::size_t k = a; k < b; ++k) {
        const double h = spacing(k);
        base[k] += 0.5 * h;
        base[k + 1] += 0.5 * h;
      }
    };
    if (quadrature_ == Quadrature::trapezoid) {
      trap(0, n - 1);
    } else {
      // Composite Simpson on panels of two cells (non-uniform form); a single
      // trailing cell, if any, falls back to the trapezoid rule.
      std::size_t k = 0;
      for (; k + 2 < n; k += 2) {
        const double h0 = spacing(k), h1 = spacing(k + 1), H = h0 + h1;
        base[k] += H / 6.0 * (2.0 - h1 / h0);
        base[k + 1] += H * H * H / (6.0 * h0 * h1);
        base[k + 2] += H / 6.0 * (2.0 - h0 / h1);
      }
      if (k + 1 < n) trap(k, k + 1);
    }
    weights_.resize(n);
    for (std::size_t i = 0; i < n; ++i) weights_[i] = four_pi * nodes_[i] * nodes_[i] * base[i];
  }

  std::vector<double> nodes_;
  std::vector<double> weights_;
  Quadrature quadrature_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

/// Samples of a radial profile on a shared, immutable grid.
class RadialFunction {
 public:
  RadialFunction(GridPtr grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) throw std::invalid_argument("RadialFunction: null grid");
    if (values_.size() != grid_->size()) throw std::invalid_argument("RadialFunction: size does not match grid");
    for (double v : values_)
      if (!std::isfinite(v)) throw std::invalid_argument("RadialFunction: non-finite sample");
  }

  explicit RadialFunction(GridPtr grid) : grid_(std::move(grid)) {
    if (!grid_) throw std::invalid_argument("RadialFunction: null grid");
    values_.assign(grid_->size(), 0.0);
  }

  template <class Fn>
  static RadialFunction sample(GridPtr grid, Fn&& fn) {
    std::vector<double> v(grid->size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn((*grid)[i]);
    return RadialFunction(std::move(grid), std::move(v));
  }

  const RadialGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const { return values_; }
  std::vector<double>& mutable_values() { return values_; }

  /// Dirichlet truncation of H^1 decay: u(r_max) = 0.
  bool satisfies_dirichlet() const { return values_.back() == 0.0; }

  double sup_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  /// Piecewise-linear evaluation; zero beyond r_max.
  double at(double r) const {
    if (r >= grid_->r_max()) return r == grid_->r_max() ? values_.back() : 0.0;
    if (r <= 0.0) return values_.front();
    const std::size_t k = grid_->locate(r);
    const double t = (r - (*grid_)[k]) / grid_->spacing(k);
    return (1.0 - t) * values_[k] + t * values_[k + 1];
  }

  /// Transfer to another grid by linear interpolation.
  RadialFunction resample(GridPtr target) const {
    return sample(std::move(target), [this](double r) { return at(r); });
  }

  RadialFunction scaled(double t) const {
    std::vector<double> v(values_);
    for (double& x : v) x *= t;
    return RadialFunction(grid_, std::move(v));
  }

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

struct NormReport {
  double h1 = 0.0;
  double d12 = 0.0;
  std::map<double, double> lp;  // exponent -> L^p norm, p in {2, 12/5, 3, 6}

  double l(double p) const { return lp.at(p); }
};

inline constexpr double p_two = 2.0;
inline constexpr double p_twelve_fifths = 12.0 / 5.0;
inline constexpr double p_three = 3.0;
inline constexpr double p_six = 6.0;

/// 4 pi int_0^{r_max} r^2 g(r) dr.
inline double integrate_r3(const RadialFunction& g) {
  const auto w = g.grid().weights();
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) s += w[i] * g[i];
  return s;
}

inline double integrate_r3(const RadialGrid& grid, std::span<const double> g) {
  if (g.size() != grid.size()) throw std::invalid_argument("integrate_r3: size mismatch");
  const auto w = grid.weights();
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!std::isfinite(g[i])) throw std::invalid_argument("integrate_r3: non-finite sample");
    s += w[i] * g[i];
  }
  return s;
}

/// Second-order finite differences: central in the interior, one-sided
/// three-point at both ends (valid on non-uniform grids).
inline RadialFunction differentiate(const RadialFunction& u) {
  const auto& g = u.grid();
  const std::size_t n = g.size();
  if (n < 3) throw std::invalid_argument("differentiate: grid too small");
  std::vector<double> d(n);
  auto three_point = [&](std::size_t a, double x) {
    // derivative at x of the quadratic through nodes a, a+1, a+2
    const double x0 = g[a], x1 = g[a + 1], x2 = g[a + 2];
    const double l0 = ((x - x1) + (x - x2)) / ((x0 - x1) * (x0 - x2));
    const double l1 = ((x - x0) + (x - x2)) / ((x1 - x0) * (x1 - x2));
    const double l2 = ((x - x0) + (x - x1)) / ((x2 - x0) * (x2 - x1));
    return l0 * u[a] + l1 * u[a + 1] + l2 * u[a + 2];
  };
  d[0] = three_point(0, g[0]);
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = three_point(i - 1, g[i]);
  d[n - 1] = three_point(n - 3, g[n - 1]);
  return RadialFunction(u.grid_ptr(), std::move(d));
}

inline double lp_norm(const RadialFunction& u, double p) {
  const auto w = u.grid().weights();
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += w[i] * std::pow(std::abs(u[i]), p);
  return std::pow(s, 1.0 / p);
}

inline NormReport norms(const RadialFunction& u) {
  const RadialFunction du = differentiate(u);
  const auto w = u.grid().weights();
  double grad2 = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) grad2 += w[i] * du[i] * du[i];
  NormReport rep;
  for (double p : {p_two, p_twelve_fifths, p_three, p_six}) rep.lp[p] = lp_norm(u, p);
  rep.d12 = std::sqrt(grad2);
  rep.h1 = std::sqrt(grad2 + rep.lp[p_two] * rep.lp[p_two]);
  return rep;
}

// ---------------------------------------------------------------------------
// Linear-algebra helpers shared by the Poisson cross-check and the H^1 Riesz map.

/// Solves a symmetric tridiagonal system (diag, off) x = rhs by the Thomas
/// algorithm; off[k] couples unknowns k and k+1.
inline std::vector<double> solve_tridiagonal(std::span<const double> diag, std::span<const double> off,
                                             std::span<const double> rhs) {
  const std::size_t m = diag.size();
  std::vector<double> c(m, 0.0), x(rhs.begin(), rhs.end());
  double b = diag[0];
  if (b == 0.0) throw std::runtime_error("solve_tridiagonal: zero pivot");
  x[0] /= b;
  for (std::size_t k = 1; k < m; ++k) {
    c[k - 1] = off[k - 1] / b;
    b = diag[k] - off[k - 1] * c[k - 1];
    if (b == 0.0) throw std::runtime_error("solve_tridiagonal: zero pivot");
    x[k] = (x[k] - off[k - 1] * x[k - 1]) / b;
  }
  for (std::size_t k = m - 1; k-- > 0;) x[k] -= c[k] * x[k + 1];
  return x;
}

}  // namespace smvar
