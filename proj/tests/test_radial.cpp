#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "smvar/radial.hpp"

using namespace smvar;

namespace {

double gaussian_lp_closed(double a, double p) { return std::pow(std::pow(pi * a * a / p, 1.5), 1.0 / p); }

}  // namespace

TEST(RadialGrid, RejectsBadNodeSets) {
  EXPECT_THROW(RadialGrid::uniform(1.0, 15), std::invalid_argument);
  EXPECT_THROW(RadialGrid::uniform(-1.0, 100), std::invalid_argument);
  std::vector<double> shifted(20);
  for (std::size_t i = 0; i < shifted.size(); ++i) shifted[i] = 0.1 + i;
  EXPECT_THROW(RadialGrid{shifted}, std::invalid_argument);
  std::vector<double> flat(20);
  for (std::size_t i = 0; i < flat.size(); ++i) flat[i] = static_cast<double>(i);
  flat[7] = flat[6];
  EXPECT_THROW(RadialGrid{flat}, std::invalid_argument);
}

TEST(RadialGrid, BallVolumeConvergesAtSecondOrder) {
  auto err = [](std::size_t n) {
    auto g = RadialGrid::uniform(1.0, n);
    double v = 0.0;
    for (double w : g->weights()) v += w;
    return std::abs(v - four_pi / 3.0);
  };
  const double ratio = err(101) / err(201);
  EXPECT_NEAR(ratio, 4.0, 0.2);
}

TEST(RadialGrid, SimpsonIsExactForLowDegreeIntegrands) {
  // Non-uniform Simpson integrates quadratics exactly: 4 pi int_0^1 r^2 dr.
  std::vector<double> r(41);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::pow(static_cast<double>(i) / 40.0, 1.3);
  RadialGrid g(r, Quadrature::simpson);
  double s = 0.0;
  for (double w : g.weights()) s += w;
  EXPECT_NEAR(s, four_pi / 3.0, 1e-12);
  // On a uniform grid it is exact for cubics: 4 pi int_0^1 r^2 (1 + r) dr.
  auto u = RadialGrid::uniform(1.0, 41, Quadrature::simpson);
  double c = 0.0;
  for (std::size_t i = 0; i < u->size(); ++i) c += u->weights()[i] * (1.0 + (*u)[i]);
  EXPECT_NEAR(c, four_pi * (1.0 / 3.0 + 0.25), 1e-12);
}

TEST(RadialFunction, RejectsNonFiniteAndMismatchedSamples) {
  auto g = RadialGrid::uniform(1.0, 32);
  std::vector<double> v(32, 0.0);
  v[3] = std::nan("");
  EXPECT_THROW(RadialFunction(g, v), std::invalid_argument);
  EXPECT_THROW(RadialFunction(g, std::vector<double>(31, 0.0)), std::invalid_argument);
  EXPECT_THROW(RadialFunction(nullptr, std::vector<double>(32, 0.0)), std::invalid_argument);
}

TEST(RadialFunction, InterpolatesLinearlyAndVanishesOutside) {
  auto g = RadialGrid::uniform(2.0, 21);
  auto u = RadialFunction::sample(g, [](double r) { return 3.0 * r - 1.0; });
  EXPECT_NEAR(u.at(0.37), 3.0 * 0.37 - 1.0, 1e-14);
  EXPECT_DOUBLE_EQ(u.at(2.5), 0.0);
  auto fine = RadialGrid::uniform(2.0, 81);
  auto v = u.resample(fine);
  for (std::size_t i = 0; i < fine->size(); ++i) EXPECT_NEAR(v[i], 3.0 * (*fine)[i] - 1.0, 1e-13);
}

TEST(Norms, GaussianLpAndH1MatchClosedForms) {
  const double a = 1.3;
  auto g = RadialGrid::uniform(12.0, 4001);
  auto u = RadialFunction::sample(g, [&](double r) { return std::exp(-r * r / (a * a)); });
  const NormReport rep = norms(u);
  for (double p : {p_two, p_twelve_fifths, p_three, p_six})
    EXPECT_NEAR(rep.l(p), gaussian_lp_closed(a, p), 1e-5 * gaussian_lp_closed(a, p)) << "p = " << p;
  const double h1_sq = std::pow(pi * a * a / 2.0, 1.5) * (1.0 + 3.0 / (a * a));
  EXPECT_NEAR(rep.h1 * rep.h1, h1_sq, 1e-4 * h1_sq);
}

TEST(Differentiate, ExactOnQuadraticsIncludingEnds) {
  std::vector<double> r(30);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = 0.05 * i + 0.002 * i * i;
  auto g = std::make_shared<const RadialGrid>(r);
  auto u = RadialFunction::sample(g, [](double x) { return 2.0 - x + 0.5 * x * x; });
  auto du = differentiate(u);
  for (std::size_t i = 0; i < g->size(); ++i) EXPECT_NEAR(du[i], -1.0 + (*g)[i], 1e-11);
}

TEST(Integrate, RejectsNonFiniteSamples) {
  auto g = RadialGrid::uniform(1.0, 20);
  std::vector<double> v(20, 1.0);
  v[5] = INFINITY;
  EXPECT_THROW(integrate_r3(*g, v), std::invalid_argument);
}

TEST(Tridiagonal, MatchesDenseSolve) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const std::size_t m = 12;
  std::vector<double> diag(m), off(m - 1), x(m);
  for (std::size_t i = 0; i < m; ++i) diag[i] = 4.0 + U(rng), x[i] = U(rng);
  for (auto& o : off) o = U(rng);
  std::vector<double> b(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    b[i] += diag[i] * x[i];
    if (i + 1 < m) b[i] += off[i] * x[i + 1], b[i + 1] += off[i] * x[i];
  }
  const auto y = solve_tridiagonal(diag, off, b);
  for (std::size_t i = 0; i < m; ++i) EXPECT_NEAR(y[i], x[i], 1e-12);
}
