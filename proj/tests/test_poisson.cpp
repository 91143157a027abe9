#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "smvar/poisson.hpp"

using namespace smvar;

namespace {

// u^2 = 1 on r < 1 with the edge on a node (u^2 = 1/2 there).
double ball_error(std::size_t n, double e) {
  auto g = RadialGrid::uniform(20.0, n);
  auto u = RadialFunction::sample(g, [](double r) {
    if (std::abs(r - 1.0) < 1e-12) return std::sqrt(0.5);
    return r < 1.0 ? 1.0 : 0.0;
  });
  const PoissonSolution sol = solve_phi(u, e);
  double err = 0.0;
  for (std::size_t i = 0; i < g->size(); ++i) {
    const double r = (*g)[i];
    const double exact = r < 1.0 ? four_pi * e * (0.5 - r * r / 6.0) : four_pi * e / (3.0 * r);
    err = std::max(err, std::abs(sol.phi[i] - exact));
  }
  return err;
}

RadialFunction random_profile(const GridPtr& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const double c = 2.0 * U(rng), w = 0.3 + 1.5 * U(rng), a = 0.2 + 2.0 * U(rng);
  return RadialFunction::sample(g, [&](double r) {
    if (r >= g->r_max()) return 0.0;
    const double z = (r - c) / w;
    return a * std::exp(-z * z);
  });
}

}  // namespace

TEST(Poisson, ConstantBallConvergesAtSecondOrder) {
  const double e1 = ball_error(2001, 1.0), e2 = ball_error(4001, 1.0);
  EXPECT_LE(e1, 1e-3);
  EXPECT_NEAR(e1 / e2, 4.0, 0.8);
  EXPECT_NEAR(ball_error(2001, 2.5) / e1, 2.5, 1e-9);  // linear in e
}

TEST(Poisson, GaussianChargeMatchesErfPotential) {
  // u = exp(-r^2): phi = e (pi/2)^{3/2} erf(sqrt(2) r) / r.
  auto g = RadialGrid::uniform(15.0, 3001);
  auto u = RadialFunction::sample(g, [](double r) { return std::exp(-r * r); });
  const double e = 0.7, q = e * std::pow(pi / 2.0, 1.5);
  const PoissonSolution sol = solve_phi(u, e);
  for (std::size_t i = 0; i < g->size(); i += 37) {
    const double r = (*g)[i];
    const double exact = r == 0.0 ? q * 2.0 * std::sqrt(2.0) / std::sqrt(pi) : q * std::erf(std::sqrt(2.0) * r) / r;
    EXPECT_NEAR(sol.phi[i], exact, 1e-4 * q) << "r = " << r;
  }
  EXPECT_NEAR(sol.charge, q, 1e-6 * q);
}

TEST(Poisson, AgreesWithFiniteVolumeSolver) {
  auto g = RadialGrid::uniform(20.0, 2001);
  std::mt19937_64 rng(11);
  for (int k = 0; k < 5; ++k) {
    const RadialFunction u = random_profile(g, rng);
    const RadialFunction a = solve_phi(u, 1.0).phi, b = solve_phi_fd(u, 1.0);
    double diff = 0.0;
    for (std::size_t i = 0; i < g->size(); ++i) diff = std::max(diff, std::abs(a[i] - b[i]));
    EXPECT_LE(diff, 1e-3 * a.sup_abs());
  }
}

TEST(Poisson, DiscreteEnergyIdentityIsExact) {
  auto g = RadialGrid::uniform(20.0, 2000);
  std::mt19937_64 rng(5);
  for (int k = 0; k < 10; ++k) {
    const RadialFunction u = random_profile(g, rng);
    const PoissonSolution sol = solve_phi(u, 1.3);
    const double lhs = sol.d12_norm * sol.d12_norm, rhs = four_pi * 1.3 * sol.interaction;
    EXPECT_NEAR(lhs, rhs, 1e-11 * rhs);
  }
}

TEST(Poisson, IdentityResidualIsSmallAndShrinksWithH) {
  std::mt19937_64 rng(7);
  auto coarse = RadialGrid::uniform(20.0, 1000), fine = RadialGrid::uniform(20.0, 2000);
  for (int k = 0; k < 10; ++k) {
    const RadialFunction u = random_profile(fine, rng);
    const double rf = potential_identity_residual(u, 1.0);
    const double rc = potential_identity_residual(u.resample(coarse), 1.0);
    EXPECT_LE(rf, 1e-3);
    EXPECT_LT(rf, rc);
  }
}

TEST(Poisson, NormBoundsHoldWithSharpSobolevConstant) {
  const double d_star = estimate_d_star();
  auto g = RadialGrid::uniform(20.0, 2000);
  std::mt19937_64 rng(9);
  for (int k = 0; k < 10; ++k) {
    const BoundsReport rep = potential_bounds_check(random_profile(g, rng), 1.0, d_star);
    EXPECT_TRUE(rep.ok) << rep.slack_d12 << " " << rep.slack_interaction;
  }
  EXPECT_THROW(potential_bounds_check(random_profile(g, rng), 1.0, 0.0), std::invalid_argument);
}

TEST(Poisson, RejectsNonPositiveCoupling) {
  auto g = RadialGrid::uniform(1.0, 32);
  EXPECT_THROW(solve_phi(RadialFunction(g), 0.0), std::invalid_argument);
}

TEST(EmbeddingConstants, DStarMatchesSharpSobolevConstant) {
  // Best constant of |phi|_6 <= C |grad phi|_2 in R^3: 3^{-1/2} (pi/2)^{-2/3}.
  const double sharp = 1.0 / std::sqrt(3.0) * std::pow(pi / 2.0, -2.0 / 3.0);
  EXPECT_NEAR(estimate_d_star(), sharp, 1e-6);
}

TEST(EmbeddingConstants, S125MatchesGaussianFamilyOnTheGrid) {
  const double s = estimate_s125();
  // Dense scan of the closed form, independent of the estimator's search.
  double best = 0.0, best_a = 0.0;
  for (int i = 0; i <= 200000; ++i) {
    const double a = std::exp(-3.0 + 6.0 * i / 200000.0);
    const double l = std::pow(pi * a * a * 5.0 / 12.0, 1.5 * 5.0 / 12.0);
    const double h = std::sqrt(std::pow(pi * a * a / 2.0, 1.5) * (1.0 + 3.0 / (a * a)));
    if (l / h > best) best = l / h, best_a = a;
  }
  EXPECT_NEAR(s, best, 1e-9);
  auto g = RadialGrid::uniform(20.0, 4000);
  auto u = RadialFunction::sample(g, [&](double r) { return std::exp(-r * r / (best_a * best_a)); });
  const NormReport n = norms(u);
  EXPECT_NEAR(n.l(p_twelve_fifths) / n.h1, s, 1e-4);
}
