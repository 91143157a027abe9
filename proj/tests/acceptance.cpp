// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "smvar/smvar.hpp"

using namespace smvar;

namespace {

struct Outcome {
  bool ok = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

int failures = 0;

void criterion(int id, const char* name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& ex) {
    out = {false, std::string("exception: ") + ex.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > budget_s) {
    out.ok = false;
    out.detail += fmt(" [over budget %.0f s]", budget_s);
  }
  if (!out.ok) ++failures;
  std::printf("%s %2d %-28s %8.2fs  %s\n", out.ok ? "PASS" : "FAIL", id, name, secs, out.detail.c_str());
  std::fflush(stdout);
}

const RunConfig kDefaults{};

Problem default_problem(double lambda) { return kDefaults.problem(lambda); }

double threshold() { return 1.0 / compute_cf(kDefaults.nonlinearity.build(), kDefaults.e); }

std::vector<SweepRecord> multiplicity_records;

}  // namespace

int main() {
  criterion(1, "cf_log_square", 1.0, [] {
    double worst = 0.0;
    for (double e : {0.1, 1.0, 10.0}) worst = std::max(worst, compute_cf(Nonlinearity::log_square(), e));
    return Outcome{worst <= 0.8047 + 1e-3, fmt("max c_f %.6f", worst)};
  });

  criterion(2, "cf_min_plus_powers", 1.0, [] {
    bool ok = true;
    std::string d;
    for (auto [r, p] : {std::pair{0.5, 2.0}, std::pair{0.9, 1.1}}) {
      const Nonlinearity f = Nonlinearity::min_plus_powers(r, p);
      const double cf = compute_cf(f, kDefaults.e);
      const double lf = f.lipschitz().value_or(INFINITY);
      ok = ok && cf <= 1.0 + 1e-9 && cf <= lf && lf == p;
      d += fmt("c_f(%.1f,%.1f) = %.6f ", r, p, cf);
    }
    return Outcome{ok, d};
  });

  criterion(3, "poisson_ball_oracle", 5.0, [] {
    const double e1 = detail::ball_oracle_error(RadialGrid::uniform(20.0, 2000), 1.0);
    const double e2 = detail::ball_oracle_error(RadialGrid::uniform(20.0, 3999), 1.0);
    const double ratio = e1 / e2;
    return Outcome{e1 <= 1e-3 && std::abs(ratio - 4.0) <= 0.8, fmt("error %.3e, halving ratio %.3f", e1, ratio)};
  });

  criterion(4, "potential_identity_bounds", 30.0, [] {
    const Problem p = default_problem(1.0);
    const double d_star = estimate_d_star();
    std::mt19937_64 rng(2024);
    double worst = 0.0;
    bool bounds = true;
    for (int k = 0; k < 50; ++k) {
      const RadialFunction u = detail::random_bump(p, rng);
      worst = std::max(worst, potential_identity_residual(u, p.e()));
      bounds = bounds && potential_bounds_check(u, p.e(), d_star).ok;
    }
    return Outcome{worst <= 1e-3 && bounds, fmt("max residual %.3e, d* %.6f", worst, d_star)};
  });

  criterion(5, "gradient_fd", 30.0, [] {
    const std::vector<Nonlinearity> fs{Nonlinearity::min_abs_powers(0.5, 2.0), Nonlinearity::min_plus_powers(0.5, 2.0),
                                       Nonlinearity::min_plus_powers(0.9, 1.1), Nonlinearity::log_square()};
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      const Problem p(kDefaults.grid(), kDefaults.e, 4.0 * threshold() * unit(rng), kDefaults.weight.build(),
                      fs[k % fs.size()]);
      const RadialFunction u = detail::random_bump(p, rng), v = detail::random_bump(p, rng);
      const RadialFunction g = gradient(u, p);
      double dot = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) dot += g[i] * v[i];
      const double eps = 1e-7;
      std::vector<double> up(u.values().begin(), u.values().end()), um = up;
      for (std::size_t i = 0; i < up.size(); ++i) up[i] += eps * v[i], um[i] -= eps * v[i];
      const double fd = (energy(RadialFunction(p.grid_ptr(), up), p).i_lambda -
                         energy(RadialFunction(p.grid_ptr(), um), p).i_lambda) / (2.0 * eps);
      worst = std::max(worst, std::abs(fd - dot) / std::abs(fd));
    }
    return Outcome{worst <= 1e-5, fmt("max relative error %.3e", worst)};
  });

  criterion(6, "nonexistence", 120.0, [] {
    const Problem p = default_problem(0.5 * threshold());
    std::mt19937_64 rng(kDefaults.solver.seed);
    std::vector<SolutionPair> runs;
    double worst = 0.0;
    bool all_trivial = true;
    for (int k = 0; k < 10; ++k) {
      runs.push_back(minimize(p, detail::random_start(p, rng), kDefaults.solver));
      worst = std::max(worst, runs.back().h1_norm);
      all_trivial = all_trivial && runs.back().converged() && runs.back().h1_norm < 1e-4;
    }
    const NonexistenceReport rep = certify_nonexistence(p, runs);
    return Outcome{all_trivial && rep.applicable && rep.passes,
                   fmt("lambda %.4f, max H1 %.3e", p.lambda(), worst)};
  });

  criterion(7, "multiplicity", 900.0, [] {
    const Problem templ = default_problem(0.0);
    const double thr = threshold();
    const double upper = interval_estimate(templ).upper;
    std::vector<double> lambdas;
    for (int k = 1; k <= 12; ++k) lambdas.push_back(thr * std::pow(4.0 * upper / thr, k / 12.0));
    multiplicity_records = sweep(templ, lambdas, kDefaults.solver, 1);
    int hits = 0;
    double first = 0.0;
    for (const auto& rec : multiplicity_records) {
      const SolutionPair* mn = nullptr;
      const SolutionPair* mp = nullptr;
      for (const auto& s : rec.solutions) {
        if (s.kind == SolutionKind::minimizer && (!mn || s.energy.i_lambda < mn->energy.i_lambda)) mn = &s;
        if (s.kind == SolutionKind::mountain_pass) mp = &s;
      }
      if (!mn || !mp) continue;
      const Problem p = templ.with_lambda(rec.lambda);
      const bool ok = detail::h1_distance(p, mn->u, mp->u) > 1e-2 && mn->residual <= 1e-5 && mp->residual <= 1e-5 &&
                      mn->energy.i_lambda < 0.0 && 0.0 <= mp->energy.i_lambda;
      if (ok && hits++ == 0) first = rec.lambda;
    }
    return Outcome{hits >= 1, fmt("%.0f of 12 points with two solutions, first at lambda %.3f", hits, first)};
  });

  criterion(10, "decay_and_domain", 600.0, [] {
    if (multiplicity_records.empty()) return Outcome{false, "criterion 7 produced no records"};
    RunConfig wide = kDefaults;
    wide.r_max = 40.0;
    wide.n = 4000;
    const GridPtr wg = wide.grid();
    double worst_tail = 0.0, worst_change = 0.0;
    int checked = 0;
    bool ok = true;
    for (const auto& rec : multiplicity_records) {
      if (rec.solutions.empty()) continue;
      const Problem pw = wide.problem(rec.lambda);
      std::optional<SolutionPair> well;
      for (const auto& s : rec.solutions) {
        const RadialGrid& g = s.u.grid();
        double tail = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i)
          if (g[i] >= 0.75 * g.r_max()) tail = std::max(tail, std::abs(s.u[i]));
        worst_tail = std::max(worst_tail, tail / s.u.sup_abs());
        ok = ok && tail < 1e-3 * s.u.sup_abs();
        if (s.kind != SolutionKind::minimizer) continue;
        SolutionPair w = minimize(pw, s.u.resample(wg), kDefaults.solver);
        const double change = std::abs(w.h1_norm - s.h1_norm) / s.h1_norm;
        worst_change = std::max(worst_change, change);
        ok = ok && w.converged() && change < 1e-2;
        ++checked;
        if (!well || w.energy.i_lambda < well->energy.i_lambda) well = std::move(w);
      }
      for (const auto& s : rec.solutions) {
        if (s.kind != SolutionKind::mountain_pass || !well) continue;
        const SolutionPair m = mountain_pass(pw, *well, kDefaults.solver);
        const double change = std::abs(m.h1_norm - s.h1_norm) / s.h1_norm;
        worst_change = std::max(worst_change, change);
        ok = ok && m.converged() && change < 1e-2;
        ++checked;
      }
    }
    return Outcome{ok && checked > 0, fmt("%.0f solutions, max tail ratio %.2e, max H1 change %.2e", checked,
                                          worst_tail, worst_change)};
  });

  criterion(8, "truncation_estimates", 10.0, [] {
    const Nonlinearity f = kDefaults.nonlinearity.build();
    const double hand = m_value(1.0, 1.0, 1.0, 1.0, TruncationSpec{1.0, 0.5, 0.0, 1.0});
    bool ok = std::abs(hand + pi) <= 1e-12;
    double worst = INFINITY;
    int combos = 0;
    for (double R : {1.0, 2.0})
      for (double sigma : {0.5, 0.9, 0.99})
        for (double s0 : {0.1, 1.0, 5.0}) {
          if (combos == 10) break;
          const GridPtr g = RadialGrid::uniform(2.0 * R, 4001);
          const Problem p(g, 1.0, 1.0, Weight::constant_annulus(1.0, 0.0, R), f);
          const TruncationSpec spec{s0, sigma, 0.0, R};
          const RadialFunction u = build_truncation(spec, g);
          const double h1sq = std::pow(discrete_h1(p, u.values()), 2);
          const double lb = truncation_h1_lower_bound(spec);
          const double e2 = energy(u, p).potential;
          const double M = m_lower_bound(p.weight(), f, spec);
          const double s1 = (h1sq - lb) / lb, s2 = (e2 - M) / std::abs(M);
          worst = std::min({worst, s1, s2});
          ok = ok && s1 >= -1e-3 && s2 >= -1e-3;
          ++combos;
        }
    return Outcome{ok, fmt("M(hand) = %.12f, smallest relative slack %.3e", hand, worst)};
  });

  criterion(9, "interval_pipeline", 5.0, [] {
    const TruncationSpec spec{1.0, 0.5, 0.0, 1.0};
    const double t = t_value(spec);
    const Problem p = default_problem(1.0);
    const double N = n_upper_bound(spec, p.e(), estimate_d_star(), estimate_s125());
    const double e1 = energy(build_truncation(spec, p.grid_ptr()), p).e1;
    const IntervalEstimate est = interval_estimate(p);
    const bool ok = std::abs(t - 6.0 * pi) <= 1e-6 && e1 <= N * (1.0 + 1e-3) && !est.vacuous;
    return Outcome{ok, fmt("t - 6pi = %.2e, E1/N = %.4f, window (%.4f, ", t - 6.0 * pi, e1 / N, est.threshold) +
                           fmt("%.6g)", est.upper)};
  });

  criterion(11, "small_energy_probe", 120.0, [] {
    const Problem p = default_problem(1.0);
    double prev = INFINITY;
    bool ok = true;
    std::string d;
    for (double rho : {1e-1, 1e-2, 1e-3}) {
      const SupRatioProbe s = sup_ratio_probe(p, rho, 100, kDefaults.solver.seed);
      ok = ok && s.ratio < prev;
      prev = s.ratio;
      d += fmt("%.3e ", s.ratio);
    }
    return Outcome{ok, "ratios " + d};
  });

  std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
