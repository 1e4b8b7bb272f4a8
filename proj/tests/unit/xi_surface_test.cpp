#include <cmath>

#include <gtest/gtest.h>

#include <holoflow/errors.hpp>
#include <holoflow/flow_engine.hpp>
#include <holoflow/hamiltonian.hpp>
#include <holoflow/xi_surface.hpp>

#include "oracles.hpp"

using namespace holoflow;
using oracle::C;
using oracle::pi;

namespace {

const ZeroTable& table() {
  static const ZeroTable t = load_zero_table(oracle::zero_table_path());
  return t;
}

// prod (z - rho) / prod (z0 - rho) - exp(-T) by direct multiplication.
C direct_P(std::size_t m, C z, C z0, C T) {
  C num = 1.0, den = 1.0;
  for (std::size_t n = 0; n < m; ++n) {
    for (double s : {1.0, -1.0}) {
      const C rho(0.5, s * table().gammas[n]);
      num *= z - rho;
      den *= z0 - rho;
    }
  }
  return num / den - std::exp(-T);
}

}  // namespace

TEST(PmPolynomial, AnchorIsRootForAllPeriods) {
  const C z0(2.0, 10.0);
  for (int k = -2; k <= 2; ++k) {
    const auto P = PmPolynomial::from_table(table(), 4, z0, C(0.0, 2.0 * pi * k));
    EXPECT_LT(std::abs(P.evaluate(z0)), 1e-15) << k;
  }
}

TEST(PmPolynomial, EvaluateMatchesDirectProduct) {
  const C z0(1.0, 3.0), T(0.3, -0.7);
  for (std::size_t m : {1u, 4u, 12u}) {
    const auto P = PmPolynomial::from_table(table(), m, z0, T);
    for (C z : {C(0.0), C(3.0, 5.0), C(-2.0, 20.0)}) {
      const C ref = direct_P(m, z, z0, T);
      EXPECT_LT(oracle::rel(P.evaluate(z), ref), 1e-12) << m;
      EXPECT_LT(oracle::rel(P.evaluate_log(z), ref), 1e-11) << m;
      auto f = [&](C w) { return direct_P(m, w, z0, T); };
      EXPECT_LT(oracle::rel(P.derivative(z), oracle::derivative(f, z)), 1e-7) << m;
    }
  }
}

TEST(PmPolynomial, CoefficientsFromRootExpansion) {
  const C z0(0.2, 4.0), T(0.5, 1.0);
  for (std::size_t m : {1u, 3u}) {
    const auto P = PmPolynomial::from_table(table(), m, z0, T);
    auto coeffs = oracle::expand_roots(P.zeros());
    C anchor = 1.0;
    for (C rho : P.zeros()) anchor *= z0 - rho;
    for (auto& c : coeffs) c /= anchor;
    coeffs[0] -= std::exp(-T);
    const auto lib = P.coefficients();
    ASSERT_EQ(lib.size(), 2 * m + 1);
    for (std::size_t k = 0; k < lib.size(); ++k) {
      EXPECT_LT(std::abs(lib[k] - coeffs[k]), 1e-13 * (1.0 + std::abs(coeffs[k]))) << m << ' ' << k;
    }
    // leading coefficient of the monic product over Pi_0
    EXPECT_LT(std::abs(lib.back() - 1.0 / anchor), 1e-15 * std::abs(1.0 / anchor));
  }
}

TEST(PmPolynomial, DegenerateAnchor) {
  EXPECT_THROW(PmPolynomial::from_table(table(), 3, table().rho(1)), DegenerateAnchor);
  EXPECT_THROW(PmPolynomial::from_table(table(), 3, std::conj(table().rho(2))), DegenerateAnchor);
}

TEST(PmPolynomial, CriticalPointsOnCriticalLine) {
  for (std::size_t m : {1u, 2u, 5u, 10u}) {
    const auto P = PmPolynomial::from_table(table(), m, C(2.0, 1.0));
    const auto crit = P.critical_points();
    ASSERT_EQ(crit.size(), 2 * m - 1);
    for (std::size_t i = 0; i < crit.size(); ++i) {
      EXPECT_DOUBLE_EQ(crit[i].real(), 0.5);
      if (i > 0) {
        EXPECT_LT(crit[i - 1].imag(), crit[i].imag());
      }
      C sum = 0.0;
      double scale = 0.0;
      for (C rho : P.zeros()) {
        sum += 1.0 / (crit[i] - rho);
        scale += 1.0 / std::abs(crit[i] - rho);
      }
      EXPECT_LT(std::abs(sum), 1e-12 * scale) << m << ' ' << i;
    }
  }
}

TEST(RootsOfPm, OnePairAtTimeZero) {
  const C z0(2.0, 3.0);
  const auto P = PmPolynomial::from_table(table(), 1, z0);
  const auto roots = roots_of_Pm(P);
  ASSERT_EQ(roots.size(), 2u);
  // (z - 1/2)^2 + gamma^2 = (z0 - 1/2)^2 + gamma^2  =>  z = z0 or 1 - z0
  std::vector<C> expected{z0, 1.0 - z0};
  for (C e : expected) {
    double best = 1e300;
    for (C r : roots) best = std::min(best, std::abs(r - e));
    EXPECT_LT(best, 1e-12);
  }
}

TEST(RootsOfPm, OnePairAtLog2) {
  const C z0(2.0, 3.0);
  const auto P = PmPolynomial::from_table(table(), 1, z0, std::log(2.0));
  for (C r : roots_of_Pm(P)) {
    EXPECT_LE(P.relative_residual(r), 1e-12);
    EXPECT_LT(std::abs(direct_P(1, r, z0, std::log(2.0))) / 0.5, 1e-12);
  }
}

TEST(RootsOfPm, VietaAndResiduals) {
  const C z0(1.5, 8.0);
  for (std::size_t m : {4u, 10u, 20u}) {
    const auto P = PmPolynomial::from_table(table(), m, z0, C(0.4, 0.9));
    const auto roots = roots_of_Pm(P);
    ASSERT_EQ(roots.size(), 2 * m);
    for (std::size_t i = 1; i < roots.size(); ++i) {
      EXPECT_TRUE(roots[i - 1].real() < roots[i].real() ||
                  (roots[i - 1].real() == roots[i].real() && roots[i - 1].imag() <= roots[i].imag()));
    }
    for (C r : roots) EXPECT_LE(P.newton_step(r).scaled_residual, 1e-12) << m;
    if (m == 4) {
      auto c = oracle::expand_roots(roots);
      const auto lib = P.coefficients();
      for (std::size_t k = 0; k < lib.size(); ++k) {
        EXPECT_LT(std::abs(c[k] * lib.back() - lib[k]), 1e-9 * (1.0 + std::abs(lib[k]))) << k;
      }
    }
  }
}

TEST(RootsOfPm, HundredPairs) {
  const auto P = PmPolynomial::from_table(table(), 100, C(1.0, 50.0), C(0.2, 0.3));
  const auto roots = roots_of_Pm(P);
  ASSERT_EQ(roots.size(), 200u);
  for (C r : roots) EXPECT_LE(P.newton_step(r).scaled_residual, 1e-12);
}

TEST(RootsOfPm, NoPairsIsAnError) {
  EXPECT_THROW(roots_of_Pm(PmPolynomial(std::span<const double>{}, C(1.0, 1.0))), InvalidArgument);
}

TEST(TraceSurface, SingleNode) {
  const auto grid = trace_surface(table(), 3, C(2.0, 10.0), TimeLattice{});
  ASSERT_EQ(grid.sheet_count(), 6u);
  EXPECT_EQ(grid.lattice.size(), 1u);
  EXPECT_LT(std::abs(grid.sheets[0][0] - C(2.0, 10.0)), 1e-14);
  EXPECT_TRUE(grid.complete);
}

TEST(TraceSurface, ImaginaryRayClosesAfterTwoPi) {
  // the level curve of |h| through z0 encloses rho_1 alone
  const C z0 = table().rho(1) + 0.3;
  const auto lattice = TimeLattice::linspace(0.0, 0.0, 1, 0.0, 2.0 * pi, 65);
  const auto grid = trace_surface(table(), 3, z0, lattice);
  const std::size_t last = lattice.size() - 1;
  EXPECT_LT(std::abs(grid.sheets[0][last] - z0), 1e-10);
  // halfway round the sheet is elsewhere
  EXPECT_GT(std::abs(grid.sheets[0][32] - z0), 1e-2);
  EXPECT_LE(verify_constant_phase(grid), 1e-8);
}

TEST(TraceSurface, RealTimeOrbitMapsToNewtonTime) {
  // A closed real-time orbit of h is a loop in Newton time ending at +-2 pi i;
  // each point z(t) is a root of P at T(t).
  const auto h = build_xi_approx(table(), 1, 1.0);
  const C z0 = table().rho(1) + 0.3;
  const double period = orbit_period_analytic(h, table().rho(1)).real();
  const auto orbit = integrate_ray(h, z0, TimeRay{0.0, period});
  std::vector<C> path;
  for (const auto& s : orbit.samples) path.push_back(s.z);
  const auto T = newton_time(h, path);
  EXPECT_LT(std::abs(std::abs(T.back().imag()) - 2.0 * pi), 1e-8);
  EXPECT_LT(std::abs(T.back().real()), 1e-8);
  EXPECT_LT(std::abs(path.back() - z0), 1e-6);
  for (std::size_t i = 0; i < path.size(); i += std::max<std::size_t>(1, path.size() / 10)) {
    const auto P = PmPolynomial::from_table(table(), 1, z0, T[i]);
    double best = 1e300;
    for (C r : roots_of_Pm(P)) best = std::min(best, std::abs(r - path[i]));
    EXPECT_LT(best, 1e-6) << i;
  }
}

TEST(TraceSurface, SheetZeroFollowsNewtonFlow) {
  const C z0(2.0, 10.0);
  const auto h = build_xi_approx(table(), 4, 1.0);
  const auto lattice = TimeLattice::linspace(0.0, 2.0, 21, 0.0, 0.0, 1);
  const auto grid = trace_surface(table(), 4, z0, lattice);
  const auto flow = integrate_newton(h, z0, TimeRay{0.0, 2.0}, {1e-12, 1e-14}, 1e-8, 0.0, lattice.tau1);
  for (std::size_t j = 0; j < lattice.tau1.size(); ++j) {
    const auto it = std::find_if(flow.samples.begin(), flow.samples.end(),
                                 [&](const auto& s) { return s.s == lattice.tau1[j]; });
    ASSERT_NE(it, flow.samples.end());
    EXPECT_LT(std::abs(grid.sheets[0][j] - it->z), 1e-6) << j;
  }
}

TEST(TraceSurface, ThreadsDoNotChangeResult) {
  const auto lattice = TimeLattice::linspace(-0.5, 1.0, 7, -1.0, 1.0, 5);
  ContinuationOptions one, four;
  four.threads = 4;
  const auto a = trace_surface(table(), 5, C(1.0, 12.0), lattice, one);
  const auto b = trace_surface(table(), 5, C(1.0, 12.0), lattice, four);
  EXPECT_EQ(surface_to_json(a).dump(), surface_to_json(b).dump());
}

TEST(TraceSurface, ContinuationBreakKeepsPartialGrid) {
  const auto lattice = TimeLattice::linspace(0.0, 2.0, 3, 0.0, 0.0, 1);
  ContinuationOptions opts;
  opts.max_jump = 1e-6;
  try {
    trace_surface(table(), 2, C(2.0, 10.0), lattice, opts);
    FAIL() << "expected ContinuationBreak";
  } catch (const ContinuationBreak& e) {
    EXPECT_FALSE(e.partial().complete);
    EXPECT_LT(std::abs(e.partial().sheets[0][0] - C(2.0, 10.0)), 1e-14);
    EXPECT_TRUE(std::isnan(e.partial().sheets[0][e.node()].real()));
  }
}

TEST(TraceSurface, BranchEventAtCriticalValue) {
  const C z0(2.0, 10.0);
  const auto P = PmPolynomial::from_table(table(), 2, z0);
  const C c = P.critical_points()[2];  // between the two upper zeros
  const C Tc = -P.log_ratio(c);        // P(c; Tc) = 0 and P'(c) = 0
  const auto lattice = TimeLattice::linspace(Tc.real() - 0.5, Tc.real() + 0.5, 11, Tc.imag(), Tc.imag(), 1);
  const auto grid = trace_surface(table(), 2, z0, lattice);
  ASSERT_FALSE(grid.branch_events.empty());
  EXPECT_LT(std::abs(grid.branch_events.front().z - c), 1e-3);
}

TEST(ConstantPhase, PerturbedEntryDetected) {
  const auto lattice = TimeLattice::linspace(0.0, 1.0, 5, 0.0, 0.0, 1);
  auto grid = trace_surface(table(), 3, C(2.0, 10.0), lattice);
  EXPECT_LE(verify_constant_phase(grid), 1e-8);
  grid.sheets[2][3] += 1e-3;
  EXPECT_GT(verify_constant_phase(grid), 1e-4);
  EXPECT_EQ(verify_constant_phase(SurfaceGrid{}), 0.0);
}

TEST(SurfaceJson, RoundTripWithUnsolvedNodes) {
  const auto lattice = TimeLattice::linspace(0.0, 1.0, 3, 0.0, 1.0, 2);
  auto grid = trace_surface(table(), 2, C(2.0, 10.0), lattice);
  grid.sheets[1][4] = C(std::nan(""), std::nan(""));
  grid.branch_events.push_back({C(0.1, 0.2), C(0.5, 3.0), 1e-3, 1});
  const auto j = surface_to_json(grid);
  EXPECT_TRUE(j["sheets"][1][4].is_null());
  const auto back = surface_from_json(j);
  EXPECT_EQ(surface_to_json(back).dump(), j.dump());
  EXPECT_EQ(back.sheet_count(), 4u);
  EXPECT_EQ(back.branch_events.size(), 1u);
}

TEST(EvalPmZp, AnchorAndOrbit) {
  const C z0(2.0, 3.0), p0(0.7, -0.2);
  EXPECT_EQ(eval_Pm_zp(table(), 3, z0, p0, z0, p0), C(0.0));
  C a = 1.0, b = 1.0;
  const C z(-1.0, 7.0);
  for (C rho : table().symmetric_zeros(3)) {
    a *= z0 - rho;
    b *= z - rho;
  }
  const C p = p0 * a / b;
  EXPECT_LT(std::abs(eval_Pm_zp(table(), 3, z, p, z0, p0)), 1e-12 * std::abs(p0 * a));
  EXPECT_LT(std::abs(eval_Pm_zp(table(), 3, z, 0.0, z0, p0) + p0 * a), 1e-12 * std::abs(p0 * a));
}
