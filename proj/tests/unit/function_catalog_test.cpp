#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include <holoflow/errors.hpp>
#include <holoflow/function_catalog.hpp>

#include "oracles.hpp"

using namespace holoflow;
using oracle::C;

namespace {

ZeroTable parse(const std::string& text) {
  std::istringstream in(text);
  return parse_zero_table(in, "inline");
}

ZeroTable bundled() { return load_zero_table(oracle::zero_table_path()); }

}  // namespace

TEST(ZeroTable, ParsesTwoZeros) {
  const auto t = parse("14.134725141734695\n21.022039638771555\n");
  ASSERT_EQ(t.size(), 2u);
  EXPECT_DOUBLE_EQ(t.gammas[0], 14.134725141734695);
  EXPECT_DOUBLE_EQ(t.gammas[1], 21.022039638771555);
  EXPECT_EQ(t.rho(1), C(0.5, 14.134725141734695));
}

TEST(ZeroTable, EmptyFileIsValid) {
  const auto t = parse("");
  EXPECT_TRUE(t.empty());
  EXPECT_THROW(build_xi_approx(t, 1, 1.0), InsufficientZeros);
}

TEST(ZeroTable, CommentsAndBlankLinesSkipped) {
  const auto t = parse("# header\n\n14.1\n  \n21.0\n");
  EXPECT_EQ(t.size(), 2u);
}

TEST(ZeroTable, DecreasingLineReported) {
  try {
    parse("21.0\n14.1\n");
    FAIL() << "expected MonotonicityError";
  } catch (const MonotonicityError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(ZeroTable, GarbageAndNonPositiveRejected) {
  EXPECT_THROW(parse("14.1\nabc\n"), ParseError);
  EXPECT_THROW(parse("-3.0\n"), ParseError);
  EXPECT_THROW(parse("0\n"), ParseError);
  EXPECT_THROW(load_zero_table("/nonexistent/zeros.txt"), IoError);
}

TEST(ZeroTable, BundledTableMatchesPublishedValues) {
  const auto t = bundled();
  ASSERT_EQ(t.size(), 100u);
  EXPECT_NEAR(t.gammas[0], oracle::gamma1, 1e-14);
  EXPECT_NEAR(t.gammas[1], oracle::gamma2, 1e-14);
  EXPECT_NEAR(t.gammas[2], oracle::gamma3, 1e-14);
  EXPECT_NEAR(t.gammas[3], oracle::gamma4, 1e-14);
  // gamma_100 from the published zero tables
  EXPECT_NEAR(t.gammas[99], 236.524229665816205802, 1e-12);
}

TEST(ZeroTable, SymmetricZerosUpperHalfFirst) {
  const auto z = bundled().symmetric_zeros(2);
  ASSERT_EQ(z.size(), 4u);
  EXPECT_EQ(z[0], C(0.5, oracle::gamma1));
  EXPECT_EQ(z[1], C(0.5, oracle::gamma2));
  EXPECT_EQ(z[2], C(0.5, -oracle::gamma1));
  EXPECT_EQ(z[3], C(0.5, -oracle::gamma2));
}

TEST(XiApprox, VanishesAtConstructedRoot) {
  const auto t = bundled();
  const auto h = build_xi_approx(t, 1, 1.0);
  EXPECT_LT(std::abs(h.value(t.rho(1))), 1e-12);
}

TEST(XiApprox, ValueAtHalf) {
  const auto h = build_xi_approx(bundled(), 1, 1.0);
  const double g = oracle::gamma1;
  const C expected = g * g / (0.25 + g * g);
  EXPECT_NEAR(std::abs(h.value(0.5) - expected), 0.0, 1e-15);
  EXPECT_NEAR(expected.real(), 0.99875, 1e-5);
}

TEST(XiApprox, RealOnCriticalLine) {
  const auto h = build_xi_approx(bundled(), 1, 1.0);
  for (double t = -40.0; t <= 40.0; t += 0.37) {
    const C v = h.value(C(0.5, t));
    EXPECT_LE(std::abs(v.imag()), 1e-14 * std::max(1.0, std::abs(v))) << "t = " << t;
  }
}

TEST(XiApprox, MatchesDirectProductAndDerivatives) {
  const auto t = bundled();
  for (std::size_t m : {1u, 4u, 20u}) {
    const double scale = 0.7;
    const auto h = build_xi_approx(t, m, scale);
    const std::span<const double> g(t.gammas.data(), m);
    auto f = [&](C z) { return oracle::xi_product(g, z, scale); };
    for (C z : {C(0.3, 0.2), C(-2.0, 5.0), C(3.0, 12.0)}) {
      EXPECT_LT(oracle::rel(h.value(z), f(z)), 1e-13) << m;
      EXPECT_LT(oracle::rel(h.derivative(z), oracle::derivative(f, z)), 1e-7) << m;
      auto df = [&](C w) { return h.derivative(w); };
      EXPECT_LT(oracle::rel(h.second_derivative(z), oracle::derivative(df, z)), 1e-7) << m;
    }
  }
}

TEST(XiApprox, Guards) {
  const auto t = bundled();
  EXPECT_THROW(build_xi_approx(t, 0, 1.0), InvalidArgument);
  EXPECT_THROW(build_xi_approx(t, 1, 0.0), InvalidArgument);
  EXPECT_THROW(build_xi_approx(t, 1, -1.0), InvalidArgument);
  EXPECT_THROW(build_xi_approx(t, 101, 1.0), InsufficientZeros);
}

TEST(CoshShift, ValuesFromExponentials) {
  const auto h = HoloFunction::cosh_shift();
  auto cosh_ref = [](C w) { return 0.5 * (std::exp(w) + std::exp(-w)); };
  auto sinh_ref = [](C w) { return 0.5 * (std::exp(w) - std::exp(-w)); };
  EXPECT_LT(std::abs(h.eval(0.5, 0).value - 1.0), 1e-15);
  EXPECT_LT(std::abs(h.eval(C(0.5, oracle::pi), 0).value - C(-1.0)), 1e-15);
  EXPECT_LT(std::abs(h.eval(C(0.5, oracle::pi / 2), 1).value - C(0.0, 1.0)), 1e-15);
  for (C z : {C(1.3, -0.4), C(-2.0, 7.0)}) {
    EXPECT_LT(oracle::rel(h.value(z), cosh_ref(z - 0.5)), 1e-14);
    EXPECT_LT(oracle::rel(h.derivative(z), sinh_ref(z - 0.5)), 1e-14);
    EXPECT_LT(oracle::rel(h.second_derivative(z), cosh_ref(z - 0.5)), 1e-14);
  }
}

TEST(Eval, OverflowFlaggedAndOrderChecked) {
  const auto h = HoloFunction::cosh_shift();
  EXPECT_TRUE(h.eval(C(1000.0, 0.0), 0).overflow);
  EXPECT_FALSE(h.eval(C(1.0, 0.0), 2).overflow);
  EXPECT_THROW(h.eval(1.0, 3), InvalidArgument);
  EXPECT_THROW(h.eval(1.0, -1), InvalidArgument);
}

TEST(Polynomial, HornerAndDerivatives) {
  const std::vector<C> c{C(1, 1), C(0, -2), C(3, 0), C(0.5, 0.25)};
  const auto h = HoloFunction::polynomial(c);
  const std::vector<C> dc{c[1], 2.0 * c[2], 3.0 * c[3]};
  const std::vector<C> d2c{2.0 * c[2], 6.0 * c[3]};
  for (C z : {C(0.0), C(1.5, -2.0), C(-3.0, 0.5)}) {
    EXPECT_LT(oracle::rel(h.value(z), oracle::horner(c, z)), 1e-15);
    EXPECT_LT(oracle::rel(h.derivative(z), oracle::horner(dc, z)), 1e-15);
    EXPECT_LT(oracle::rel(h.second_derivative(z), oracle::horner(d2c, z)), 1e-15);
  }
  EXPECT_EQ(HoloFunction::polynomial({}).value(C(2.0, 1.0)), C(0.0));
}

TEST(Linear, ValueAndRoot) {
  const auto h = HoloFunction::linear(C(2.0, -1.0));
  EXPECT_EQ(h.value(C(1.0, 1.0)), C(2.0, -1.0) * C(1.0, 1.0));
  EXPECT_EQ(h.derivative(7.0), C(2.0, -1.0));
  EXPECT_EQ(h.second_derivative(7.0), C(0.0));
  ASSERT_EQ(h.known_roots().size(), 1u);
  EXPECT_EQ(h.known_roots()[0], C(0.0));
}

TEST(Times, ScalesValueAndDerivatives) {
  const auto h = build_xi_approx(bundled(), 2, 1.0);
  const auto g = h.times(C(0.0, 2.0));
  const C z(1.0, 3.0);
  EXPECT_LT(std::abs(g.value(z) - C(0.0, 2.0) * h.value(z)), 1e-13 * std::abs(h.value(z)));
  EXPECT_LT(std::abs(g.derivative(z) - C(0.0, 2.0) * h.derivative(z)), 1e-13 * std::abs(h.derivative(z)));
}

TEST(LogDerivativeSum, HandValues) {
  const auto t = bundled();
  EXPECT_LT(std::abs(log_derivative_sum(t, 1, C(0.5, 0.0))), 1e-16);
  const double g = oracle::gamma1;
  const C z(0.5, 2.0 * g);
  const C expected(0.0, -4.0 / (3.0 * g));
  EXPECT_LT(std::abs(log_derivative_sum(t, 1, z) - expected), 1e-16);
}

TEST(LogDerivativeSum, EqualsLogarithmicDerivative) {
  const auto t = bundled();
  for (std::size_t m : {1u, 5u, 30u}) {
    const auto h = build_xi_approx(t, m, 1.0);
    for (C z : {C(2.0, 1.0), C(-1.0, 20.0)}) {
      EXPECT_LT(oracle::rel(log_derivative_sum(t, m, z), h.derivative(z) / h.value(z)), 1e-12);
    }
  }
}

TEST(LogDerivativeSum, PoleGuard) {
  const auto t = bundled();
  EXPECT_THROW(log_derivative_sum(t, 3, t.rho(2)), PoleError);
  EXPECT_THROW(log_derivative_sum(t, 3, std::conj(t.rho(3)) + 1e-15), PoleError);
  EXPECT_NO_THROW(log_derivative_sum(t, 3, t.rho(4)));
}
