#include <gtest/gtest.h>

#include <holoflow/checks.hpp>
#include <holoflow/errors.hpp>

#include "oracles.hpp"

using namespace holoflow;

namespace {

const ZeroTable& table() {
  static const ZeroTable t = load_zero_table(oracle::zero_table_path());
  return t;
}

SuiteOptions small(std::uint64_t seed) {
  SuiteOptions o;
  o.seed = seed;
  o.samples = 16;
  o.parallel_samples = 100;
  return o;
}

std::string failures(const VerifyReport& r) {
  std::string s;
  for (const auto& c : r.checks) {
    if (!c.pass) s += c.suite + "/" + c.name + " = " + std::to_string(c.value) + "\n";
  }
  return s;
}

}  // namespace

TEST(Suites, ParseNames) {
  EXPECT_EQ(parse_suite("geometry"), Suite::Geometry);
  EXPECT_EQ(parse_suite("hamiltonian"), Suite::Hamiltonian);
  EXPECT_EQ(parse_suite("flows"), Suite::Flows);
  EXPECT_EQ(parse_suite("all"), Suite::All);
  EXPECT_THROW(parse_suite("curvature"), InvalidArgument);
  EXPECT_STREQ(to_string(Suite::Flows), "flows");
}

TEST(Suites, CoshPasses) {
  const auto r = run_suite(Suite::All, HoloFunction::cosh_shift(), small(1));
  EXPECT_TRUE(r.passed()) << failures(r);
  EXPECT_GT(r.checks.size(), 10u);
}

TEST(Suites, XiFourPassesForSeveralSeeds) {
  const auto h = build_xi_approx(table(), 4, 1.0);
  for (std::uint64_t seed : {1u, 2u, 9u}) {
    auto o = small(seed);
    o.gammas.assign(table().gammas.begin(), table().gammas.begin() + 4);
    const auto r = run_suite(Suite::All, h, o);
    EXPECT_TRUE(r.passed()) << seed << '\n' << failures(r);
    EXPECT_EQ(r.failures(), 0u);
  }
}

TEST(Suites, SameSeedSameReport) {
  const auto h = build_xi_approx(table(), 2, 1.0);
  const auto a = run_suite(Suite::Geometry, h, small(4)).to_json();
  const auto b = run_suite(Suite::Geometry, h, small(4)).to_json();
  EXPECT_EQ(a.dump(), b.dump());
  const auto c = run_suite(Suite::Geometry, h, small(5)).to_json();
  EXPECT_NE(a.dump(), c.dump());
}

TEST(Suites, RecordsCarryTolerances) {
  const auto r = run_suite(Suite::Hamiltonian, HoloFunction::cosh_shift(), small(1));
  for (const auto& c : r.checks) {
    EXPECT_EQ(c.suite, "hamiltonian");
    EXPECT_GT(c.tolerance, 0.0) << c.name;
    EXPECT_EQ(c.pass, c.value <= c.tolerance) << c.name;
  }
  const auto j = r.to_json();
  ASSERT_TRUE(j.is_object() || j.is_array());
}

TEST(Suites, CenterRoot) {
  const auto c = center_root(HoloFunction::cosh_shift());
  ASSERT_TRUE(c.has_value());
  EXPECT_NEAR(c->real(), 0.5, 1e-12);
  EXPECT_FALSE(center_root(HoloFunction::polynomial({oracle::C(1.0)})).has_value());
}
