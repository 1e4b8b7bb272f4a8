#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include <holoflow/errors.hpp>
#include <holoflow/hamiltonian.hpp>

#include "oracles.hpp"

using namespace holoflow;
using oracle::C;
using oracle::pi;

namespace {

const ZeroTable& table() {
  static const ZeroTable t = load_zero_table(oracle::zero_table_path());
  return t;
}

// RK4 on (z, p, dz, dp) using only values of h and finite differences of h.
oracle::State<4> rk4_bundle(const HoloFunction& h, oracle::State<4> y, C p0dz0, C direction,
                            double span, std::size_t steps) {
  auto f = [&](double, const oracle::State<4>& s) {
    auto val = [&](C w) { return h.value(w); };
    const C d1 = oracle::derivative(val, s[0], 1e-3);
    auto d1f = [&](C w) { return oracle::derivative(val, w, 1e-3); };
    const C d2 = oracle::derivative(d1f, s[0], 1e-3);
    return oracle::State<4>{direction * h.value(s[0]), -direction * d1 * s[1], direction * d1 * s[2],
                            direction * (-d2 * p0dz0 - d1 * s[3])};
  };
  return oracle::rk4<4>(f, y, 0.0, span, steps);
}

}  // namespace

TEST(HamiltonianField, HandValues) {
  const auto lin = HoloFunction::linear(1.0);
  const auto [dz, dp] = hamiltonian_field(lin, 1.0, 1.0);
  EXPECT_EQ(dz, C(1.0));
  EXPECT_EQ(dp, C(-1.0));

  const auto h = HoloFunction::cosh_shift();
  const C z(0.3, 1.1);
  EXPECT_EQ(hamiltonian_field(h, z, 0.0).second, C(0.0));
  const C root(0.5, pi / 2);
  const auto [zr, pr] = hamiltonian_field(h, root, C(2.0, 1.0));
  EXPECT_LT(std::abs(zr), 1e-15);
  EXPECT_LT(std::abs(pr + h.derivative(root) * C(2.0, 1.0)), 1e-15);
}

TEST(ClosedForms, IdentitiesAtAnchor) {
  const auto h = build_xi_approx(table(), 3, 1.0);
  const C z0(1.0, 5.0), p0(0.3, 0.4), dz0(-1.0, 2.0), dp0(0.5, -0.1);
  EXPECT_LT(std::abs(momentum_closed_form(h, z0, z0, p0) - p0), 1e-15);
  EXPECT_LT(std::abs(sensitivity_closed_form(h, z0, z0, dz0) - dz0), 1e-15);
  EXPECT_LT(std::abs(delta_p_closed_form(h, z0, z0, p0, dz0, dp0) - dp0), 1e-15);
  EXPECT_LT(std::abs(delta_p_trace_form(table(), 3, z0, z0, p0, dz0, dp0) - dp0), 1e-12);
  EXPECT_EQ(delta_p_closed_form(h, C(2.0, 1.0), z0, p0, 0.0, 0.0), C(0.0));
}

TEST(ClosedForms, MomentumHalvesWhereHDoubles) {
  const auto h = build_xi_approx(table(), 1, 1.0);
  const C rho = table().rho(1);
  const C z0 = rho + 0.1;
  // |h| grows along the ray from the root; find |h(z)| = 2 |h(z0)| by bisection.
  const double target = 2.0 * std::abs(h.value(z0));
  double lo = 0.1, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (std::abs(h.value(rho + mid)) < target ? lo : hi) = mid;
  }
  const C z = rho + 0.5 * (lo + hi);
  const C p0(0.6, -0.8);
  const double direct = std::abs(oracle::xi_product({table().gammas.data(), 1}, z0) /
                                 oracle::xi_product({table().gammas.data(), 1}, z) * p0);
  EXPECT_NEAR(std::abs(momentum_closed_form(h, z, z0, p0)), std::abs(p0) / 2, 1e-12);
  EXPECT_NEAR(direct, std::abs(p0) / 2, 1e-12);
}

TEST(ClosedForms, MomentumModulusConstantOnLevelCurves) {
  // Imaginary-time Newton trajectories keep |h| fixed.
  const auto h = build_xi_approx(table(), 2, 1.0);
  const C z0(1.2, 16.0), p0(1.0, 1.0);
  const auto traj = integrate_newton(h, z0, TimeRay{pi / 2, 2.0});
  for (const auto& s : traj.samples) {
    EXPECT_NEAR(std::abs(momentum_closed_form(h, s.z, z0, p0)), std::abs(p0), 1e-8);
  }
}

TEST(ClosedForms, TangentAndNormalSensitivity) {
  const auto h = HoloFunction::cosh_shift();
  const C z0(0.9, 0.4);
  for (C z : {C(0.2, 1.0), C(-1.0, 2.5)}) {
    EXPECT_LT(std::abs(sensitivity_closed_form(h, z, z0, h.value(z0)) - h.value(z)), 1e-14);
    EXPECT_LT(std::abs(sensitivity_closed_form(h, z, z0, kI * h.value(z0)) - kI * h.value(z)), 1e-14);
  }
}

TEST(ClosedForms, DeltaPWithoutCouplingIsMomentum) {
  const auto h = build_xi_approx(table(), 2, 1.0);
  const C z0(1.0, 3.0), z(-0.5, 8.0), dp0(0.2, 0.7);
  EXPECT_LT(std::abs(delta_p_closed_form(h, z, z0, 0.0, C(1.0, 1.0), dp0) - momentum_closed_form(h, z, z0, dp0)),
            1e-14);
}

TEST(ClosedForms, PoleGuards) {
  const auto h = build_xi_approx(table(), 2, 1.0);
  const C rho = table().rho(1);
  EXPECT_THROW(momentum_closed_form(h, rho, C(1.0), 1.0), MomentumPole);
  EXPECT_THROW(sensitivity_closed_form(h, C(1.0), rho, 1.0), AnchorPole);
  EXPECT_THROW(delta_p_closed_form(h, rho, C(1.0), 1.0, 1.0, 1.0), MomentumPole);
  EXPECT_THROW(delta_p_trace_form(table(), 2, rho, C(1.0), 1.0, 1.0, 1.0), PoleError);
}

TEST(TraceForm, AgreesWithClosedForm) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (std::size_t m : {1u, 4u, 15u}) {
    const auto h = build_xi_approx(table(), m, 1e-3);
    for (int k = 0; k < 20; ++k) {
      const C z0(u(rng), 10.0 + 5.0 * u(rng)), z(u(rng), 10.0 + 5.0 * u(rng));
      const C p0(u(rng), u(rng)), dz0(u(rng), u(rng)), dp0(u(rng), u(rng));
      const C a = delta_p_closed_form(h, z, z0, p0, dz0, dp0);
      const C b = delta_p_trace_form(table(), m, z, z0, p0, dz0, dp0);
      EXPECT_LT(std::abs(a - b), 1e-10 * std::abs(a)) << m;
    }
  }
}

TEST(TraceForm, PoleDominatesNearZero) {
  const C rho = table().rho(1);
  const C z0(2.0, 5.0), p0(1.0, 0.0), dz0(0.0, 1.0);
  const auto h = build_xi_approx(table(), 3, 1.0);
  double previous_ratio = 1.0;
  for (double r : {1e-2, 1e-4, 1e-6}) {
    const C z = rho + std::polar(r, 0.7);
    const C full = delta_p_trace_form(table(), 3, z, z0, p0, dz0, 0.0);
    const C pole = -p0 * dz0 / (z - rho);
    // everything else stays bounded, so the remainder shrinks relative to the pole term
    const C rest = p0 * dz0 * h.derivative(z0) / h.value(z);
    const double ratio = std::abs(full - pole - rest) / std::abs(pole);
    EXPECT_LT(ratio, previous_ratio);
    previous_ratio = ratio;
  }
  EXPECT_LT(previous_ratio, 1e-5);
}

TEST(FlowMap, IdentityAtAnchorAndUnitDeterminant) {
  const auto h = build_xi_approx(table(), 4, 1.0);
  const C z0(0.8, 11.0), p0(0.4, -1.3);
  const auto I = flow_map_matrix(h, z0, z0, p0);
  EXPECT_LT(std::abs(I.m11 - 1.0), 1e-15);
  EXPECT_LT(std::abs(I.m22 - 1.0), 1e-15);
  EXPECT_EQ(I.m12, C(0.0));
  EXPECT_LT(std::abs(I.m21), 1e-12 * std::abs(p0 * h.derivative(z0) / h.value(z0)));

  for (const auto& hf : {h, HoloFunction::cosh_shift(), HoloFunction::linear(C(1.0, 2.0))}) {
    for (C z : {C(0.1, 0.2), C(2.0, 17.0), C(-3.0, -1.0)}) {
      const auto M = flow_map_matrix(hf, z, z0, p0);
      EXPECT_EQ(M.m12, C(0.0));
      EXPECT_LT(std::abs(M.determinant() - 1.0), 1e-13);
      const C dz0(1.0, -0.5), dp0(0.25, 0.5);
      const auto [dz, dp] = M.apply(dz0, dp0);
      EXPECT_LT(oracle::rel(dz, sensitivity_closed_form(hf, z, z0, dz0)), 1e-13);
      EXPECT_LT(oracle::rel(dp, delta_p_closed_form(hf, z, z0, p0, dz0, dp0)), 1e-10);
    }
  }
}

TEST(FlowMap, CriticalAnchorCoupling) {
  // h'(z0) = 0 at 1/2 for xi-approx (critical line symmetry).
  const auto h = build_xi_approx(table(), 2, 1.0);
  const C z0(0.5, 0.0), p0(1.0, 2.0), z(1.5, 9.0);
  ASSERT_LT(std::abs(h.derivative(z0)), 1e-15);
  C sum = 0.0;
  for (C rho : table().symmetric_zeros(2)) sum += p0 / (z - rho);
  EXPECT_LT(std::abs(flow_map_matrix(h, z, z0, p0).m21 + sum), 1e-14 * std::abs(sum));
}

TEST(Action, ZeroEnergyAndCoshLoop) {
  EXPECT_EQ(action_along_orbit(0.0, C(6.0, 0.0)), C(0.0));

  const auto h = HoloFunction::cosh_shift();
  const C z0 = C(0.5, pi / 2) + 0.3;
  const C p0 = 1.0 / h.value(z0);  // H0 = 1
  const auto orbit = detect_closed_orbit(h, z0);
  EXPECT_NEAR(orbit.period, 2.0 * pi, 1e-7);
  EXPECT_LT(std::abs(action_along_orbit(h.value(z0) * p0, orbit.period) - 2.0 * pi), 1e-7);

  // quadrature of H dt over the numerically integrated loop
  const std::size_t n = 512;
  std::vector<double> pts(n + 1);
  for (std::size_t k = 0; k <= n; ++k) pts[k] = orbit.period * static_cast<double>(k) / n;
  const auto traj = integrate_hamiltonian(h, SensitivityBundle::initial(z0, p0, 0.0, 0.0),
                                          TimeRay{0.0, orbit.period}, {1e-12, 1e-14}, {}, pts);
  std::vector<C> H;
  for (const auto& s : traj.samples) {
    for (double q : pts) {
      if (s.s == q) H.push_back(s.state.energy(h));
    }
  }
  ASSERT_EQ(H.size(), n + 1);
  const double dt = orbit.period / n;
  C S = H.front() + H.back();
  for (std::size_t k = 1; k < n; ++k) S += (k % 2 ? 4.0 : 2.0) * H[k];
  S *= dt / 3.0;
  EXPECT_LT(std::abs(S - action_along_orbit(1.0, orbit.period)) / (2.0 * pi), 1e-6);
}

TEST(IntegrateHamiltonian, MatchesClosedFormsAndRk4) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto h = build_xi_approx(table(), 2, 1.0);
  const Tolerance tol{1e-10, 1e-12};
  for (int k = 0; k < 8; ++k) {
    const C z0 = C(0.5, table().gammas[0]) + C(0.3 * u(rng), 0.3 * u(rng));
    const auto b0 = SensitivityBundle::initial(z0, C(u(rng), u(rng)), C(u(rng), u(rng)), C(u(rng), u(rng)));
    const double theta = 0.5 * u(rng);
    const double span = 0.05 + 0.05 * (u(rng) + 1.0);
    const auto traj = integrate_hamiltonian(h, b0, TimeRay{theta, span}, tol);
    ASSERT_EQ(traj.status, TrajectoryStatus::Completed) << z0 << ' ' << theta << ' ' << span << ' ' << traj.back().s;
    const auto& end = traj.back().state;
    EXPECT_LE(closed_form_residuals(h, end).max(), 10.0 * tol.rel) << k;

    const auto ref = rk4_bundle(h, {b0.z, b0.p, b0.dz, b0.dp}, b0.p0 * b0.dz0, std::polar(1.0, theta), span, 2000);
    EXPECT_LT(oracle::rel(end.z, ref[0]), 1e-7);
    EXPECT_LT(oracle::rel(end.p, ref[1]), 1e-7);
    EXPECT_LT(oracle::rel(end.dz, ref[2]), 1e-7);
    EXPECT_LT(oracle::rel(end.dp, ref[3]), 1e-6);
  }
}

TEST(IntegrateHamiltonian, ConservationOverOneOrbit) {
  const auto h = build_xi_approx(table(), 4, 1.0);
  const C rho = table().rho(1);
  const C z0 = rho + 0.2;
  const double period = orbit_period_analytic(h, rho).real();
  const auto b0 = SensitivityBundle::initial(z0, C(0.7, 0.2), h.value(z0), C(0.1, 0.3));
  const auto traj = integrate_hamiltonian(h, b0, TimeRay{0.0, period});
  const C H0 = b0.energy(h), pdz0 = b0.p0 * b0.dz0;
  double dH = 0.0, dpdz = 0.0;
  for (const auto& s : traj.samples) {
    dH = std::max(dH, std::abs(s.state.energy(h) - H0) / std::abs(H0));
    dpdz = std::max(dpdz, std::abs(s.state.p * s.state.dz - pdz0) / std::abs(pdz0));
  }
  EXPECT_LE(dH, 1e-8);
  EXPECT_LE(dpdz, 1e-8);
  EXPECT_LT(std::abs(traj.back().state.z - z0), 1e-6);
}

TEST(IntegrateHamiltonian, WindingAndCounterRotation) {
  const auto h = HoloFunction::cosh_shift();
  const C z0 = C(0.5, pi / 2) + 0.4;
  const auto b0 = SensitivityBundle::initial(z0, C(1.0, 0.5), C(0.0, 1.0) * h.value(z0), 0.0);
  const auto traj = integrate_hamiltonian(h, b0, TimeRay{0.0, 2.0 * pi}, {1e-11, 1e-13});
  std::vector<C> dz, p;
  for (const auto& s : traj.samples) {
    dz.push_back(s.state.dz);
    p.push_back(s.state.p);
  }
  const auto adz = unwrapped_phase(dz);
  const auto ap = unwrapped_phase(p);
  EXPECT_NEAR(adz.back() - adz.front(), 2.0 * pi, 1e-6);
  EXPECT_NEAR(ap.back() - ap.front(), -2.0 * pi, 1e-6);
  for (std::size_t i = 0; i < adz.size(); ++i) EXPECT_NEAR(adz[i] + ap[i], adz[0] + ap[0], 1e-8);
}

TEST(IntegrateHamiltonian, DeltaPAnglesChange) {
  const auto h = HoloFunction::cosh_shift();
  const C z0 = C(0.5, pi / 2) + 0.4;
  const C p0(1.0, 0.0), dz0 = h.value(z0);
  const C c = p0 * dz0 * h.derivative(z0);
  std::vector<double> diff;
  const auto a = integrate_hamiltonian(h, SensitivityBundle::initial(z0, p0, dz0, c), TimeRay{0.0, 2.0 * pi});
  const auto b = integrate_hamiltonian(h, SensitivityBundle::initial(z0, p0, dz0, kI * c), TimeRay{0.0, 2.0 * pi});
  // compare on the closed forms at a's sample points so both series share a grid
  std::vector<C> da, db;
  for (const auto& s : a.samples) {
    da.push_back(s.state.dp);
    db.push_back(delta_p_closed_form(h, s.state.z, z0, p0, dz0, kI * c));
  }
  const auto pa = unwrapped_phase(da);
  const auto pb = unwrapped_phase(db);
  double lo = 1e300, hi = -1e300;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    lo = std::min(lo, pa[i] - pb[i]);
    hi = std::max(hi, pa[i] - pb[i]);
  }
  EXPECT_GT(hi - lo, 1e-2);
  EXPECT_LE(closed_form_residuals(h, b.back().state).max(), 1e-9);
}

TEST(NewtonTime, DerivativeIsMinusHPrime) {
  const auto h = build_xi_approx(table(), 3, 1.0);
  const C z0 = table().rho(2) + 0.3;
  std::vector<double> pts;
  for (int k = 0; k <= 400; ++k) pts.push_back(0.02 * k);
  const auto traj = integrate_ray(h, z0, TimeRay{0.0, 8.0}, {1e-12, 1e-14}, 0.0, pts);
  std::vector<C> path;
  std::vector<C> hp;
  for (const auto& s : traj.samples) {
    for (double q : pts) {
      if (s.s == q) {
        path.push_back(s.z);
        hp.push_back(h.derivative(s.z));
      }
    }
  }
  ASSERT_EQ(path.size(), pts.size());
  const auto T = newton_time(h, path);
  EXPECT_EQ(T.front(), C(0.0));
  // T(t_k) = -int_0^{t_k} h'(z) dt by Simpson over pairs of panels
  for (std::size_t k = 2; k < path.size(); k += 2) {
    C integral = 0.0;
    for (std::size_t j = 0; j + 2 <= k; j += 2) integral += 0.02 / 3.0 * (hp[j] + 4.0 * hp[j + 1] + hp[j + 2]);
    EXPECT_LT(std::abs(T[k] + integral), 1e-6 * (1.0 + std::abs(integral))) << k;
  }
}

TEST(PhaseUnwrapper, ContinuesAcrossBranchCut) {
  PhaseUnwrapper u;
  double last = 0.0;
  for (int k = 0; k <= 40; ++k) last = u.push(std::polar(2.0, 0.3 * k));
  EXPECT_NEAR(last, 12.0, 1e-12);
  EXPECT_NEAR(u.value(), 12.0, 1e-12);
}

TEST(BundleCsv, Header) {
  const auto h = HoloFunction::linear(1.0);
  const auto traj = integrate_hamiltonian(h, SensitivityBundle::initial(1.0, 1.0, 1.0, 0.0), TimeRay{0.0, 1.0});
  std::ostringstream out;
  write_bundle_csv(out, h, traj);
  const std::string text = out.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "s,z_re,z_im,p_re,p_im,dz_re,dz_im,dp_re,dp_im,H_re,H_im");
}
