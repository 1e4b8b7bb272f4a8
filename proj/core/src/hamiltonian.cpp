#include "holoflow/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "holoflow/errors.hpp"
#include "holoflow/export.hpp"
#include "holoflow/integrator.hpp"

namespace holoflow {

namespace {

Complex checked_h(const HoloFunction& h, Complex z) {
  const Complex v = h.value(z);
  if (!(std::abs(v) > pole_epsilon(z))) {
    throw MomentumPole("h(z) vanishes at the evaluation point");
  }
  return v;
}

Complex checked_h0(const HoloFunction& h, Complex z0) {
  const Complex v = h.value(z0);
  if (!(std::abs(v) > pole_epsilon(z0))) throw AnchorPole("h(z0) vanishes at the anchor");
  return v;
}

double wrap(double a) { return std::remainder(a, 2.0 * kPi); }

}  // namespace

std::pair<Complex, Complex> hamiltonian_field(const HoloFunction& h, Complex z, Complex p) {
  const Jet j = h.jet(z);
  return {j.f, -j.df * p};
}

Complex momentum_closed_form(const HoloFunction& h, Complex z, Complex z0, Complex p0) {
  const Complex hz = checked_h(h, z);
  return h.value(z0) / hz * p0;
}

Complex sensitivity_closed_form(const HoloFunction& h, Complex z, Complex z0, Complex dz0) {
  const Complex h0 = checked_h0(h, z0);
  return h.value(z) / h0 * dz0;
}

Complex delta_p_closed_form(const HoloFunction& h, Complex z, Complex z0, Complex p0, Complex dz0,
                            Complex dp0) {
  const Complex hz = checked_h(h, z);
  const Jet j0 = h.jet(z0);
  return p0 * dz0 * (j0.df - h.derivative(z)) / hz + dp0 * j0.f / hz;
}

Complex delta_p_trace_form(std::span<const double> gammas, Complex z, Complex z0, Complex p0,
                           Complex dz0, Complex dp0) {
  const auto h = HoloFunction::xi_approx(gammas, 1.0);
  const Complex sum = log_derivative_sum(gammas, z);
  const Jet j0 = h.jet(z0);
  const Complex hz = h.value(z);
  return p0 * dz0 * (j0.df / hz - sum) + dp0 * j0.f / hz;
}

Complex delta_p_trace_form(const ZeroTable& zeros, std::size_t m, Complex z, Complex z0,
                           Complex p0, Complex dz0, Complex dp0) {
  if (m == 0) throw InvalidArgument("trace form needs m >= 1");
  if (zeros.size() < m) throw InsufficientZeros(m, zeros.size());
  return delta_p_trace_form(std::span<const double>(zeros.gammas.data(), m), z, z0, p0, dz0, dp0);
}

FlowMapMatrix flow_map_matrix(const HoloFunction& h, Complex z, Complex z0, Complex p0) {
  const Complex h0 = checked_h0(h, z0);
  const Jet jz = h.jet(z);
  if (!(std::abs(jz.f) > pole_epsilon(z))) throw MomentumPole("h(z) vanishes at the evaluation point");
  const Complex log_deriv =
      h.kind() == HoloKind::XiApprox ? log_derivative_sum(h.gammas(), z) : jz.df / jz.f;
  FlowMapMatrix M;
  M.m11 = jz.f / h0;
  M.m12 = 0.0;
  M.k_zp = p0 * (h.derivative(z0) / jz.f - log_deriv);
  M.m21 = M.k_zp;
  M.m22 = h0 / jz.f;
  return M;
}

BundleTrajectory integrate_hamiltonian(const HoloFunction& h, const SensitivityBundle& bundle0,
                                       const TimeRay& ray, const Tolerance& tol,
                                       const HamiltonianOptions& opts,
                                       std::span<const double> sample_points) {
  const Complex z0 = bundle0.z0;
  const double radius = opts.escape_radius > 0.0 ? opts.escape_radius : default_escape_radius(z0);
  auto tol_ok = [](double v) { return v > 0.0 && v <= 1e-2; };
  if (!tol_ok(tol.rel) || !tol_ok(tol.abs)) throw InvalidArgument("tolerances must lie in (0, 1e-2]");
  if (!(radius > std::abs(bundle0.z))) throw InvalidArgument("escape radius must exceed |z0|");
  if (!(ray.span >= 0.0) || !std::isfinite(ray.span)) {
    throw InvalidArgument("ray span must be finite and >= 0");
  }

  BundleTrajectory tr;
  tr.samples.push_back({0.0, 0.0, bundle0});
  if (ray.span == 0.0) return tr;

  using Ode = Dopri5<4>;
  const Complex dir = ray.direction();
  const Complex source = bundle0.p0 * bundle0.dz0;
  Ode ode(
      [&](double, const Ode::State& y) {
        const Jet j = h.jet(y[0]);
        return Ode::State{dir * j.f, -dir * j.df * y[1], dir * j.df * y[2],
                          -dir * (j.d2f * source + j.df * y[3])};
      },
      tol);
  ode.set_max_step(opts.max_step > 0.0 ? opts.max_step : ray.span / 256.0);

  auto make = [&](const Ode::State& y) {
    SensitivityBundle b = bundle0;
    b.z = y[0];
    b.p = y[1];
    b.dz = y[2];
    b.dp = y[3];
    return b;
  };
  auto observer = [&](double, const Ode::State&, double s1, const Ode::State& y1) {
    tr.samples.push_back({s1, s1 * dir, make(y1)});
    if (std::abs(y1[0]) > radius) {
      tr.status = TrajectoryStatus::EscapedAt;
      tr.escape_s = s1;
      return false;
    }
    return true;
  };
  const Ode::State y0{bundle0.z, bundle0.p, bundle0.dz, bundle0.dp};
  const auto out = ode.integrate(0.0, y0, ray.span, observer, sample_points);
  if (out.status == IntegrationStatus::StepUnderflow ||
      out.status == IntegrationStatus::TooManySteps) {
    tr.status = TrajectoryStatus::StiffnessAbort;
  }
  return tr;
}

double ClosedFormResiduals::max() const { return std::max({p, dz, dp}); }

ClosedFormResiduals closed_form_residuals(const HoloFunction& h, const SensitivityBundle& b) {
  auto rel = [](Complex num, Complex exact) { return std::abs(num - exact) / (1.0 + std::abs(exact)); };
  ClosedFormResiduals r;
  r.p = rel(b.p, momentum_closed_form(h, b.z, b.z0, b.p0));
  r.dz = rel(b.dz, sensitivity_closed_form(h, b.z, b.z0, b.dz0));
  r.dp = rel(b.dp, delta_p_closed_form(h, b.z, b.z0, b.p0, b.dz0, b.dp0));
  return r;
}

double PhaseUnwrapper::push(Complex w) {
  const double a = std::arg(w);
  if (!started_) {
    started_ = true;
    value_ = a;
  } else {
    value_ += wrap(a - wrap(value_));
  }
  return value_;
}

std::vector<double> unwrapped_phase(std::span<const Complex> values) {
  PhaseUnwrapper u;
  std::vector<double> out;
  out.reserve(values.size());
  for (const Complex& w : values) out.push_back(u.push(w));
  return out;
}

std::vector<Complex> newton_time(const HoloFunction& h, std::span<const Complex> path) {
  std::vector<Complex> out;
  if (path.empty()) return out;
  out.reserve(path.size());
  const Complex h0 = h.value(path.front());
  const double log_abs0 = std::log(std::abs(h0));
  PhaseUnwrapper phase;
  for (const Complex& z : path) {
    const Complex hz = h.value(z);
    // T = log h(z0) - log h(z); the unwrapped phase of h(z)/h(z0) keeps
    // the imaginary part continuous along the path.
    const double arg = phase.push(hz / h0);
    out.emplace_back(log_abs0 - std::log(std::abs(hz)), -arg);
  }
  return out;
}

void write_bundle_csv(std::ostream& out, const HoloFunction& h, const BundleTrajectory& trajectory) {
  out << "s,z_re,z_im,p_re,p_im,dz_re,dz_im,dp_re,dp_im,H_re,H_im\n";
  for (const auto& sample : trajectory.samples) {
    const auto& b = sample.state;
    const Complex H = b.energy(h);
    out << format_double(sample.s);
    for (const Complex& v : {b.z, b.p, b.dz, b.dp, H}) {
      out << ',' << format_double(v.real()) << ',' << format_double(v.imag());
    }
    out << '\n';
  }
}

}  // namespace holoflow
