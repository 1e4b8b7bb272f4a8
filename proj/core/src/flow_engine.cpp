#include "holoflow/flow_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "holoflow/errors.hpp"
#include "holoflow/export.hpp"
#include "holoflow/integrator.hpp"

namespace holoflow {

namespace {

using Ode1 = Dopri5<1>;
using State1 = Ode1::State;
using Ode2 = Dopri5<2>;
using State2 = Ode2::State;

constexpr int kBisectionIterations = 80;

void validate(const Tolerance& tol, Complex z0, double escape_radius, double span) {
  auto ok = [](double v) { return v > 0.0 && v <= 1e-2; };
  if (!ok(tol.rel) || !ok(tol.abs)) {
    throw InvalidArgument("tolerances must lie in (0, 1e-2]");
  }
  if (!(escape_radius > std::abs(z0))) {
    throw InvalidArgument("escape radius must exceed |z0|");
  }
  if (!(span >= 0.0) || !std::isfinite(span)) throw InvalidArgument("ray span must be finite and >= 0");
}

bool is_finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

// Bisection for the first delta in (0, width] where pred(step(delta)) holds,
// given it fails at 0 and holds at width. Returns the upper bracket.
template <class Step, class Pred>
double bisect_step(double width, Step&& step, Pred&& pred) {
  double lo = 0.0, hi = width;
  for (int i = 0; i < kBisectionIterations && hi - lo > 1e-15 * width; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (pred(step(mid))) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

template <class Field>
Trajectory integrate_field(const HoloFunction& h, Complex z0, const TimeRay& ray,
                           const Tolerance& tol, double radius,
                           std::span<const double> sample_points, Field&& field,
                           double guard_eps) {
  Trajectory tr;
  const Complex dir = ray.direction();
  tr.samples.push_back({0.0, 0.0, z0, h.value(z0)});
  if (ray.span == 0.0) return tr;

  Ode1 ode([&](double, const State1& y) { return State1{dir * field(y[0])}; }, tol);

  auto observer = [&](double s0, const State1& y0, double s1, const State1& y1) {
    const Complex z = y1[0];
    if (std::abs(z) > radius) {
      const double width = s1 - s0;
      const double delta = bisect_step(
          width, [&](double d) { return ode.step(s0, y0, d)[0]; },
          [&](Complex zc) { return std::abs(zc) > radius; });
      const Complex zc = ode.step(s0, y0, delta)[0];
      tr.samples.push_back({s0 + delta, (s0 + delta) * dir, zc, h.value(zc)});
      tr.status = TrajectoryStatus::EscapedAt;
      tr.escape_s = s0 + delta;
      return false;
    }
    tr.samples.push_back({s1, s1 * dir, z, h.value(z)});
    if (guard_eps > 0.0) {
      const double dh = std::abs(h.derivative(z));
      if (dh < guard_eps) {
        tr.status = TrajectoryStatus::CriticalPointAbort;
        tr.abort_at = z;
        tr.abort_derivative = dh;
        return false;
      }
    }
    return true;
  };

  const auto out = ode.integrate(0.0, State1{z0}, ray.span, observer, sample_points);
  if (out.status == IntegrationStatus::StepUnderflow ||
      out.status == IntegrationStatus::TooManySteps) {
    tr.status = TrajectoryStatus::StiffnessAbort;
  }
  return tr;
}

}  // namespace

const char* to_string(TrajectoryStatus status) {
  switch (status) {
    case TrajectoryStatus::Completed:
      return "completed";
    case TrajectoryStatus::EscapedAt:
      return "escaped";
    case TrajectoryStatus::StiffnessAbort:
      return "stiffness_abort";
    case TrajectoryStatus::ClosedOrbit:
      return "closed_orbit";
    case TrajectoryStatus::CriticalPointAbort:
      return "critical_point";
  }
  return "unknown";
}

const char* to_string(DirectionOutcome outcome) {
  switch (outcome) {
    case DirectionOutcome::FiniteEscape:
      return "finite_escape";
    case DirectionOutcome::InfiniteEscape:
      return "infinite_escape";
    case DirectionOutcome::Equilibrium:
      return "equilibrium";
    case DirectionOutcome::ClosedOrbit:
      return "closed_orbit";
    case DirectionOutcome::Undetermined:
      return "undetermined";
  }
  return "unknown";
}

Trajectory integrate_ray(const HoloFunction& h, Complex z0, const TimeRay& ray,
                         const Tolerance& tol, double escape_radius,
                         std::span<const double> sample_points) {
  const double radius = escape_radius > 0.0 ? escape_radius : default_escape_radius(z0);
  validate(tol, z0, radius, ray.span);
  return integrate_field(h, z0, ray, tol, radius, sample_points,
                         [&](Complex z) { return h.value(z); }, 0.0);
}

Trajectory integrate_newton(const HoloFunction& h, Complex z0, const TimeRay& ray,
                            const Tolerance& tol, double guard_eps, double escape_radius,
                            std::span<const double> sample_points) {
  const double radius = escape_radius > 0.0 ? escape_radius : default_escape_radius(z0);
  validate(tol, z0, radius, ray.span);
  if (!(guard_eps > 0.0)) throw InvalidArgument("guard_eps must be positive");
  const double dh0 = std::abs(h.derivative(z0));
  if (!(dh0 > guard_eps)) throw CriticalPointAbort(z0, dh0);
  return integrate_field(
      h, z0, ray, tol, radius, sample_points,
      [&](Complex z) {
        const Jet j = h.jet(z);
        return -j.f / j.df;
      },
      guard_eps);
}

Complex desingularized_newton_field(const HoloFunction& h, Complex z) {
  const Jet j = h.jet(z);
  return -j.f * std::conj(j.df);
}

Trajectory integrate_desingularized(const HoloFunction& h, Complex z0, const TimeRay& ray,
                                   const Tolerance& tol, double escape_radius,
                                   std::span<const double> sample_points) {
  const double radius = escape_radius > 0.0 ? escape_radius : default_escape_radius(z0);
  validate(tol, z0, radius, ray.span);
  return integrate_field(h, z0, ray, tol, radius, sample_points,
                         [&](Complex z) { return desingularized_newton_field(h, z); }, 0.0);
}

std::optional<ClosedOrbit> find_closed_orbit(const HoloFunction& h, Complex z0,
                                             const Tolerance& tol, double horizon,
                                             double escape_radius, double accept_gap) {
  const double radius = escape_radius > 0.0 ? escape_radius : default_escape_radius(z0);
  validate(tol, z0, radius, horizon);
  const Complex h0 = h.value(z0);
  if (!(std::abs(h0) > pole_epsilon(z0)) || !is_finite(h0)) return std::nullopt;
  const double gap_limit = accept_gap > 0.0 ? accept_gap : 1e-6 * (1.0 + std::abs(z0));

  // Signed distance to the section, positive on the side the flow leaves towards.
  const Complex normal = h0 / std::abs(h0);
  auto side = [&](Complex z) { return (z - z0).real() * normal.real() + (z - z0).imag() * normal.imag(); };

  Ode1 ode([&](double, const State1& y) { return State1{h.value(y[0])}; }, tol);
  ClosedOrbit result;
  Trajectory& tr = result.orbit;
  tr.samples.push_back({0.0, 0.0, z0, h0});
  bool found = false;
  bool escaped = false;

  auto observer = [&](double s0, const State1& y0, double s1, const State1& y1) {
    const Complex z = y1[0];
    if (std::abs(z) > radius) {
      escaped = true;
      return false;
    }
    if (side(y0[0]) < 0.0 && side(z) >= 0.0) {
      const double width = s1 - s0;
      const double delta = bisect_step(
          width, [&](double d) { return ode.step(s0, y0, d)[0]; },
          [&](Complex zc) { return side(zc) >= 0.0; });
      const Complex zc = ode.step(s0, y0, delta)[0];
      const double gap = std::abs(zc - z0);
      if (gap <= gap_limit) {
        tr.samples.push_back({s0 + delta, s0 + delta, zc, h.value(zc)});
        tr.status = TrajectoryStatus::ClosedOrbit;
        tr.period = s0 + delta;
        result.period = s0 + delta;
        result.return_point = zc;
        result.gap = gap;
        found = true;
        return false;
      }
    }
    tr.samples.push_back({s1, s1, z, h.value(z)});
    return true;
  };
  ode.integrate(0.0, State1{z0}, horizon, observer);
  if (!found || escaped) return std::nullopt;
  return result;
}

ClosedOrbit detect_closed_orbit(const HoloFunction& h, Complex z0, const Tolerance& tol,
                                double horizon, double escape_radius) {
  auto orbit = find_closed_orbit(h, z0, tol, horizon, escape_radius);
  if (!orbit) throw NoReturn("no return to the section through z0 within the horizon");
  return std::move(*orbit);
}

Complex orbit_period_analytic(const HoloFunction& h, Complex rho) {
  const Jet j = h.jet(rho);
  if (!(std::abs(j.f) <= 1e-8)) throw NotASimpleRoot("h(rho) does not vanish");
  if (j.df == Complex(0.0) || !is_finite(j.df)) throw NotASimpleRoot("h'(rho) vanishes: multiple root");
  return 2.0 * kPi * kI / j.df;
}

namespace {

struct DirectionResult {
  DirectionOutcome outcome = DirectionOutcome::Undetermined;
  std::optional<double> blowup;
};

// Integrates in the bounded-speed parameter sigma with dz/dsigma =
// sign h / (1 + |h|) and dt/dsigma = 1 / (1 + |h|), so escapes through
// finite-time blow-up stay resolvable.
DirectionResult classify_direction(const HoloFunction& h, Complex z0, double sign, double radius,
                                   double horizon, const Tolerance& tol) {
  const double h0_abs = std::abs(h.value(z0));
  const double rest_level = 1e-12 * std::max(h0_abs, 1e-300);
  Ode2 ode(
      [&](double, const State2& y) {
        const Complex hz = h.value(y[0]);
        const double speed = 1.0 / (1.0 + std::abs(hz));
        return State2{sign * hz * speed, Complex(speed)};
      },
      tol);

  const double radii[3] = {radius, 2.0 * radius, 4.0 * radius};
  double escape_t[3] = {0.0, 0.0, 0.0};
  int crossed = 0;
  DirectionResult res;

  auto observer = [&](double s0, const State2& y0, double s1, const State2& y1) {
    while (crossed < 3 && std::abs(y1[0]) > radii[crossed]) {
      const double r = radii[crossed];
      const double delta = bisect_step(
          s1 - s0, [&](double d) { return ode.step(s0, y0, d); },
          [&](const State2& yc) { return std::abs(yc[0]) > r; });
      escape_t[crossed] = ode.step(s0, y0, delta)[1].real();
      ++crossed;
    }
    if (crossed == 3) return false;
    if (y1[1].real() > horizon) return false;
    if (std::abs(h.value(y1[0])) <= rest_level) {
      res.outcome = DirectionOutcome::Equilibrium;
      return false;
    }
    return true;
  };
  // Parameter budget: enough to cover the horizon at unit speed plus the
  // path out to the outermost radius.
  const double sigma_max = horizon + 64.0 * radii[2];
  ode.integrate(0.0, State2{z0, Complex(0.0)}, sigma_max, observer);

  if (crossed < 3) return res;
  const double d1 = escape_t[1] - escape_t[0];
  const double d2 = escape_t[2] - escape_t[1];
  if (d1 <= 1e-12 * (1.0 + escape_t[0])) {
    res.outcome = DirectionOutcome::FiniteEscape;
    res.blowup = escape_t[2];
    return res;
  }
  const double q = d2 / d1;
  if (q >= 0.0 && q <= 0.75) {
    res.outcome = DirectionOutcome::FiniteEscape;
    res.blowup = escape_t[2] + d2 * q / (1.0 - q);
  } else {
    res.outcome = DirectionOutcome::InfiniteEscape;
  }
  return res;
}

}  // namespace

SeparatrixReport classify_separatrix(const HoloFunction& h, Complex z0, double escape_radius,
                                     double horizon, const Tolerance& tol) {
  const double radius = escape_radius > 0.0 ? escape_radius : 2.0 + std::abs(z0);
  if (!(radius > std::abs(z0))) throw InvalidArgument("escape radius must exceed |z0|");
  if (!(horizon > 0.0)) throw InvalidArgument("horizon must be positive");

  SeparatrixReport report;
  if (const auto orbit = find_closed_orbit(h, z0, tol, horizon, 4.0 * radius)) {
    report.forward = report.backward = DirectionOutcome::ClosedOrbit;
    report.period = orbit->period;
    return report;
  }
  const auto fwd = classify_direction(h, z0, 1.0, radius, horizon, tol);
  const auto bwd = classify_direction(h, z0, -1.0, radius, horizon, tol);
  report.forward = fwd.outcome;
  report.backward = bwd.outcome;
  if (fwd.outcome == DirectionOutcome::Undetermined || bwd.outcome == DirectionOutcome::Undetermined) {
    throw Inconclusive("horizon reached without escape, orbit closure or equilibrium");
  }
  report.positive = fwd.outcome == DirectionOutcome::FiniteEscape;
  report.negative = bwd.outcome == DirectionOutcome::FiniteEscape;
  if (report.positive) report.t_escape_pos = fwd.blowup;
  if (report.negative) report.t_escape_neg = bwd.blowup;
  return report;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  out << "s,t_re,t_im,z_re,z_im,h_re,h_im,status\n";
  const std::size_t n = trajectory.samples.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = trajectory.samples[i];
    out << format_double(p.s) << ',' << format_double(p.t.real()) << ','
        << format_double(p.t.imag()) << ',' << format_double(p.z.real()) << ','
        << format_double(p.z.imag()) << ',' << format_double(p.h.real()) << ','
        << format_double(p.h.imag()) << ',' << (i + 1 == n ? to_string(trajectory.status) : "ok")
        << '\n';
  }
}

}  // namespace holoflow
