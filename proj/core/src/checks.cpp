#include "holoflow/checks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "holoflow/errors.hpp"
#include "holoflow/export.hpp"
#include "holoflow/flow_engine.hpp"
#include "holoflow/geometry.hpp"
#include "holoflow/hamiltonian.hpp"
#include "holoflow/xi_surface.hpp"

namespace holoflow {

namespace {

// Tracks the worst value of one check over many samples.
class Worst {
 public:
  Worst(std::string suite, std::string name, std::string quantity, double tolerance)
      : rec_{std::move(suite), std::move(name), std::nullopt, std::move(quantity), 0.0, tolerance,
             true} {}

  // `value` is compared against tolerance * scale.
  void add(double value, Complex z, double scale = 1.0) {
    const double normalized = value / scale;
    if (!seen_ || std::isnan(normalized) || normalized > rec_.value) {
      rec_.value = normalized;
      rec_.point = z;
    }
    seen_ = true;
  }
  void fail(Complex z) {
    rec_.value = std::numeric_limits<double>::infinity();
    rec_.point = z;
    seen_ = true;
  }
  CheckRecord finish() {
    rec_.pass = seen_ && rec_.value <= rec_.tolerance;
    return rec_;
  }

 private:
  CheckRecord rec_;
  bool seen_ = false;
};

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

class Sampler {
 public:
  Sampler(const HoloFunction& h, const SuiteOptions& opts, std::uint64_t stream)
      : h_(h), w_(opts.window), rng_(opts.seed * 0x9E3779B97F4A7C15ULL + stream) {}

  // Uniform point in the window away from zeros of h: |h'/h| <= 4.
  Complex point() {
    std::uniform_real_distribution<double> re(w_.re_min, w_.re_max), im(w_.im_min, w_.im_max);
    for (int attempt = 0; attempt < 10000; ++attempt) {
      const Complex z(re(rng_), im(rng_));
      const Jet j = h_.jet(z);
      if (!finite(j.f) || !finite(j.df) || !(std::abs(j.f) > 1e-8)) continue;
      if (std::abs(j.df / j.f) > 4.0) continue;
      return z;
    }
    throw InvalidArgument("no nonsingular sample points in the window");
  }
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }
  Complex disk(double r) { return std::polar(r * std::sqrt(uniform(0.0, 1.0)), uniform(0.0, 2.0 * kPi)); }

 private:
  const HoloFunction& h_;
  Window w_;
  std::mt19937_64 rng_;
};

// Christoffel symbols from the Koszul formula with finite differences of the
// conformal factor g = 1/|h|^2 only.
std::array<Mat2, 2> koszul_christoffel(const HoloFunction& h, Complex z) {
  // Fourth-order central stencil; a plain central difference leaves about
  // 1e-6 of truncation error at the top of the window.
  constexpr double step = 1e-3;
  auto g = [&](Complex w) { return 1.0 / std::norm(h.value(w)); };
  auto d = [&](Complex e) {
    return (8.0 * (g(z + step * e) - g(z - step * e)) - (g(z + 2.0 * step * e) - g(z - 2.0 * step * e))) /
           (12.0 * step);
  };
  const double g0 = g(z);
  const double dg[2] = {d(1.0), d(kI)};
  std::array<Mat2, 2> out{};
  for (int k = 0; k < 2; ++k) {
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        const double v = (i == k ? dg[j] : 0.0) + (j == k ? dg[i] : 0.0) - (i == j ? dg[k] : 0.0);
        out[k][i][j] = 0.5 * v / g0;
      }
    }
  }
  return out;
}

// Direct expansion of nabla_Y X: directional difference of X plus the
// Christoffel contraction.
Vec2 direct_covariant(const HoloFunction& h, const HoloFunction& X, Complex Y, Complex z) {
  const double step = 1e-5 * (1.0 + std::abs(z)) / std::abs(Y);
  const Complex dX = (X.value(z + step * Y) - X.value(z - step * Y)) / (2.0 * step);
  const MetricFrame f = metric_frame(h, z);
  const Complex x = X.value(z);
  const double y[2] = {Y.real(), Y.imag()}, xv[2] = {x.real(), x.imag()};
  Vec2 out{dX.real(), dX.imag()};
  for (int k = 0; k < 2; ++k) {
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) out[k] += f.gamma(k)[i][j] * y[i] * xv[j];
    }
  }
  return out;
}

double classify_radius(Complex z0) { return 10.0 + 2.0 * std::abs(z0); }

}  // namespace

std::optional<Complex> center_root(const HoloFunction& h) {
  std::optional<Complex> rho;
  switch (h.kind()) {
    case HoloKind::XiApprox:
    case HoloKind::Linear:
      if (!h.known_roots().empty()) rho = h.known_roots().front();
      break;
    case HoloKind::CoshShift:
      rho = Complex(0.5, kPi / 2.0);
      break;
    case HoloKind::GenericPoly:
      break;
  }
  if (!rho) return std::nullopt;
  const Complex d = h.derivative(*rho);
  if (d == Complex(0.0)) return std::nullopt;
  const Complex period = 2.0 * kPi * kI / d;
  if (std::abs(period.imag()) > 1e-10 * std::abs(period)) return std::nullopt;
  return rho;
}

nlohmann::json to_json(const CheckRecord& r) {
  nlohmann::json j;
  j["suite"] = r.suite;
  j["name"] = r.name;
  j["point"] = r.point ? complex_to_json(*r.point) : nlohmann::json(nullptr);
  j["quantity"] = r.quantity;
  j["value"] = std::isfinite(r.value) ? nlohmann::json(r.value) : nlohmann::json(format_double(r.value));
  j["tolerance"] = r.tolerance;
  j["pass"] = r.pass;
  return j;
}

const char* to_string(Suite suite) {
  switch (suite) {
    case Suite::Geometry:
      return "geometry";
    case Suite::Hamiltonian:
      return "hamiltonian";
    case Suite::Flows:
      return "flows";
    case Suite::All:
      return "all";
  }
  return "unknown";
}

Suite parse_suite(std::string_view name) {
  for (Suite s : {Suite::Geometry, Suite::Hamiltonian, Suite::Flows, Suite::All}) {
    if (name == to_string(s)) return s;
  }
  throw InvalidArgument("unknown suite '" + std::string(name) + "'");
}

bool VerifyReport::passed() const { return failures() == 0; }

std::size_t VerifyReport::failures() const {
  return static_cast<std::size_t>(
      std::count_if(checks.begin(), checks.end(), [](const CheckRecord& r) { return !r.pass; }));
}

nlohmann::json VerifyReport::to_json() const {
  nlohmann::json j;
  j["passed"] = passed();
  j["failures"] = failures();
  j["checks"] = nlohmann::json::array();
  for (const auto& r : checks) j["checks"].push_back(holoflow::to_json(r));
  return j;
}

void run_geometry_checks(const HoloFunction& h, const SuiteOptions& opts, VerifyReport& report) {
  const std::string suite = "geometry";
  Sampler sample(h, opts, 1);

  Worst koszul(suite, "christoffel_vs_koszul", "max |Gamma - Gamma_fd|", 1e-6);
  Worst covariant_expansion(suite, "covariant_vs_direct_expansion", "relative difference", 1e-8);
  Worst geo_h(suite, "geodesic_h", "|nabla_h h| / scale", 1e-12);
  Worst geo_ih(suite, "geodesic_ih", "|nabla_ih ih| / scale", 1e-12);
  Worst invariance(suite, "metric_invariance", "max relative change of g, Gamma", 1e-14);
  const HoloFunction X = HoloFunction::polynomial({Complex(1.0, 0.5), Complex(0.0, 0.5), 0.25});
  const HoloFunction ih = h.times(kI);
  for (std::size_t n = 0; n < opts.samples; ++n) {
    const Complex z = sample.point();
    const MetricFrame f = metric_frame(h, z);
    const auto fd = koszul_christoffel(h, z);
    double diff = 0.0;
    for (int k = 0; k < 2; ++k) {
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) diff = std::max(diff, std::abs(f.gamma(k)[i][j] - fd[k][i][j]));
      }
    }
    koszul.add(diff, z);

    const Complex hz = h.value(z);
    for (Direction d : {Direction::AlongH, Direction::AlongIH}) {
      const TangentVector lib = covariant_derivative(h, HoloSplit{X}, d, z);
      const Vec2 ref = direct_covariant(h, X, d == Direction::AlongH ? hz : kI * hz, z);
      const double scale = 1.0 + std::abs(X.derivative(z) * hz) + std::abs(h.derivative(z) * X.value(z));
      covariant_expansion.add(std::hypot(lib.v1 - ref[0], lib.v2 - ref[1]), z, scale);
    }

    const double scale = parallel_residual_scale(h, z);
    geo_h.add(covariant_derivative(h, HoloSplit{h}, Direction::AlongH, z).norm(), z, scale);
    geo_ih.add(covariant_derivative(h, HoloSplit{ih}, Direction::AlongIH, z).norm(), z, scale);

    double change = 0.0;
    for (Complex c : {kI, Complex(-1.0), -kI}) {
      const MetricFrame o = metric_frame(h.times(c), z);
      auto rel = [](double a, double b) { return std::abs(a - b) / (std::abs(a) + 1e-300); };
      change = std::max(change, rel(f.g11, o.g11));
      for (int k = 0; k < 2; ++k) {
        for (int i = 0; i < 2; ++i) {
          for (int j = 0; j < 2; ++j) {
            change = std::max(change, std::abs(f.gamma(k)[i][j] - o.gamma(k)[i][j]) /
                                          (1.0 + std::abs(f.gamma(k)[i][j])));
          }
        }
      }
    }
    invariance.add(change, z);
  }

  Worst parallel_comb(suite, "parallel_linear_combination", "|nabla (A h)| / scale", 1e-12);
  for (std::size_t n = 0; n < opts.parallel_samples; ++n) {
    const Complex z = sample.point();
    const double a = sample.uniform(-3.0, 3.0), b = sample.uniform(-3.0, 3.0);
    const double scale = (1.0 + std::abs(a) + std::abs(b)) * parallel_residual_scale(h, z);
    for (Direction d : {Direction::AlongH, Direction::AlongIH}) {
      parallel_comb.add(covariant_derivative(h, LinearComb{a, b}, d, z).norm(), z, scale);
    }
  }

  Worst halving(suite, "curvature_step_halving", "|ratio - 4|", 0.5);
  // The default step grows like 1 + |z|, so the O(step^2) residue does too.
  Worst flat(suite, "curvature_flatness", "max |R| / (1 + |z|)^2 at default step", 1e-5);
  for (std::size_t n = 0; n < std::min<std::size_t>(opts.samples, 8); ++n) {
    const Complex z = sample.point();
    try {
      flat.add(curvature_flatness_check(h, z) / std::pow(1.0 + std::abs(z), 2), z);
      const double coarse = curvature_flatness_check(h, z, 2e-2);
      const double fine = curvature_flatness_check(h, z, 1e-2);
      // An exactly flat discretization (constant Gamma) has no ratio to test.
      if (coarse > 1e-12) halving.add(std::abs(coarse / fine - 4.0), z);
    } catch (const MetricSingular&) {
      flat.fail(z);
    }
  }

  Worst chart(suite, "time_chart_pullback", "max deviation from (1/2, 0, 1/2)", 1e-12);
  for (std::size_t n = 0; n < std::min<std::size_t>(opts.samples, 8); ++n) {
    const Complex z0 = sample.point();
    const auto tr = integrate_ray(h, z0, TimeRay{0.0, 1.0}, opts.tol, classify_radius(z0));
    Trajectory safe;
    for (const auto& s : tr.samples) {
      if (std::abs(s.h) > 1e-8 && finite(s.h)) safe.samples.push_back(s);
    }
    for (const auto& s : trivialize_in_time_chart(h, safe)) {
      chart.add(std::max({std::abs(s.g_hh - 0.5), std::abs(s.g_hih), std::abs(s.g_ihih - 0.5)}), s.z);
    }
  }

  for (Worst* w : {&koszul, &covariant_expansion, &geo_h, &geo_ih, &invariance, &parallel_comb, &halving, &flat, &chart}) {
    report.checks.push_back(w->finish());
  }
}

void run_hamiltonian_checks(const HoloFunction& h, const SuiteOptions& opts, VerifyReport& report) {
  const std::string suite = "hamiltonian";
  Sampler sample(h, opts, 2);

  Worst equivalence(suite, "closed_form_equivalence", "max relative residual of p, dz, dp", 1e-7);
  for (std::size_t n = 0; n < std::min<std::size_t>(opts.samples, 32); ++n) {
    const Complex z0 = sample.point();
    const auto b0 = SensitivityBundle::initial(z0, sample.disk(1.0), sample.disk(1.0), sample.disk(1.0));
    const TimeRay ray{sample.uniform(0.0, 2.0 * kPi), sample.uniform(0.2, 2.0)};
    const auto tr = integrate_hamiltonian(h, b0, ray, opts.tol, {classify_radius(z0), 0.0});
    try {
      equivalence.add(closed_form_residuals(h, tr.back().state).max(), z0);
    } catch (const Error&) {
      equivalence.fail(z0);
    }
  }
  report.checks.push_back(equivalence.finish());

  Worst flowmap_id(suite, "flow_map_identity_at_anchor", "max |M(z0, z0) - I|", 1e-10);
  Worst flowmap_det(suite, "flow_map_determinant", "|det M - 1|", 1e-12);
  Worst flowmap_apply(suite, "flow_map_reproduces_closed_forms", "relative difference", 1e-10);
  for (std::size_t n = 0; n < opts.samples; ++n) {
    const Complex z0 = sample.point(), z = sample.point();
    const Complex p0 = sample.disk(2.0), dz0 = sample.disk(2.0), dp0 = sample.disk(2.0);
    const FlowMapMatrix I = flow_map_matrix(h, z0, z0, p0);
    flowmap_id.add(std::max({std::abs(I.m11 - 1.0), std::abs(I.m12), std::abs(I.m21) / (1.0 + std::abs(p0)),
                             std::abs(I.m22 - 1.0)}),
                   z0);
    const FlowMapMatrix M = flow_map_matrix(h, z, z0, p0);
    flowmap_det.add(std::abs(M.determinant() - 1.0), z);
    const auto [dz, dp] = M.apply(dz0, dp0);
    const Complex dz_cf = sensitivity_closed_form(h, z, z0, dz0);
    const Complex dp_cf = delta_p_closed_form(h, z, z0, p0, dz0, dp0);
    flowmap_apply.add(std::max(std::abs(dz - dz_cf) / (1.0 + std::abs(dz_cf)),
                               std::abs(dp - dp_cf) / (1.0 + std::abs(dp_cf))),
                      z);
  }
  report.checks.push_back(flowmap_id.finish());
  report.checks.push_back(flowmap_det.finish());
  report.checks.push_back(flowmap_apply.finish());

  if (h.kind() == HoloKind::XiApprox) {
    Worst trace(suite, "trace_form_vs_closed_form", "relative difference", 1e-10);
    for (std::size_t n = 0; n < opts.samples; ++n) {
      const Complex z0 = sample.point(), z = sample.point();
      const Complex p0 = sample.disk(2.0), dz0 = sample.disk(2.0), dp0 = sample.disk(2.0);
      const Complex cf = delta_p_closed_form(h, z, z0, p0, dz0, dp0);
      const Complex tf = delta_p_trace_form(h.gammas(), z, z0, p0, dz0, dp0);
      trace.add(std::abs(cf - tf) / (1.0 + std::abs(cf)), z);
    }
    report.checks.push_back(trace.finish());
  }

  if (const auto rho = center_root(h)) {
    const Complex period_c = orbit_period_analytic(h, *rho);
    const double period = std::abs(period_c);
    const Complex z0 = *rho + 0.05;
    const auto b0 = SensitivityBundle::initial(z0, Complex(0.7, 0.2), Complex(0.3, -0.4), Complex(0.1, 0.5));
    const auto tr = integrate_hamiltonian(h, b0, TimeRay{0.0, period}, opts.tol,
                                          {0.0, period / 2048.0});
    Worst H_drift(suite, "energy_drift_over_orbit", "max |H - H0| / |H0|", 1e-8);
    Worst pdz_drift(suite, "p_dz_drift_over_orbit", "max |p dz - p0 dz0| / |p0 dz0|", 1e-8);
    const Complex H0 = b0.energy(h), c0 = b0.p0 * b0.dz0;
    for (const auto& s : tr.samples) {
      H_drift.add(std::abs(s.state.energy(h) - H0) / std::abs(H0), s.state.z);
      pdz_drift.add(std::abs(s.state.p * s.state.dz - c0) / std::abs(c0), s.state.z);
    }
    report.checks.push_back(H_drift.finish());
    report.checks.push_back(pdz_drift.finish());

    // Trapezoid rule for the loop integral of H dt.
    Complex loop = 0.0;
    for (std::size_t i = 1; i < tr.samples.size(); ++i) {
      const auto& a = tr.samples[i - 1];
      const auto& b = tr.samples[i];
      loop += 0.5 * (a.state.energy(h) + b.state.energy(h)) * (b.s - a.s);
    }
    Worst action(suite, "action_vs_loop_integral", "relative difference", 1e-6);
    const Complex S = action_along_orbit(H0, period);
    action.add(std::abs(loop - S) / std::abs(S), z0);
    report.checks.push_back(action.finish());
  }

  Worst reparam(suite, "newton_time_reparameterization", "max |T - (-int h' dt)| / (1 + |T|)", 1e-6);
  for (std::size_t n = 0; n < std::min<std::size_t>(opts.samples, 8); ++n) {
    const Complex z0 = sample.point();
    const auto tr = integrate_ray(h, z0, TimeRay{0.0, 0.5}, opts.tol, classify_radius(z0));
    std::vector<Complex> path;
    for (const auto& s : tr.samples) path.push_back(s.z);
    const auto T = newton_time(h, path);
    Complex integral = 0.0;
    for (std::size_t i = 1; i < tr.samples.size(); ++i) {
      const auto& a = tr.samples[i - 1];
      const auto& b = tr.samples[i];
      // Simpson on the segment, midpoint from a half step of the flow.
      const double ds = b.s - a.s;
      const auto mid = integrate_ray(h, a.z, TimeRay{0.0, 0.5 * ds}, opts.tol, classify_radius(a.z));
      integral -= ds / 6.0 *
                  (h.derivative(a.z) + 4.0 * h.derivative(mid.back().z) + h.derivative(b.z));
      reparam.add(std::abs(T[i] - integral) / (1.0 + std::abs(T[i])), b.z);
    }
  }
  report.checks.push_back(reparam.finish());
}

void run_flow_checks(const HoloFunction& h, const SuiteOptions& opts, VerifyReport& report) {
  const std::string suite = "flows";
  Sampler sample(h, opts, 3);

  Worst phase(suite, "newton_real_time_phase", "max |arg(h / h0)|", 1e-8);
  Worst decay(suite, "newton_real_time_decay", "max ||h| - |h0| e^-s| / |h0|", 1e-8);
  Worst modulus(suite, "newton_imaginary_time_modulus", "max ||h| / |h0| - 1|", 1e-8);
  for (std::size_t n = 0; n < std::min<std::size_t>(opts.samples, 16); ++n) {
    const Complex z0 = sample.point();
    const Complex h0 = h.value(z0);
    try {
      const auto real = integrate_newton(h, z0, TimeRay{0.0, 2.0}, opts.tol);
      for (const auto& s : real.samples) {
        phase.add(std::abs(std::arg(s.h / h0)), s.z);
        decay.add(std::abs(std::abs(s.h) - std::abs(h0) * std::exp(-s.s)) / std::abs(h0), s.z);
      }
      const auto imag = integrate_newton(h, z0, TimeRay{kPi / 2.0, 2.0}, opts.tol);
      for (const auto& s : imag.samples) modulus.add(std::abs(std::abs(s.h) / std::abs(h0) - 1.0), s.z);
    } catch (const CriticalPointAbort&) {
      // Seeds on a critical point of h have no Newton flow; skip them.
    }
  }
  report.checks.push_back(phase.finish());
  report.checks.push_back(decay.finish());
  report.checks.push_back(modulus.finish());

  if (const auto rho = center_root(h)) {
    Worst period(suite, "small_orbit_period", "|t_detected - |2 pi i / h'(rho)|| / period", 1e-4);
    const Complex analytic = orbit_period_analytic(h, *rho);
    for (double r : {1e-1, 1e-2, 1e-3}) {
      const Complex z0 = *rho + r;
      if (const auto orbit = find_closed_orbit(h, z0, opts.tol, 10.0 * std::abs(analytic))) {
        period.add(std::abs(orbit->period - std::abs(analytic)) / std::abs(analytic), z0);
      } else {
        period.fail(z0);
      }
    }
    report.checks.push_back(period.finish());
  }

  {
    const HoloFunction c = HoloFunction::cosh_shift();
    Worst sep(suite, "cosh_separatrix_lines", "seeds on Im z = k pi not classified both ways", 0.0);
    for (int k = -1; k <= 1; ++k) {
      const Complex z0(0.5, k * kPi);
      const auto rep = classify_separatrix(c, z0);
      sep.add(rep.positive && rep.negative ? 0.0 : 1.0, z0);
    }
    report.checks.push_back(sep.finish());
    Worst strip(suite, "cosh_strip_orbits", "strip seeds classified as separatrix", 0.0);
    for (int k = -1; k <= 0; ++k) {
      const Complex z0(0.5, k * kPi + kPi / 4.0);
      const auto rep = classify_separatrix(c, z0);
      strip.add(!rep.positive && !rep.negative && rep.period ? 0.0 : 1.0, z0);
    }
    report.checks.push_back(strip.finish());
    Worst lin(suite, "linear_not_separatrix", "linear flow from z0 = 1 classified as separatrix", 0.0);
    const auto rep = classify_separatrix(HoloFunction::linear(1.0), Complex(1.0));
    lin.add(!rep.positive && !rep.negative ? 0.0 : 1.0, Complex(1.0));
    report.checks.push_back(lin.finish());
  }

  if (!opts.gammas.empty()) {
    Worst cond(suite, "complex_period_condition", "max |P_m(z0; 2 pi i k, z0)|", 1e-13);
    const Complex z0 = sample.point();
    try {
      const PmPolynomial P(opts.gammas, z0);
      for (int k = -2; k <= 2; ++k) {
        cond.add(std::abs(P.at_time(Complex(0.0, 2.0 * kPi * k)).evaluate(z0)), z0);
      }
    } catch (const DegenerateAnchor&) {
      cond.fail(z0);
    }
    report.checks.push_back(cond.finish());
  }
}

VerifyReport run_suite(Suite suite, const HoloFunction& h, const SuiteOptions& opts) {
  VerifyReport report;
  if (suite == Suite::Geometry || suite == Suite::All) run_geometry_checks(h, opts, report);
  if (suite == Suite::Hamiltonian || suite == Suite::All) run_hamiltonian_checks(h, opts, report);
  if (suite == Suite::Flows || suite == Suite::All) run_flow_checks(h, opts, report);
  return report;
}

}  // namespace holoflow
