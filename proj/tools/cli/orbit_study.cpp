#include "orbit_study.hpp"

#include <algorithm>
#include <cmath>

#include <holoflow/export.hpp>

#include "parallel.hpp"

namespace holoflow::cli {

namespace {

double spread(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi - *lo;
}

double max_offset(const std::vector<double>& v) {
  double worst = 0.0;
  for (double x : v) worst = std::max(worst, std::abs(x - v.front()));
  return worst;
}

RunSeries integrate_run(const HoloFunction& h, Complex z0, double period, const OrbitRun& run,
                        std::span<const double> points, const OrbitStudyOptions& opts) {
  RunSeries r;
  r.run = run;
  const auto b0 = SensitivityBundle::initial(z0, run.p0, run.dz0, run.dp0);
  r.trajectory = integrate_hamiltonian(h, b0, TimeRay{0.0, period}, opts.tol,
                                       {0.0, period / static_cast<double>(opts.samples)}, points);

  PhaseUnwrapper udz, up, udp, uh;
  std::size_t next = 0;
  const Complex H0 = b0.energy(h), c0 = run.p0 * run.dz0;
  for (std::size_t i = 0; i < r.trajectory.samples.size(); ++i) {
    const auto& s = r.trajectory.samples[i];
    const double adz = udz.push(s.state.dz), ap = up.push(s.state.p), adp = udp.push(s.state.dp);
    const double ah = uh.push(h.value(s.state.z));
    if (next < points.size() && s.s == points[next]) {
      r.at.push_back(i);
      r.arg_dz.push_back(adz);
      r.arg_p.push_back(ap);
      r.arg_dp.push_back(adp);
      r.arg_h.push_back(ah);
      ++next;
    }
    r.energy_drift = std::max(r.energy_drift, std::abs(s.state.energy(h) - H0) / std::abs(H0));
    r.p_dz_drift = std::max(r.p_dz_drift, std::abs(s.state.p * s.state.dz - c0) / std::abs(c0));
    r.closed_form_residual = std::max(r.closed_form_residual, closed_form_residuals(h, s.state).max());
  }
  if (r.at.empty()) return r;
  r.winding_dz = r.arg_dz.back() - r.arg_dz.front();
  r.winding_p = r.arg_p.back() - r.arg_p.front();
  r.winding_dp = r.arg_dp.back() - r.arg_dp.front();
  std::vector<double> sum(r.at.size()), rel(r.at.size());
  for (std::size_t k = 0; k < r.at.size(); ++k) {
    sum[k] = r.arg_dz[k] + r.arg_p[k];
    rel[k] = r.arg_dz[k] - r.arg_h[k];
  }
  r.counter_rotation_drift = max_offset(sum);
  r.flow_angle_drift = max_offset(rel);
  return r;
}

GapSeries gap(const OrbitStudy& study, const std::string& quantity, std::size_t a, std::size_t b) {
  auto pick = [&](const RunSeries& r) -> const std::vector<double>& {
    if (quantity == "dz") return r.arg_dz;
    if (quantity == "p") return r.arg_p;
    return r.arg_dp;
  };
  const auto& x = pick(study.runs[a]);
  const auto& y = pick(study.runs[b]);
  std::vector<double> d(std::min(x.size(), y.size()));
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = x[k] - y[k];
  return {quantity, a, b, spread(d)};
}

nlohmann::json run_json(const RunSeries& r) {
  return {{"p0", complex_to_json(r.run.p0)},
          {"dz0", complex_to_json(r.run.dz0)},
          {"dp0", complex_to_json(r.run.dp0)},
          {"status", to_string(r.trajectory.status)},
          {"winding_dz", r.winding_dz},
          {"winding_p", r.winding_p},
          {"winding_dp", r.winding_dp},
          {"counter_rotation_drift", r.counter_rotation_drift},
          {"flow_angle_drift", r.flow_angle_drift},
          {"energy_drift", r.energy_drift},
          {"p_dz_drift", r.p_dz_drift},
          {"closed_form_residual", r.closed_form_residual}};
}

}  // namespace

OrbitDesign star_design(std::span<const Complex> p0, std::span<const Complex> dz0,
                        std::span<const Complex> dp0) {
  OrbitDesign d;
  if (p0.empty() || dz0.empty() || dp0.empty()) return d;
  d.runs.push_back({p0[0], dz0[0], dp0[0]});
  d.dz_group.push_back(0);
  d.p_group.push_back(0);
  d.dp_group.push_back(0);
  for (std::size_t i = 1; i < dz0.size(); ++i) {
    d.dz_group.push_back(d.runs.size());
    d.runs.push_back({p0[0], dz0[i], dp0[0]});
  }
  for (std::size_t i = 1; i < p0.size(); ++i) {
    d.p_group.push_back(d.runs.size());
    d.runs.push_back({p0[i], dz0[0], dp0[0]});
  }
  for (std::size_t i = 1; i < dp0.size(); ++i) {
    d.dp_group.push_back(d.runs.size());
    d.runs.push_back({p0[0], dz0[0], dp0[i]});
  }
  return d;
}

OrbitStudy study_orbit(const HoloFunction& h, Complex z0, const OrbitDesign& design,
                       const OrbitStudyOptions& opts) {
  const ClosedOrbit orbit = detect_closed_orbit(h, z0, opts.tol);
  OrbitStudy study;
  study.z0 = z0;
  study.period = orbit.period;
  study.closure_gap = orbit.gap;
  for (std::size_t k = 0; k <= opts.samples; ++k) {
    study.sample_s.push_back(orbit.period * static_cast<double>(k) / static_cast<double>(opts.samples));
  }
  study.sample_s.back() = orbit.period;

  study.runs.resize(design.runs.size());
  parallel_for(design.runs.size(), opts.threads, [&](std::size_t i) {
    study.runs[i] = integrate_run(h, z0, orbit.period, design.runs[i], study.sample_s, opts);
  });

  auto add_group = [&](const std::vector<std::size_t>& group, const std::string& q) {
    for (std::size_t i = 1; i < group.size(); ++i) study.gaps.push_back(gap(study, q, group[0], group[i]));
  };
  add_group(design.dz_group, "dz");
  add_group(design.p_group, "p");
  add_group(design.dp_group, "dp");
  return study;
}

nlohmann::json OrbitStudy::summary() const {
  nlohmann::json runs_json = nlohmann::json::array();
  bool counter_rotation = true, flow_angle = true, winding = true;
  for (const auto& r : runs) {
    runs_json.push_back(run_json(r));
    counter_rotation = counter_rotation && r.counter_rotation_drift <= kAngleConstancy;
    flow_angle = flow_angle && r.flow_angle_drift <= kAngleConstancy;
    winding = winding && std::abs(std::abs(r.winding_dz) - 2.0 * kPi) <= kWindingTolerance &&
              std::abs(r.winding_p + r.winding_dz) <= kWindingTolerance;
  }
  nlohmann::json gaps_json = nlohmann::json::array();
  bool dz_const = true, p_const = true, dp_varies = false;
  for (const auto& g : gaps) {
    gaps_json.push_back({{"quantity", g.quantity}, {"runs", {g.a, g.b}}, {"variation", g.variation}});
    if (g.quantity == "dz") dz_const = dz_const && g.variation <= kAngleConstancy;
    if (g.quantity == "p") p_const = p_const && g.variation <= kAngleConstancy;
    if (g.quantity == "dp") dp_varies = dp_varies || g.variation > kGapVariationThreshold;
  }
  return {{"z0", complex_to_json(z0)},
          {"period", period},
          {"closure_gap", closure_gap},
          {"samples", sample_s.size()},
          {"runs", runs_json},
          {"gaps", gaps_json},
          {"flags",
           {{"winding_dz_2pi_p_minus", winding},
            {"counter_rotation", counter_rotation},
            {"flow_angle_invariant", flow_angle},
            {"dz_gap_constant", dz_const},
            {"p_gap_constant", p_const},
            {"dp_gap_varies", dp_varies}}}};
}

}  // namespace holoflow::cli
