#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <holoflow/errors.hpp>
#include <holoflow/export.hpp>
#include <holoflow/flow_engine.hpp>
#include <holoflow/hamiltonian.hpp>
#include <holoflow/xi_surface.hpp>

#include "orbit_study.hpp"
#include "parallel.hpp"
#include "svg.hpp"

namespace holoflow::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void write_json(const fs::path& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

std::string index_name(const std::string& stem, std::size_t i, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%04zu%s", stem.c_str(), i, ext);
  return buf;
}

std::string opt_double(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

json function_json(const RunConfig& c, const BuiltFunction& f) {
  json j = {{"kind", c.function.kind}, {"describe", f.h.describe()}};
  if (c.function.kind == "xi-approx") j["m"] = c.function.m;
  if (f.alpha) j["alpha"] = *f.alpha;
  return j;
}

ZeroTable maybe_zeros(const RunConfig& c) {
  return c.function.kind == "xi-approx" ? load_zeros(c) : ZeroTable{};
}

Complex window_center(const Window& w) {
  return {0.5 * (w.re_min + w.re_max), 0.5 * (w.im_min + w.im_max)};
}

// ---- portrait ----

struct SeedRun {
  Complex z0;
  Trajectory trajectory;
  std::string error;
};

struct SeedClass {
  Complex z0;
  std::optional<SeparatrixReport> report;
  std::string error;
};

Trajectory run_seed(const HoloFunction& h, const RunConfig& c, Complex z0, double radius) {
  const TimeRay ray{c.theta, c.span};
  if (c.flow == "newton") {
    try {
      return integrate_newton(h, z0, ray, c.tol, 1e-8, radius);
    } catch (const CriticalPointAbort& e) {
      Trajectory t;
      t.samples.push_back({0.0, 0.0, z0, h.value(z0)});
      t.status = TrajectoryStatus::CriticalPointAbort;
      t.abort_at = z0;
      t.abort_derivative = e.derivative_modulus();
      return t;
    }
  }
  if (c.flow == "desingularized") return integrate_desingularized(h, z0, ray, c.tol, radius);
  return integrate_ray(h, z0, ray, c.tol, radius);
}

// Closed orbits around roots with small |h'| take 2 pi / |h'| to close, far
// beyond the default horizon for xi-approximations.
double classification_horizon(const HoloFunction& h, const Window& w) {
  double horizon = 1e3;
  for (const Complex rho : h.known_roots()) {
    if (rho.real() < w.re_min || rho.real() > w.re_max || rho.imag() < w.im_min || rho.imag() > w.im_max) {
      continue;
    }
    const double d = std::abs(h.derivative(rho));
    if (d > 0.0) horizon = std::max(horizon, 8.0 * 2.0 * kPi / d);
  }
  return std::min(horizon, 1e12);
}

// ---- readback ----

std::vector<std::vector<std::string>> read_csv(const fs::path& path, std::string& header) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::getline(in, header);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

double to_d(const std::string& s) { return std::stod(s); }

CheckRecord readback_record(std::string name, std::string quantity, double value, double tol,
                            std::optional<Complex> point = std::nullopt) {
  return {"readback", std::move(name), point, std::move(quantity), value, tol,
          std::isfinite(value) && value <= tol};
}

void readback_surface(const fs::path& file, VerifyReport& report) {
  std::ifstream in(file);
  json j;
  in >> j;
  const SurfaceGrid grid = surface_from_json(j);
  report.checks.push_back(readback_record(file.filename().string() + ":constant_phase",
                                          "max |P_m(z; T)| / |exp(-T)|",
                                          verify_constant_phase(grid), 1e-8));
}

void readback_bundle(const HoloFunction& h, const fs::path& file, VerifyReport& report) {
  std::string header;
  const auto rows = read_csv(file, header);
  double H_drift = 0.0, pdz_drift = 0.0;
  std::optional<Complex> worst;
  Complex H0, c0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() < 11) throw IoError(file.string() + ": short row");
    const Complex z(to_d(r[1]), to_d(r[2])), p(to_d(r[3]), to_d(r[4])), dz(to_d(r[5]), to_d(r[6]));
    const Complex H = h.value(z) * p;
    if (i == 0) {
      H0 = H;
      c0 = p * dz;
      continue;
    }
    const double dH = std::abs(H - H0) / std::abs(H0);
    if (dH > H_drift) worst = z;
    H_drift = std::max(H_drift, dH);
    pdz_drift = std::max(pdz_drift, std::abs(p * dz - c0) / std::abs(c0));
  }
  const std::string stem = file.filename().string();
  report.checks.push_back(readback_record(stem + ":energy_drift", "max |H - H0| / |H0|", H_drift, 1e-8, worst));
  report.checks.push_back(
      readback_record(stem + ":p_dz_drift", "max |p dz - p0 dz0| / |p0 dz0|", pdz_drift, 1e-8));
}

void readback_trajectory(const HoloFunction& h, const fs::path& file, const json& meta,
                         VerifyReport& report) {
  std::string header;
  const auto rows = read_csv(file, header);
  if (rows.empty()) return;
  const std::string flow = meta["config"]["portrait"]["flow"].get<std::string>();
  const double theta = meta["config"]["portrait"]["theta"].get<double>();
  double h_consistency = 0.0, phase = 0.0, modulus = 0.0;
  Complex h0;
  double s0 = 0.0;
  PhaseUnwrapper unwrap;
  double arg0 = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() < 8) throw IoError(file.string() + ": short row");
    const double s = to_d(r[0]);
    const Complex z(to_d(r[3]), to_d(r[4])), hc(to_d(r[5]), to_d(r[6]));
    h_consistency = std::max(h_consistency, std::abs(h.value(z) - hc) / (1.0 + std::abs(hc)));
    if (flow != "newton" || theta != 0.0) continue;
    if (std::abs(hc) == 0.0) break;
    const double a = unwrap.push(hc);
    if (i == 0) {
      h0 = hc;
      s0 = s;
      arg0 = a;
      continue;
    }
    phase = std::max(phase, std::abs(a - arg0));
    modulus = std::max(modulus, std::abs(std::abs(hc) - std::abs(h0) * std::exp(-(s - s0))) / std::abs(h0));
  }
  const std::string stem = file.filename().string();
  report.checks.push_back(readback_record(stem + ":h_column", "max |h(z) - h_csv| / (1 + |h_csv|)",
                                          h_consistency, 1e-12));
  if (flow == "newton" && theta == 0.0) {
    report.checks.push_back(readback_record(stem + ":newton_phase", "max |arg h - arg h0|", phase, 1e-8));
    report.checks.push_back(readback_record(stem + ":newton_modulus",
                                            "max ||h| - |h0| e^-s| / |h0|", modulus, 1e-8));
  }
}

std::vector<fs::path> sorted_files(const fs::path& dir, const std::string& prefix, const std::string& ext) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (e.is_regular_file() && name.rfind(prefix, 0) == 0 && e.path().extension() == ext) {
      out.push_back(e.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

bool is_config_error(const std::exception& e) {
  return dynamic_cast<const InvalidArgument*>(&e) || dynamic_cast<const IoError*>(&e) ||
         dynamic_cast<const ParseError*>(&e) || dynamic_cast<const MonotonicityError*>(&e) ||
         dynamic_cast<const InsufficientZeros*>(&e) || dynamic_cast<const DegenerateAnchor*>(&e);
}

int cmd_portrait(const RunConfig& c, std::ostream& log) {
  const ZeroTable zeros = maybe_zeros(c);
  const BuiltFunction f = build_function(c, &zeros);
  const HoloFunction& h = f.h;
  const unsigned workers = worker_count();
  const Window& w = c.window;
  const double radius =
      2.0 * std::max({std::abs(Complex(w.re_min, w.im_min)), std::abs(Complex(w.re_min, w.im_max)),
                      std::abs(Complex(w.re_max, w.im_min)), std::abs(Complex(w.re_max, w.im_max))}) +
      10.0;

  std::vector<Complex> seeds;
  for (std::size_t j = 0; j < c.density; ++j) {
    for (std::size_t i = 0; i < c.density; ++i) {
      const double x = w.re_min + (w.re_max - w.re_min) * i / (c.density - 1);
      const double y = w.im_min + (w.im_max - w.im_min) * j / (c.density - 1);
      seeds.emplace_back(x, y);
    }
  }

  std::vector<SeedRun> runs(seeds.size());
  parallel_for(seeds.size(), workers, [&](std::size_t i) {
    runs[i].z0 = seeds[i];
    try {
      runs[i].trajectory = run_seed(h, c, seeds[i], radius);
    } catch (const Error& e) {
      runs[i].error = e.what();
    }
  });

  // Separatrix overlay: the seed lattice plus, for cosh, the lines Im z = k pi.
  std::vector<Complex> class_seeds = seeds;
  if (c.function.kind == "cosh") {
    for (long k = static_cast<long>(std::ceil(w.im_min / kPi)); k * kPi <= w.im_max; ++k) {
      class_seeds.emplace_back(0.5, k * kPi);
    }
  }
  const double horizon = classification_horizon(h, w);
  std::vector<SeedClass> classes(class_seeds.size());
  parallel_for(class_seeds.size(), workers, [&](std::size_t i) {
    classes[i].z0 = class_seeds[i];
    try {
      classes[i].report = classify_separatrix(h, class_seeds[i], 0.0, horizon, c.tol);
    } catch (const Inconclusive& e) {
      classes[i].error = "inconclusive";
    } catch (const Error& e) {
      classes[i].error = e.what();
    }
  });

  const fs::path dir = c.output;
  fs::create_directories(dir / "trajectories");
  bool aborted = false;
  std::map<std::string, std::size_t> status_counts;
  {
    auto idx = open_out(dir / "seeds.csv");
    idx << "index,z0_re,z0_im,status,samples,s_end,file\n";
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const auto& r = runs[i];
      if (!r.error.empty()) {
        aborted = true;
        ++status_counts["error"];
        idx << i << ',' << format_double(r.z0.real()) << ',' << format_double(r.z0.imag())
            << ",error,0,,\n";
        log << "seed " << i << ": " << r.error << '\n';
        continue;
      }
      const std::string name = index_name("seed", i, ".csv");
      auto out = open_out(dir / "trajectories" / name);
      write_trajectory_csv(out, r.trajectory);
      ++status_counts[to_string(r.trajectory.status)];
      idx << i << ',' << format_double(r.z0.real()) << ',' << format_double(r.z0.imag()) << ','
          << to_string(r.trajectory.status) << ',' << r.trajectory.samples.size() << ','
          << format_double(r.trajectory.back().s) << ",trajectories/" << name << '\n';
    }
  }

  std::size_t n_separatrix = 0;
  {
    auto out = open_out(dir / "separatrix.csv");
    out << "z0_re,z0_im,positive,negative,forward,backward,t_escape_pos,t_escape_neg,period,note\n";
    for (const auto& s : classes) {
      out << format_double(s.z0.real()) << ',' << format_double(s.z0.imag()) << ',';
      if (s.report) {
        const auto& r = *s.report;
        n_separatrix += (r.positive || r.negative) ? 1 : 0;
        out << (r.positive ? 1 : 0) << ',' << (r.negative ? 1 : 0) << ',' << to_string(r.forward) << ','
            << to_string(r.backward) << ',' << opt_double(r.t_escape_pos) << ','
            << opt_double(r.t_escape_neg) << ',' << opt_double(r.period) << ",\n";
      } else {
        std::string note = s.error;
        std::replace(note.begin(), note.end(), ',', ';');
        out << ",,,,,,," << note << '\n';
      }
    }
  }

  {
    std::vector<Polyline> lines;
    for (const auto& r : runs) {
      if (!r.error.empty()) continue;
      Polyline p;
      for (const auto& s : r.trajectory.samples) p.points.push_back(s.z);
      lines.push_back(std::move(p));
    }
    std::vector<Marker> markers;
    for (const auto& s : classes) {
      if (!s.report) continue;
      const bool sep = s.report->positive || s.report->negative;
      markers.push_back({s.z0, sep ? "#c0392b" : "#7f8c8d"});
    }
    auto out = open_out(dir / "portrait.svg");
    write_svg(out, w, lines, markers, h.describe() + " " + c.flow + " flow");
  }

  json counts = json::object();
  for (const auto& [k, v] : status_counts) counts[k] = v;
  write_json(dir / "metadata.json", {{"command", "portrait"},
                                     {"function", function_json(c, f)},
                                     {"escape_radius", radius},
                                     {"classification_horizon", horizon},
                                     {"seeds", seeds.size()},
                                     {"status_counts", counts},
                                     {"separatrix_seeds", class_seeds.size()},
                                     {"separatrix_flagged", n_separatrix},
                                     {"config", to_json(c)}});
  log << "portrait: " << seeds.size() << " seeds, " << n_separatrix << " separatrix seeds -> "
      << dir.string() << '\n';
  return aborted ? kExitNumericalAbort : kExitOk;
}

int cmd_surface(const RunConfig& c, std::ostream& log) {
  if (c.function.kind != "xi-approx") throw InvalidArgument("surface needs function kind xi-approx");
  const ZeroTable zeros = load_zeros(c);
  if (c.function.m > zeros.size()) throw InsufficientZeros(c.function.m, zeros.size());
  const Complex z0 = c.z0.value_or(window_center(c.window));
  const TimeLattice lattice =
      TimeLattice::linspace(c.tau1.min, c.tau1.max, c.tau1.count, c.tau2.min, c.tau2.max, c.tau2.count);
  ContinuationOptions opts;
  opts.max_jump = c.max_jump;
  opts.threads = worker_count();

  SurfaceGrid grid;
  std::optional<std::size_t> break_node;
  std::string break_reason;
  try {
    grid = trace_surface(zeros, c.function.m, z0, lattice, opts);
  } catch (const ContinuationBreak& e) {
    grid = e.partial();
    break_node = e.node();
    break_reason = e.what();
  }

  const fs::path dir = c.output;
  fs::create_directories(dir);
  write_json(dir / "surface.json", surface_to_json(grid));
  {
    auto out = open_out(dir / "branch_events.csv");
    out << "T_re,T_im,z_re,z_im,min_dp,sheet\n";
    for (const auto& b : grid.branch_events) {
      out << format_double(b.T.real()) << ',' << format_double(b.T.imag()) << ','
          << format_double(b.z.real()) << ',' << format_double(b.z.imag()) << ','
          << format_double(b.min_dp) << ',' << b.sheet << '\n';
    }
  }
  const double residual = verify_constant_phase(grid);
  json summary = {{"command", "surface"},
                  {"m", grid.m},
                  {"z0", complex_to_json(z0)},
                  {"sheets", grid.sheet_count()},
                  {"nodes", lattice.size()},
                  {"complete", grid.complete},
                  {"branch_events", grid.branch_events.size()},
                  {"constant_phase_residual", residual},
                  {"config", to_json(c)}};
  if (break_node) {
    summary["break_node"] = *break_node;
    summary["break_reason"] = break_reason;
  }
  write_json(dir / "summary.json", summary);
  log << "surface: " << grid.sheet_count() << " sheets over " << lattice.size()
      << " nodes, constant-phase residual " << format_double(residual) << '\n';
  if (break_node) {
    log << break_reason << '\n';
    return kExitNumericalAbort;
  }
  return kExitOk;
}

int cmd_orbit_study(const RunConfig& c, std::ostream& log) {
  const ZeroTable zeros = maybe_zeros(c);
  const BuiltFunction f = build_function(c, &zeros);
  const HoloFunction& h = f.h;
  Complex z0;
  if (c.z0) {
    z0 = *c.z0;
  } else if (const auto rho = center_root(h)) {
    z0 = *rho + 0.5;
  } else {
    throw InvalidArgument("orbit-study needs z0 for this function");
  }
  std::vector<Complex> dz0 = c.dz0;
  if (dz0.empty()) dz0 = {h.value(z0), kI * h.value(z0)};
  // Scaled like the coupling term of Delta p so its angle gap visibly moves.
  std::vector<Complex> dp0 = c.dp0;
  if (dp0.empty()) {
    Complex scale = c.p0.front() * dz0.front() * h.derivative(z0);
    if (!(std::abs(scale) > 0.0)) scale = 1.0;
    dp0 = {scale, kI * scale};
  }

  const OrbitDesign design = star_design(c.p0, dz0, dp0);
  OrbitStudyOptions opts;
  opts.tol = c.tol;
  opts.samples = c.orbit_samples;
  opts.threads = worker_count();
  const OrbitStudy study = study_orbit(h, z0, design, opts);

  const fs::path dir = c.output;
  fs::create_directories(dir);
  for (std::size_t i = 0; i < study.runs.size(); ++i) {
    const RunSeries& r = study.runs[i];
    {
      auto out = open_out(dir / index_name("run", i, ".csv"));
      write_bundle_csv(out, h, r.trajectory);
    }
    auto dirs = open_out(dir / index_name("directions", i, ".csv"));
    auto phases = open_out(dir / index_name("phases", i, ".csv"));
    dirs << "s,z_re,z_im,dz_dir_re,dz_dir_im,p_dir_re,p_dir_im,dp_dir_re,dp_dir_im\n";
    phases << "s,arg_h,arg_dz,arg_p,arg_dp\n";
    auto unit = [](Complex v) { return std::abs(v) > 0.0 ? v / std::abs(v) : Complex(0.0); };
    for (std::size_t k = 0; k < r.at.size(); ++k) {
      const auto& s = r.trajectory.samples[r.at[k]];
      const Complex a = unit(s.state.dz), b = unit(s.state.p), d = unit(s.state.dp);
      dirs << format_double(s.s) << ',' << format_double(s.state.z.real()) << ','
           << format_double(s.state.z.imag()) << ',' << format_double(a.real()) << ','
           << format_double(a.imag()) << ',' << format_double(b.real()) << ','
           << format_double(b.imag()) << ',' << format_double(d.real()) << ','
           << format_double(d.imag()) << '\n';
      phases << format_double(s.s) << ',' << format_double(r.arg_h[k]) << ','
             << format_double(r.arg_dz[k]) << ',' << format_double(r.arg_p[k]) << ','
             << format_double(r.arg_dp[k]) << '\n';
    }
  }
  json summary = study.summary();
  summary["command"] = "orbit-study";
  summary["function"] = function_json(c, f);
  summary["config"] = to_json(c);
  write_json(dir / "summary.json", summary);
  log << "orbit-study: period " << format_double(study.period) << ", " << study.runs.size()
      << " runs -> " << dir.string() << '\n';
  return kExitOk;
}

int cmd_verify(const RunConfig& c, std::ostream& log) {
  // The table is read first so a corrupted file fails before any suite runs.
  const ZeroTable zeros = load_zeros(c);
  const BuiltFunction f = build_function(c, &zeros);
  const Suite suite = parse_suite(c.suite);

  SuiteOptions opts;
  opts.seed = c.seed;
  opts.samples = c.samples;
  opts.tol = c.tol;
  opts.window = c.window;
  const std::size_t m = std::min(c.function.m, zeros.size());
  opts.gammas.assign(zeros.gammas.begin(), zeros.gammas.begin() + static_cast<std::ptrdiff_t>(m));

  VerifyReport report = run_suite(suite, f.h, opts);

  if (!c.readback.empty()) {
    const fs::path rb = c.readback;
    if (!fs::is_directory(rb)) throw InvalidArgument("readback directory " + rb.string() + " not found");
    if (fs::exists(rb / "surface.json")) readback_surface(rb / "surface.json", report);
    for (const auto& file : sorted_files(rb, "run_", ".csv")) readback_bundle(f.h, file, report);
    if (fs::exists(rb / "metadata.json")) {
      std::ifstream in(rb / "metadata.json");
      json meta;
      in >> meta;
      for (const auto& file : sorted_files(rb / "trajectories", "seed_", ".csv")) {
        readback_trajectory(f.h, file, meta, report);
      }
    }
  }

  fs::create_directories(c.output);
  json j = report.to_json();
  j["command"] = "verify";
  j["suite"] = to_string(suite);
  j["function"] = function_json(c, f);
  j["seed"] = c.seed;
  write_json(fs::path(c.output) / "verify_report.json", j);
  for (const auto& r : report.checks) {
    if (!r.pass) {
      log << "FAIL " << r.suite << '/' << r.name << ": " << r.quantity << " = "
          << format_double(r.value) << " > " << format_double(r.tolerance) << '\n';
    }
  }
  log << "verify: " << report.checks.size() - report.failures() << '/' << report.checks.size()
      << " checks passed\n";
  return report.passed() ? kExitOk : kExitVerifyFailed;
}

}  // namespace holoflow::cli
