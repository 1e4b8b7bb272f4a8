#include <cstdlib>
#include <ostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include <holoflow/errors.hpp>

#include "commands.hpp"
#include "parallel.hpp"

namespace holoflow::cli {

unsigned worker_count() {
  const char* env = std::getenv("HOLOFLOW_THREADS");
  if (env == nullptr || *env == '\0') return std::max(1u, std::thread::hardware_concurrency());
  const std::string text(env);
  std::size_t used = 0;
  long value = 0;
  try {
    value = std::stol(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || value < 1 || value > 4096) {
    throw InvalidArgument("HOLOFLOW_THREADS must be a positive integer, got '" + text + "'");
  }
  return static_cast<unsigned>(value);
}

namespace {

// Flag values; only those given on the command line override the config.
struct Flags {
  std::string config;
  std::string kind, zeros, out, flow, z0, tau1, tau2, suite, readback;
  std::size_t m = 0, density = 0, samples = 0;
  double alpha = 0, re_min = 0, re_max = 0, im_min = 0, im_max = 0;
  double rtol = 0, atol = 0, span = 0, theta = 0, max_jump = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> p0, dz0, dp0;
};

void add_flags(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON run configuration")->check(CLI::ExistingFile);
  sub->add_option("--kind", f.kind, "cosh | xi-approx | polynomial | linear");
  sub->add_option("--m", f.m, "number of conjugate zero pairs");
  sub->add_option("--alpha", f.alpha, "xi-approx scale");
  sub->add_option("--zeros", f.zeros, "zero table path");
  sub->add_option("--re-min", f.re_min);
  sub->add_option("--re-max", f.re_max);
  sub->add_option("--im-min", f.im_min);
  sub->add_option("--im-max", f.im_max);
  sub->add_option("--density", f.density, "seeds per window axis");
  sub->add_option("--rtol", f.rtol);
  sub->add_option("--atol", f.atol);
  sub->add_option("--out", f.out, "output directory");
  sub->add_option("--seed", f.seed);
}

void apply_flags(const CLI::App* sub, const Flags& f, RunConfig& c) {
  auto given = [&](const char* name) {
    const CLI::Option* opt = sub->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  if (given("--kind")) c.function.kind = f.kind;
  if (given("--m")) c.function.m = f.m;
  if (given("--alpha")) c.function.alpha = f.alpha;
  if (given("--zeros")) c.function.zeros = f.zeros;
  if (given("--re-min")) c.window.re_min = f.re_min;
  if (given("--re-max")) c.window.re_max = f.re_max;
  if (given("--im-min")) c.window.im_min = f.im_min;
  if (given("--im-max")) c.window.im_max = f.im_max;
  if (given("--density")) c.density = f.density;
  if (given("--rtol")) c.tol.rel = f.rtol;
  if (given("--atol")) c.tol.abs = f.atol;
  if (given("--out")) c.output = f.out;
  if (given("--seed")) c.seed = f.seed;
  if (given("--flow")) c.flow = f.flow;
  if (given("--span")) c.span = f.span;
  if (given("--theta")) c.theta = f.theta;
  if (given("--z0")) c.z0 = parse_complex(f.z0);
  if (given("--tau1")) c.tau1 = parse_axis(f.tau1);
  if (given("--tau2")) c.tau2 = parse_axis(f.tau2);
  if (given("--max-jump")) c.max_jump = f.max_jump;
  auto list = [](const std::vector<std::string>& v) {
    std::vector<Complex> out;
    for (const auto& s : v) out.push_back(parse_complex(s));
    return out;
  };
  if (given("--p0")) c.p0 = list(f.p0);
  if (given("--dz0")) c.dz0 = list(f.dz0);
  if (given("--dp0")) c.dp0 = list(f.dp0);
  if (given("--samples")) {
    if (sub->get_name() == "orbit-study") {
      c.orbit_samples = f.samples;
    } else {
      c.samples = f.samples;
    }
  }
  if (given("--suite")) c.suite = f.suite;
  if (given("--readback")) c.readback = f.readback;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Complex-time holomorphic and Newton flows, xi-approximating polynomials"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "holoflow 0.1.0");
  Flags f;

  auto* portrait = app.add_subcommand("portrait", "trajectory CSVs, separatrix overlay and SVG over a seed lattice");
  add_flags(portrait, f);
  portrait->add_option("--flow", f.flow, "holomorphic | newton | desingularized");
  portrait->add_option("--span", f.span, "ray length");
  portrait->add_option("--theta", f.theta, "ray angle in the time plane");

  auto* surface = app.add_subcommand("surface", "roots of P_m over a complex-time lattice");
  add_flags(surface, f);
  surface->add_option("--z0", f.z0, "anchor 're,im'");
  surface->add_option("--tau1", f.tau1, "real-time axis 'min,max,count'");
  surface->add_option("--tau2", f.tau2, "imaginary-time axis 'min,max,count'");
  surface->add_option("--max-jump", f.max_jump, "largest accepted continuation step");

  auto* orbit = app.add_subcommand("orbit-study", "momenta and sensitivities over one closed orbit");
  add_flags(orbit, f);
  orbit->add_option("--z0", f.z0, "point on the orbit 're,im'");
  orbit->add_option("--p0", f.p0, "initial momenta 're,im' ...");
  orbit->add_option("--dz0", f.dz0, "initial position sensitivities");
  orbit->add_option("--dp0", f.dp0, "initial momentum sensitivities");
  orbit->add_option("--samples", f.samples, "common sample points per period");

  auto* verify = app.add_subcommand("verify", "run invariant suites and write a JSON report");
  add_flags(verify, f);
  verify->add_option("--suite", f.suite, "geometry | hamiltonian | flows | all");
  verify->add_option("--samples", f.samples, "random samples per check");
  verify->add_option("--readback", f.readback, "output directory of an earlier run to re-check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    RunConfig config = f.config.empty() ? RunConfig{} : load_config(f.config);
    apply_flags(sub, f, config);
    validate(config);
    worker_count();
    const std::string name = sub->get_name();
    if (name == "portrait") return cmd_portrait(config, err);
    if (name == "surface") return cmd_surface(config, err);
    if (name == "orbit-study") return cmd_orbit_study(config, err);
    return cmd_verify(config, err);
  } catch (const std::exception& e) {
    err << "holoflow " << sub->get_name() << ": " << e.what() << '\n';
    if (is_config_error(e)) return kExitConfigError;
    if (dynamic_cast<const Error*>(&e)) return kExitNumericalAbort;
    throw;
  }
}

}  // namespace holoflow::cli
