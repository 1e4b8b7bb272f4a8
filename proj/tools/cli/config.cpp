#include "config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <holoflow/errors.hpp>
#include <holoflow/export.hpp>

#ifndef HOLOFLOW_DATA_DIR
#define HOLOFLOW_DATA_DIR "data"
#endif
#ifndef HOLOFLOW_INSTALL_DATA_DIR
#define HOLOFLOW_INSTALL_DATA_DIR HOLOFLOW_DATA_DIR
#endif
#ifndef HOLOFLOW_INSTALL_DATA_REL
#define HOLOFLOW_INSTALL_DATA_REL "share/holoflow"
#endif

namespace holoflow::cli {

namespace {

using nlohmann::json;

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw InvalidArgument(where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw InvalidArgument("unknown key '" + key + "' in " + where);
  }
}

std::vector<Complex> complex_list(const json& j) {
  std::vector<Complex> out;
  for (const auto& v : j) out.push_back(complex_from_json(v));
  return out;
}

json complex_list_json(const std::vector<Complex>& v) {
  json out = json::array();
  for (const Complex& z : v) out.push_back(complex_to_json(z));
  return out;
}

AxisSpec axis_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw InvalidArgument("lattice axis must be [min, max, count]");
  const double count = j[2].get<double>();
  if (!(count >= 1.0) || count != std::floor(count)) {
    throw InvalidArgument("lattice axis count must be a positive integer");
  }
  return {j[0].get<double>(), j[1].get<double>(), static_cast<std::size_t>(count)};
}

}  // namespace

void apply_json(RunConfig& c, const json& doc) {
  try {
    check_keys(doc, {"function", "window", "tolerance", "output", "seed", "portrait", "surface",
                     "orbit_study", "verify"},
               "config");
    if (doc.contains("function")) {
      const auto& f = doc["function"];
      check_keys(f, {"kind", "m", "alpha", "zeros", "a", "coefficients"}, "function");
      if (f.contains("kind")) c.function.kind = f["kind"].get<std::string>();
      if (f.contains("m")) c.function.m = f["m"].get<std::size_t>();
      if (f.contains("alpha")) c.function.alpha = f["alpha"].get<double>();
      if (f.contains("zeros")) c.function.zeros = f["zeros"].get<std::string>();
      if (f.contains("a")) c.function.linear_a = complex_from_json(f["a"]);
      if (f.contains("coefficients")) c.function.coefficients = complex_list(f["coefficients"]);
    }
    if (doc.contains("window")) {
      const auto& w = doc["window"];
      check_keys(w, {"re_min", "re_max", "im_min", "im_max", "density"}, "window");
      c.window.re_min = w.value("re_min", c.window.re_min);
      c.window.re_max = w.value("re_max", c.window.re_max);
      c.window.im_min = w.value("im_min", c.window.im_min);
      c.window.im_max = w.value("im_max", c.window.im_max);
      c.density = w.value("density", c.density);
    }
    if (doc.contains("tolerance")) {
      const auto& t = doc["tolerance"];
      check_keys(t, {"rel", "abs"}, "tolerance");
      c.tol.rel = t.value("rel", c.tol.rel);
      c.tol.abs = t.value("abs", c.tol.abs);
    }
    if (doc.contains("output")) c.output = doc["output"].get<std::string>();
    if (doc.contains("seed")) c.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("portrait")) {
      const auto& p = doc["portrait"];
      check_keys(p, {"flow", "span", "theta"}, "portrait");
      c.flow = p.value("flow", c.flow);
      c.span = p.value("span", c.span);
      c.theta = p.value("theta", c.theta);
    }
    if (doc.contains("surface")) {
      const auto& s = doc["surface"];
      check_keys(s, {"z0", "tau1", "tau2", "max_jump"}, "surface");
      if (s.contains("z0")) c.z0 = complex_from_json(s["z0"]);
      if (s.contains("tau1")) c.tau1 = axis_from_json(s["tau1"]);
      if (s.contains("tau2")) c.tau2 = axis_from_json(s["tau2"]);
      c.max_jump = s.value("max_jump", c.max_jump);
    }
    if (doc.contains("orbit_study")) {
      const auto& o = doc["orbit_study"];
      check_keys(o, {"z0", "p0", "dz0", "dp0", "samples"}, "orbit_study");
      if (o.contains("z0")) c.z0 = complex_from_json(o["z0"]);
      if (o.contains("p0")) c.p0 = complex_list(o["p0"]);
      if (o.contains("dz0")) c.dz0 = complex_list(o["dz0"]);
      if (o.contains("dp0")) c.dp0 = complex_list(o["dp0"]);
      c.orbit_samples = o.value("samples", c.orbit_samples);
    }
    if (doc.contains("verify")) {
      const auto& v = doc["verify"];
      check_keys(v, {"suite", "samples", "readback"}, "verify");
      c.suite = v.value("suite", c.suite);
      c.samples = v.value("samples", c.samples);
      if (v.contains("readback")) c.readback = v["readback"].get<std::string>();
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw InvalidArgument("config " + path.string() + " is not valid JSON: " + e.what());
  }
  RunConfig c;
  apply_json(c, doc);
  return c;
}

void validate(const RunConfig& c) {
  const auto& w = c.window;
  if (!(w.re_min < w.re_max) || !(w.im_min < w.im_max)) {
    throw InvalidArgument("window must satisfy re_min < re_max and im_min < im_max");
  }
  if (c.density < 2) throw InvalidArgument("density must be at least 2 per axis");
  auto tol_ok = [](double v) { return v > 0.0 && v <= 1e-2; };
  if (!tol_ok(c.tol.rel) || !tol_ok(c.tol.abs)) throw InvalidArgument("tolerances must lie in (0, 1e-2]");
  const auto& k = c.function.kind;
  if (k != "cosh" && k != "xi-approx" && k != "polynomial" && k != "linear") {
    throw InvalidArgument("unknown function kind '" + k + "'");
  }
  if (k == "xi-approx" && c.function.m == 0) throw InvalidArgument("xi-approx needs m >= 1");
  if (c.function.alpha && !(*c.function.alpha > 0.0)) throw InvalidArgument("alpha must be positive");
  if (c.flow != "holomorphic" && c.flow != "newton" && c.flow != "desingularized") {
    throw InvalidArgument("unknown flow '" + c.flow + "'");
  }
  if (!(c.span > 0.0) || !std::isfinite(c.span)) throw InvalidArgument("span must be positive");
  if (c.tau1.count == 0 || c.tau2.count == 0) throw InvalidArgument("lattice axes need count >= 1");
  if (c.p0.empty()) throw InvalidArgument("orbit study needs at least one p0");
  if (c.orbit_samples < 8) throw InvalidArgument("orbit study needs at least 8 samples");
  if (c.samples == 0) throw InvalidArgument("verify needs samples >= 1");
  parse_suite(c.suite);
}

json to_json(const RunConfig& c) {
  json j;
  j["function"] = {{"kind", c.function.kind},
                   {"m", c.function.m},
                   {"zeros", c.function.zeros.string()},
                   {"a", complex_to_json(c.function.linear_a)},
                   {"coefficients", complex_list_json(c.function.coefficients)}};
  if (c.function.alpha) j["function"]["alpha"] = *c.function.alpha;
  j["window"] = {{"re_min", c.window.re_min},
                 {"re_max", c.window.re_max},
                 {"im_min", c.window.im_min},
                 {"im_max", c.window.im_max},
                 {"density", c.density}};
  j["tolerance"] = {{"rel", c.tol.rel}, {"abs", c.tol.abs}};
  j["output"] = c.output.string();
  j["seed"] = c.seed;
  j["portrait"] = {{"flow", c.flow}, {"span", c.span}, {"theta", c.theta}};
  j["surface"] = {{"tau1", {c.tau1.min, c.tau1.max, c.tau1.count}},
                  {"tau2", {c.tau2.min, c.tau2.max, c.tau2.count}},
                  {"max_jump", c.max_jump}};
  if (c.z0) j["surface"]["z0"] = complex_to_json(*c.z0);
  j["orbit_study"] = {{"p0", complex_list_json(c.p0)},
                      {"dz0", complex_list_json(c.dz0)},
                      {"dp0", complex_list_json(c.dp0)},
                      {"samples", c.orbit_samples}};
  if (c.z0) j["orbit_study"]["z0"] = complex_to_json(*c.z0);
  j["verify"] = {{"suite", c.suite}, {"samples", c.samples}, {"readback", c.readback.string()}};
  return j;
}

std::filesystem::path default_zero_table() {
  const std::filesystem::path name = "zeta_zeros_100.txt";
  if (const char* env = std::getenv("HOLOFLOW_DATA_DIR"); env != nullptr && *env != '\0') {
    return std::filesystem::path(env) / name;
  }
  // build tree, then next to the installed binary, then the configured prefix
  const auto local = std::filesystem::path(HOLOFLOW_DATA_DIR) / name;
  if (std::filesystem::exists(local)) return local;
  std::error_code ec;
  const auto exe = std::filesystem::read_symlink("/proc/self/exe", ec);
  if (!ec) {
    const auto beside = exe.parent_path().parent_path() / HOLOFLOW_INSTALL_DATA_REL / name;
    if (std::filesystem::exists(beside)) return beside;
  }
  return std::filesystem::path(HOLOFLOW_INSTALL_DATA_DIR) / name;
}

ZeroTable load_zeros(const RunConfig& c) {
  return load_zero_table(c.function.zeros.empty() ? default_zero_table() : c.function.zeros);
}

BuiltFunction build_function(const RunConfig& c, const ZeroTable* zeros) {
  const auto& k = c.function.kind;
  if (k == "cosh") return {HoloFunction::cosh_shift(), std::nullopt};
  if (k == "linear") return {HoloFunction::linear(c.function.linear_a), std::nullopt};
  if (k == "polynomial") return {HoloFunction::polynomial(c.function.coefficients), std::nullopt};
  if (zeros == nullptr) throw InvalidArgument("xi-approx needs a zero table");
  if (c.function.alpha) return {build_xi_approx(*zeros, c.function.m, *c.function.alpha), c.function.alpha};
  const HoloFunction unit = build_xi_approx(*zeros, c.function.m, 1.0);
  double peak = 0.0;
  constexpr int kGrid = 64;
  for (int i = 0; i < kGrid; ++i) {
    for (int j = 0; j < kGrid; ++j) {
      const double x = c.window.re_min + (c.window.re_max - c.window.re_min) * i / (kGrid - 1);
      const double y = c.window.im_min + (c.window.im_max - c.window.im_min) * j / (kGrid - 1);
      peak = std::max(peak, std::abs(unit.value(Complex(x, y))));
    }
  }
  if (!(peak > 0.0) || !std::isfinite(peak)) {
    throw InvalidArgument("cannot normalize xi-approx on this window (max |h| = " +
                          std::to_string(peak) + ")");
  }
  const double alpha = 1.0 / peak;
  return {build_xi_approx(*zeros, c.function.m, alpha), alpha};
}

Complex parse_complex(const std::string& text) {
  std::istringstream in(text);
  double re = 0.0, im = 0.0;
  char comma = 0;
  if (!(in >> re)) throw InvalidArgument("not a complex number: '" + text + "'");
  if (in >> comma) {
    if (comma != ',' || !(in >> im)) throw InvalidArgument("not a complex number: '" + text + "'");
  }
  std::string rest;
  if (in >> rest) throw InvalidArgument("not a complex number: '" + text + "'");
  return {re, im};
}

AxisSpec parse_axis(const std::string& text) {
  std::istringstream in(text);
  double lo = 0.0, hi = 0.0, count = 0.0;
  char c1 = 0, c2 = 0;
  if (!(in >> lo >> c1 >> hi >> c2 >> count) || c1 != ',' || c2 != ',') {
    throw InvalidArgument("lattice axis must be 'min,max,count': '" + text + "'");
  }
  std::string rest;
  if (in >> rest || !(count >= 1.0) || count != std::floor(count)) {
    throw InvalidArgument("lattice axis must be 'min,max,count': '" + text + "'");
  }
  return {lo, hi, static_cast<std::size_t>(count)};
}

}  // namespace holoflow::cli
