#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include <holoflow/checks.hpp>
#include <holoflow/function_catalog.hpp>
#include <holoflow/types.hpp>

namespace holoflow::cli {

struct FunctionSpec {
  std::string kind = "xi-approx";  // cosh | xi-approx | polynomial | linear
  std::size_t m = 4;
  std::optional<double> alpha;  // xi-approx scale; unset selects 1 / max |h| on the window
  std::filesystem::path zeros;  // empty selects the bundled table
  Complex linear_a = 1.0;
  std::vector<Complex> coefficients{0.0, 1.0};
};

struct AxisSpec {
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 1;
};

struct RunConfig {
  FunctionSpec function;
  Window window;
  std::size_t density = 8;  // seeds per axis
  Tolerance tol{1e-10, 1e-12};
  std::filesystem::path output = "holoflow_out";
  std::uint64_t seed = 1;

  // portrait
  std::string flow = "holomorphic";  // holomorphic | newton | desingularized
  double span = 4.0;
  double theta = 0.0;

  // surface
  std::optional<Complex> z0;
  AxisSpec tau1{0.0, 2.0, 21};
  AxisSpec tau2{0.0, 0.0, 1};
  double max_jump = 0.0;

  // orbit-study
  std::vector<Complex> p0{Complex(1.0, 0.0), std::polar(1.0, 1.0)};
  std::vector<Complex> dz0;  // empty selects h(z0) and i h(z0)
  std::vector<Complex> dp0;  // empty selects c and i c, c = p0 dz0 h'(z0)
  std::size_t orbit_samples = 512;

  // verify
  std::string suite = "all";
  std::size_t samples = 64;
  std::filesystem::path readback;
};

/// Merges a JSON document into `config`; unknown keys are rejected.
void apply_json(RunConfig& config, const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);

/// Throws InvalidArgument for an unusable configuration.
void validate(const RunConfig& config);

nlohmann::json to_json(const RunConfig& config);

std::filesystem::path default_zero_table();
ZeroTable load_zeros(const RunConfig& config);

struct BuiltFunction {
  HoloFunction h;
  std::optional<double> alpha;  // recorded for xi-approx
};

/// Builds h; for xi-approx without an explicit alpha the scale is chosen so
/// that max |h| over a 64 x 64 grid on the window equals 1.
BuiltFunction build_function(const RunConfig& config, const ZeroTable* zeros);

/// "re,im" or "re".
Complex parse_complex(const std::string& text);
/// "min,max,count".
AxisSpec parse_axis(const std::string& text);

}  // namespace holoflow::cli
