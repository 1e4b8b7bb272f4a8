#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "holoflow/function_catalog.hpp"
#include "holoflow/types.hpp"

namespace holoflow {

// Invariant suites behind `holoflow verify`. Every check compares a module
// result against an independent oracle (finite differences, quadrature or a
// closed form) and keeps the worst sample.

struct CheckRecord {
  std::string suite;
  std::string name;
  std::optional<Complex> point;  // worst sample, when the check is pointwise
  std::string quantity;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

nlohmann::json to_json(const CheckRecord& record);

struct Window {
  double re_min = -7.0, re_max = 8.0;
  double im_min = -1.0, im_max = 30.0;
};

struct SuiteOptions {
  std::uint64_t seed = 1;
  std::size_t samples = 64;
  std::size_t parallel_samples = 1000;
  Tolerance tol{1e-10, 1e-12};
  Window window{};
  /// Zero ordinates for the complex-period check; empty skips it.
  std::vector<double> gammas;
};

enum class Suite { Geometry, Hamiltonian, Flows, All };

const char* to_string(Suite suite);
/// Throws InvalidArgument for unknown names.
Suite parse_suite(std::string_view name);

struct VerifyReport {
  std::vector<CheckRecord> checks;

  bool passed() const;
  std::size_t failures() const;
  nlohmann::json to_json() const;
};

void run_geometry_checks(const HoloFunction& h, const SuiteOptions& opts, VerifyReport& report);
void run_hamiltonian_checks(const HoloFunction& h, const SuiteOptions& opts, VerifyReport& report);
void run_flow_checks(const HoloFunction& h, const SuiteOptions& opts, VerifyReport& report);

VerifyReport run_suite(Suite suite, const HoloFunction& h, const SuiteOptions& opts);

/// A simple root of h with a real closed-orbit period, if one is known.
std::optional<Complex> center_root(const HoloFunction& h);

}  // namespace holoflow
