#include "holoflow/export.hpp"

#include <cstdio>

#include "holoflow/errors.hpp"

namespace holoflow {

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

nlohmann::json complex_to_json(Complex z) { return nlohmann::json::array({z.real(), z.imag()}); }

Complex complex_from_json(const nlohmann::json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw InvalidArgument("expected a complex number as [re, im], got " + j.dump());
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace holoflow
