#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "holoflow/types.hpp"

namespace holoflow {

/// Round-trip decimal form of a double (17 significant digits).
std::string format_double(double value);

/// Complex numbers travel as [re, im] pairs.
nlohmann::json complex_to_json(Complex z);
Complex complex_from_json(const nlohmann::json& j);

}  // namespace holoflow
