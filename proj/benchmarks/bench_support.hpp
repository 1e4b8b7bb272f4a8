#pragma once

#include <holoflow/function_catalog.hpp>

inline const holoflow::ZeroTable& bench_zeros() {
  static const holoflow::ZeroTable t =
      holoflow::load_zero_table(std::string(HOLOFLOW_BENCH_DATA_DIR) + "/zeta_zeros_100.txt");
  return t;
}
