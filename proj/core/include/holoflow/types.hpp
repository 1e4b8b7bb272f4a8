#pragma once

#include <complex>
#include <numbers>

namespace holoflow {

using Complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr Complex kI{0.0, 1.0};

// Distance below which a point counts as sitting on a zero or pole.
inline double pole_epsilon(Complex z) { return 1e-12 * (1.0 + std::abs(z)); }

struct Tolerance {
  double rel = 1e-10;
  double abs = 1e-12;
};

}  // namespace holoflow
