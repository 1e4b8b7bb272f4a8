#pragma once

// Reference computations for the tests. Nothing here calls into the library
// beyond HoloFunction::value, so a bug in a module cannot hide behind the
// oracle it is checked against.

#include <array>
#include <cmath>
#include <complex>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#ifndef HOLOFLOW_TEST_DATA_DIR
#define HOLOFLOW_TEST_DATA_DIR "data"
#endif

namespace oracle {

using C = std::complex<double>;
inline constexpr double pi = 3.14159265358979323846;

inline std::filesystem::path zero_table_path() {
  return std::filesystem::path(HOLOFLOW_TEST_DATA_DIR) / "zeta_zeros_100.txt";
}

// First zeta zero ordinates, typed in from published tables.
inline constexpr double gamma1 = 14.134725141734693790;
inline constexpr double gamma2 = 21.022039638771554993;
inline constexpr double gamma3 = 25.010857580145688763;
inline constexpr double gamma4 = 30.424876125859513210;

// prod_n ((z - 1/2)^2 + g_n^2) / (1/4 + g_n^2), multiplied by scale.
inline C xi_product(std::span<const double> gammas, C z, double scale = 1.0) {
  C out = scale;
  for (double g : gammas) out *= ((z - 0.5) * (z - 0.5) + g * g) / (0.25 + g * g);
  return out;
}

// Coefficients (ascending) of prod (z - r).
inline std::vector<C> expand_roots(std::span<const C> roots) {
  std::vector<C> c{1.0};
  for (C r : roots) {
    std::vector<C> next(c.size() + 1, 0.0);
    for (std::size_t k = 0; k < c.size(); ++k) {
      next[k + 1] += c[k];
      next[k] -= r * c[k];
    }
    c = std::move(next);
  }
  return c;
}

inline C horner(std::span<const C> ascending, C z) {
  C acc = 0.0;
  for (std::size_t k = ascending.size(); k-- > 0;) acc = acc * z + ascending[k];
  return acc;
}

// Five-point complex derivative of an analytic function along the real axis.
inline C derivative(const std::function<C(C)>& f, C z, double step = 1e-3) {
  return (8.0 * (f(z + step) - f(z - step)) - (f(z + 2.0 * step) - f(z - 2.0 * step))) / (12.0 * step);
}

// Five-point partial derivatives of a real function of the plane.
inline std::array<double, 2> gradient(const std::function<double(C)>& f, C z, double step = 1e-3) {
  auto d = [&](C e) {
    return (8.0 * (f(z + step * e) - f(z - step * e)) - (f(z + 2.0 * step * e) - f(z - 2.0 * step * e))) /
           (12.0 * step);
  };
  return {d(1.0), d(C(0.0, 1.0))};
}

// Christoffel symbols of g = phi(z) * identity from the Koszul formula.
// out[k][i][j] = Gamma^k_{ij}.
inline std::array<std::array<std::array<double, 2>, 2>, 2> koszul_conformal(
    const std::function<double(C)>& phi, C z) {
  const auto dphi = gradient(phi, z);
  const double p = phi(z);
  std::array<std::array<std::array<double, 2>, 2>, 2> out{};
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        out[k][i][j] =
            0.5 * ((i == k ? dphi[j] : 0.0) + (j == k ? dphi[i] : 0.0) - (i == j ? dphi[k] : 0.0)) / p;
  return out;
}

// Fixed-step classical RK4 for y' = f(t, y), y a vector of complex numbers.
template <std::size_t N>
using State = std::array<C, N>;

template <std::size_t N, class F>
State<N> rk4(F f, State<N> y, double t0, double t1, std::size_t steps) {
  const double dt = (t1 - t0) / static_cast<double>(steps);
  auto axpy = [](const State<N>& a, double s, const State<N>& b) {
    State<N> r;
    for (std::size_t i = 0; i < N; ++i) r[i] = a[i] + s * b[i];
    return r;
  };
  double t = t0;
  for (std::size_t n = 0; n < steps; ++n) {
    const State<N> k1 = f(t, y);
    const State<N> k2 = f(t + dt / 2, axpy(y, dt / 2, k1));
    const State<N> k3 = f(t + dt / 2, axpy(y, dt / 2, k2));
    const State<N> k4 = f(t + dt, axpy(y, dt, k3));
    for (std::size_t i = 0; i < N; ++i) y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    t += dt;
  }
  return y;
}

// Composite Simpson rule on [a, b] with n (even) panels.
inline C simpson(const std::function<C(double)>& f, double a, double b, std::size_t n) {
  if (n % 2) ++n;
  const double h = (b - a) / static_cast<double>(n);
  C acc = f(a) + f(b);
  for (std::size_t k = 1; k < n; ++k) acc += (k % 2 ? 4.0 : 2.0) * f(a + h * static_cast<double>(k));
  return acc * h / 3.0;
}

inline double rel(C a, C b) { return std::abs(a - b) / (1.0 + std::abs(b)); }

}  // namespace oracle
