#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <span>
#include <variant>
#include <vector>

#include "holoflow/flow_engine.hpp"
#include "holoflow/function_catalog.hpp"
#include "holoflow/types.hpp"

namespace holoflow {

// Real two-dimensional view of the complex plane, z = z1 + i z2. A
// holomorphic h splits into components (h1, h2) = (Re h, Im h).

using Vec2 = std::array<double, 2>;
using Mat2 = std::array<Vec2, 2>;  // row-major

struct TangentVector {
  double v1 = 0.0;
  double v2 = 0.0;

  static TangentVector from_complex(Complex w) { return {w.real(), w.imag()}; }
  double norm() const { return std::hypot(v1, v2); }
};

/// Vector fields that covariant_derivative understands.
struct HoloSplit {
  HoloFunction g;  // X = (Re g, Im g)
};
struct LinearComb {
  double a = 1.0;  // X = A h with A = [[a, -b], [b, a]]
  double b = 0.0;
};
struct RawField {
  std::function<Vec2(double, double)> components;
};
using VectorFieldSpec = std::variant<HoloSplit, LinearComb, RawField>;

struct MetricFrame {
  Complex z;
  Complex h;
  double g11 = 0.0, g22 = 0.0;  // g12 = g21 = 0
  double ginv11 = 0.0, ginv22 = 0.0;
  Mat2 gamma1{};  // gamma1[i][j] = Gamma^1_{ij}
  Mat2 gamma2{};

  const Mat2& gamma(int k) const { return k == 0 ? gamma1 : gamma2; }
};

/// (v1^2 + v2^2) / (2 |h(z)|^2). Throws MetricSingular at zeros of h.
double lagrangian(const HoloFunction& h, Complex z, const TangentVector& v);

/// Metric g = diag(1, 1) / |h|^2 and its Christoffel symbols, with the
/// partials of (h1, h2) taken from h' through the Cauchy-Riemann relations.
MetricFrame metric_frame(const HoloFunction& h, Complex z);

/// Real Jacobian of the splitting of a holomorphic function with derivative d.
Mat2 holomorphic_jacobian(Complex d);

enum class Direction { AlongH, AlongIH };

/// J_X h - J_h X (AlongH) or E (J_X h - J_h X) (AlongIH), E = [[0, -1], [1, 0]].
/// Raw fields get a central-difference Jacobian and must satisfy Cauchy-Riemann
/// to 1e-8 (relative), else NonHolomorphicField.
TangentVector covariant_derivative(const HoloFunction& h, const VectorFieldSpec& X,
                                   Direction direction, Complex z);

/// Scale for the parallel-field residual at z: 1 + |h'(z)| |h(z)|.
double parallel_residual_scale(const HoloFunction& h, Complex z);

/// Max over samples and both directions of |nabla (A h)| for A built from
/// dz0 / h(z0). Throws AnchorPole when h(z0) vanishes.
double check_parallel_sensitivity(const HoloFunction& h, Complex z0, Complex dz0,
                                  std::span<const Complex> sample_points);

/// Max |R^l_{ijk}| from central differences of the analytic Christoffel
/// symbols. fd_step <= 0 selects 1e-5 (1 + |z|). Throws MetricSingular when a
/// known root of h lies within 10 fd_step of z or a stencil point is singular.
double curvature_flatness_check(const HoloFunction& h, Complex z, double fd_step = 0.0);

struct TimeChartSample {
  Complex z;
  double g_hh = 0.0;    // g(h, h)
  double g_hih = 0.0;   // g(h, ih)
  double g_ihih = 0.0;  // g(ih, ih)
};

/// Pulls the metric back along a complex-time trajectory, using the inner
/// product <v, w> / (2 |h|^2).
std::vector<TimeChartSample> trivialize_in_time_chart(const HoloFunction& h,
                                                      const Trajectory& trajectory);

}  // namespace holoflow
