#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "holoflow/flow_engine.hpp"
#include "holoflow/function_catalog.hpp"
#include "holoflow/types.hpp"

namespace holoflow {

/// Current state (z, p, dz, dp) of the Hamiltonian system with its first- and
/// second-order sensitivities, plus the frozen initial values.
struct SensitivityBundle {
  Complex z, p, dz, dp;
  Complex z0, p0, dz0, dp0;

  static SensitivityBundle initial(Complex z0, Complex p0, Complex dz0, Complex dp0) {
    return {z0, p0, dz0, dp0, z0, p0, dz0, dp0};
  }
  Complex energy(const HoloFunction& h) const { return h.value(z) * p; }
};

/// (dz/dt, dp/dt) = (h(z), -h'(z) p).
std::pair<Complex, Complex> hamiltonian_field(const HoloFunction& h, Complex z, Complex p);

/// h(z0)/h(z) p0. Throws MomentumPole when |h(z)| <= pole_epsilon(z).
Complex momentum_closed_form(const HoloFunction& h, Complex z, Complex z0, Complex p0);

/// h(z)/h(z0) dz0. Throws AnchorPole when |h(z0)| <= pole_epsilon(z0).
Complex sensitivity_closed_form(const HoloFunction& h, Complex z, Complex z0, Complex dz0);

/// p0 dz0 (h'(z0) - h'(z)) / h(z) + dp0 h(z0)/h(z). Throws MomentumPole.
Complex delta_p_closed_form(const HoloFunction& h, Complex z, Complex z0, Complex p0, Complex dz0,
                            Complex dp0);

/// Same quantity for the xi-approximating polynomial with h'(z)/h(z) replaced
/// by the sum of 1/(z - rho) over the 2m symmetric zeros. Throws PoleError.
Complex delta_p_trace_form(std::span<const double> gammas, Complex z, Complex z0, Complex p0,
                           Complex dz0, Complex dp0);
Complex delta_p_trace_form(const ZeroTable& zeros, std::size_t m, Complex z, Complex z0,
                           Complex p0, Complex dz0, Complex dp0);

/// Linear map (dz0, dp0) -> (dz, dp) at z: [[h/h0, 0], [k_zp, h0/h]].
struct FlowMapMatrix {
  Complex m11, m12, m21, m22;
  Complex k_zp;

  Complex determinant() const { return m11 * m22 - m12 * m21; }
  std::pair<Complex, Complex> apply(Complex dz0, Complex dp0) const {
    return {m11 * dz0 + m12 * dp0, m21 * dz0 + m22 * dp0};
  }
};

/// For XiApprox the coupling uses the sum over zeros, otherwise h'(z)/h(z).
FlowMapMatrix flow_map_matrix(const HoloFunction& h, Complex z, Complex z0, Complex p0);

/// H0 times the period of a closed orbit.
inline Complex action_along_orbit(Complex H0, Complex period) { return H0 * period; }

struct BundleSample {
  double s = 0.0;
  Complex t;
  SensitivityBundle state;
};

struct BundleTrajectory {
  std::vector<BundleSample> samples;
  TrajectoryStatus status = TrajectoryStatus::Completed;
  std::optional<double> escape_s;

  const BundleSample& back() const { return samples.back(); }
};

struct HamiltonianOptions {
  double escape_radius = 0.0;  // 0 selects default_escape_radius(z0)
  /// Step cap keeping per-step phase increments small; 0 selects span / 256.
  double max_step = 0.0;
};

/// Jointly integrates z' = h, p' = -h' p, dz' = h' dz and
/// dp' = -h''(z) p0 dz0 - h' dp along the ray.
BundleTrajectory integrate_hamiltonian(const HoloFunction& h, const SensitivityBundle& bundle0,
                                       const TimeRay& ray, const Tolerance& tol = {},
                                       const HamiltonianOptions& opts = {},
                                       std::span<const double> sample_points = {});

/// |numeric - closed form| / (1 + |closed form|) for p, dz and dp.
struct ClosedFormResiduals {
  double p = 0.0, dz = 0.0, dp = 0.0;
  double max() const;
};
ClosedFormResiduals closed_form_residuals(const HoloFunction& h, const SensitivityBundle& state);

/// Continuous phase built from principal-branch increments.
class PhaseUnwrapper {
 public:
  double push(Complex w);
  double value() const noexcept { return value_; }

 private:
  bool started_ = false;
  double value_ = 0.0;
};

std::vector<double> unwrapped_phase(std::span<const Complex> values);

/// Newton time T(t) = log h(z0) - log h(z(t)) along a sampled path, with the
/// logarithm continued from sample to sample.
std::vector<Complex> newton_time(const HoloFunction& h, std::span<const Complex> path);

/// CSV "s,z_re,z_im,p_re,p_im,dz_re,dz_im,dp_re,dp_im,H_re,H_im".
void write_bundle_csv(std::ostream& out, const HoloFunction& h, const BundleTrajectory& trajectory);

}  // namespace holoflow
