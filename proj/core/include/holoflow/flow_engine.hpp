#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "holoflow/function_catalog.hpp"
#include "holoflow/types.hpp"

namespace holoflow {

/// A ray t = s e^{i theta}, 0 <= s <= span, in the complex time plane.
/// theta = 0 is real time, theta = pi/2 imaginary time.
struct TimeRay {
  double theta = 0.0;
  double span = 0.0;

  Complex direction() const { return std::polar(1.0, theta); }
};

enum class TrajectoryStatus { Completed, EscapedAt, StiffnessAbort, ClosedOrbit, CriticalPointAbort };

const char* to_string(TrajectoryStatus status);

struct TrajectorySample {
  double s = 0.0;  // arc parameter along the ray
  Complex t;       // complex time s e^{i theta}
  Complex z;
  Complex h;  // field function h(z) at the sample
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  TrajectoryStatus status = TrajectoryStatus::Completed;
  std::optional<double> escape_s;    // set for EscapedAt
  std::optional<double> period;      // set for ClosedOrbit
  std::optional<Complex> abort_at;   // set for CriticalPointAbort
  double abort_derivative = 0.0;     // |h'| at abort_at

  const TrajectorySample& front() const { return samples.front(); }
  const TrajectorySample& back() const { return samples.back(); }
};

inline double default_escape_radius(Complex z0) { return 1e3 * (1.0 + std::abs(z0)); }

/// Integrates dz/ds = e^{i theta} h(z) for s in [0, span]. Stops with
/// EscapedAt once |z| exceeds escape_radius (0 selects the default) and with
/// StiffnessAbort when the step size underflows 1e-14 * span. Values in
/// `sample_points` are hit exactly by recorded samples.
Trajectory integrate_ray(const HoloFunction& h, Complex z0, const TimeRay& ray,
                         const Tolerance& tol = {}, double escape_radius = 0.0,
                         std::span<const double> sample_points = {});

/// Integrates the Newton flow dz/ds = -e^{i theta} h(z) / h'(z). Throws
/// CriticalPointAbort if |h'(z0)| <= guard_eps; stops with status
/// CriticalPointAbort if |h'| drops below guard_eps along the way.
Trajectory integrate_newton(const HoloFunction& h, Complex z0, const TimeRay& ray,
                            const Tolerance& tol = {}, double guard_eps = 1e-8,
                            double escape_radius = 0.0,
                            std::span<const double> sample_points = {});

/// -h(z) conj(h'(z)): the Newton field times |h'(z)|^2.
Complex desingularized_newton_field(const HoloFunction& h, Complex z);

/// Integrates dz/ds = e^{i theta} desingularized_newton_field(h, z).
Trajectory integrate_desingularized(const HoloFunction& h, Complex z0, const TimeRay& ray,
                                   const Tolerance& tol = {}, double escape_radius = 0.0,
                                   std::span<const double> sample_points = {});

struct ClosedOrbit {
  double period = 0.0;
  Complex return_point;
  double gap = 0.0;  // |return_point - z0|
  Trajectory orbit;  // samples over one revolution, last one on the section
};

/// First return of the real-time flow to the section through z0 orthogonal
/// to h(z0), counted only in the direction of the initial flow. Returns
/// nullopt on escape, on fixed points or when no return happens within the
/// horizon.
std::optional<ClosedOrbit> find_closed_orbit(const HoloFunction& h, Complex z0,
                                             const Tolerance& tol = {}, double horizon = 1e3,
                                             double escape_radius = 0.0,
                                             double accept_gap = 0.0);

/// As find_closed_orbit, but throws NoReturn.
ClosedOrbit detect_closed_orbit(const HoloFunction& h, Complex z0, const Tolerance& tol = {},
                                double horizon = 1e3, double escape_radius = 0.0);

/// 2 pi i / h'(rho) at a simple root rho. Throws NotASimpleRoot when
/// |h(rho)| > 1e-8 or h'(rho) = 0.
Complex orbit_period_analytic(const HoloFunction& h, Complex rho);

enum class DirectionOutcome { FiniteEscape, InfiniteEscape, Equilibrium, ClosedOrbit, Undetermined };

const char* to_string(DirectionOutcome outcome);

struct SeparatrixReport {
  bool positive = false;
  bool negative = false;
  std::optional<double> t_escape_pos;  // extrapolated blow-up time
  std::optional<double> t_escape_neg;
  DirectionOutcome forward = DirectionOutcome::Undetermined;
  DirectionOutcome backward = DirectionOutcome::Undetermined;
  std::optional<double> period;  // when the seed lies on a closed orbit
};

/// Forward and backward real-time classification. Escape times at the nested
/// radii R, 2R, 4R are extrapolated; a convergent limit marks a separatrix.
/// escape_radius = 0 selects R = 2 + |z0|. Throws Inconclusive when a
/// direction neither escapes, closes nor settles on an equilibrium within
/// the horizon.
SeparatrixReport classify_separatrix(const HoloFunction& h, Complex z0, double escape_radius = 0.0,
                                     double horizon = 1e3, const Tolerance& tol = {});

/// CSV with header "s,t_re,t_im,z_re,z_im,h_re,h_im,status". Every row but
/// the last carries "ok"; the last row carries the trajectory status.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

}  // namespace holoflow
