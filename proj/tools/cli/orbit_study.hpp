#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include <holoflow/flow_engine.hpp>
#include <holoflow/hamiltonian.hpp>

namespace holoflow::cli {

struct OrbitRun {
  Complex p0, dz0, dp0;
};

// Runs varying one initial value at a time around (p0[0], dz0[0], dp0[0]).
// Each group lists the runs that differ only in that value.
struct OrbitDesign {
  std::vector<OrbitRun> runs;
  std::vector<std::size_t> dz_group, p_group, dp_group;
};

OrbitDesign star_design(std::span<const Complex> p0, std::span<const Complex> dz0,
                        std::span<const Complex> dp0);

struct RunSeries {
  OrbitRun run;
  BundleTrajectory trajectory;  // every accepted step
  std::vector<std::size_t> at;  // indices of the common sample points in trajectory
  // unwrapped phases at the common sample points
  std::vector<double> arg_dz, arg_p, arg_dp, arg_h;
  double winding_dz = 0, winding_p = 0, winding_dp = 0;
  double counter_rotation_drift = 0;  // max |(arg dz + arg p) - initial|
  double flow_angle_drift = 0;        // max |(arg dz - arg h) - initial|
  double energy_drift = 0;            // max |H - H0| / |H0|
  double p_dz_drift = 0;              // max |p dz - p0 dz0| / |p0 dz0|
  double closed_form_residual = 0;
};

struct GapSeries {
  std::string quantity;  // dz | p | dp
  std::size_t a = 0, b = 0;
  double variation = 0;  // max - min of the phase difference
};

struct OrbitStudy {
  Complex z0;
  double period = 0;
  double closure_gap = 0;
  std::vector<double> sample_s;
  std::vector<RunSeries> runs;
  std::vector<GapSeries> gaps;

  nlohmann::json summary() const;
};

struct OrbitStudyOptions {
  Tolerance tol{1e-10, 1e-12};
  std::size_t samples = 512;
  unsigned threads = 1;
};

/// Detects the closed orbit through z0 (NoReturn otherwise) and integrates
/// every run of the design over one period.
OrbitStudy study_orbit(const HoloFunction& h, Complex z0, const OrbitDesign& design,
                       const OrbitStudyOptions& opts = {});

// Flags reported in the summary.
inline constexpr double kAngleConstancy = 1e-8;
inline constexpr double kWindingTolerance = 1e-4;
inline constexpr double kGapVariationThreshold = 1e-2;

}  // namespace holoflow::cli
