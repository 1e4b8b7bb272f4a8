#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "holoflow/errors.hpp"
#include "holoflow/function_catalog.hpp"
#include "holoflow/types.hpp"

namespace holoflow {

/// P_m(z; T, z0) = prod_n (z - rho_n) / (z0 - rho_n) - exp(-T), the product
/// running over m conjugate pairs of critical-line zeros (degree 2m).
class PmPolynomial {
 public:
  /// Throws DegenerateAnchor when z0 sits on one of the zeros.
  PmPolynomial(std::span<const double> gammas, Complex z0, Complex T = 0.0);
  static PmPolynomial from_table(const ZeroTable& zeros, std::size_t m, Complex z0,
                                 Complex T = 0.0);

  std::size_t pair_count() const noexcept { return gammas_.size(); }
  std::size_t degree() const noexcept { return 2 * gammas_.size(); }
  std::span<const double> gammas() const noexcept { return gammas_; }
  const std::vector<Complex>& zeros() const noexcept { return zeros_; }
  Complex z0() const noexcept { return z0_; }
  Complex time() const noexcept { return T_; }
  /// Pi_0 = prod_n (z0 - rho_n); may overflow for large m, see log_anchor().
  Complex anchor_product() const;
  /// sum_n log(z0 - rho_n), principal branches.
  Complex log_anchor() const noexcept { return log_anchor_; }

  PmPolynomial at_time(Complex T) const;

  /// Direct product unless it over- or underflows, then log space.
  Complex evaluate(Complex z) const;
  Complex evaluate_direct(Complex z) const;
  Complex evaluate_log(Complex z) const;
  /// P'(z) = prod(z - rho) / Pi_0 * sum 1/(z - rho), evaluated as a product.
  Complex derivative(Complex z) const;
  /// L(z) = sum_n log((z - rho_n) / (z0 - rho_n)), so P = exp(L) - exp(-T).
  Complex log_ratio(Complex z) const;
  /// |P(z)| / |exp(-T)| computed as |exp(L(z) + T) - 1|.
  double relative_residual(Complex z) const;
  struct NewtonStep {
    Complex step;            // P(z) / P'(z)
    double scaled_residual;  // |P| / (|exp(-T)| + (1 + |z|) |P'|)
  };
  /// Both evaluated in log space, so they stay finite where the product
  /// over- or underflows and on the zeros themselves.
  NewtonStep newton_step(Complex z) const;
  /// Coefficients of P in ascending powers of z.
  std::vector<Complex> coefficients() const;

  /// Zeros of P' (independent of T): all on Re z = 1/2, 2m - 1 of them,
  /// ordered by imaginary part.
  std::vector<Complex> critical_points() const;
  /// Spacing of the zeros bracketing a critical point, used to scale the
  /// branch-event radius.
  double local_zero_spacing(Complex critical_point) const;

 private:
  std::vector<double> gammas_;
  std::vector<Complex> zeros_;
  Complex z0_;
  Complex T_;
  Complex log_anchor_;
};

struct RootOptions {
  int max_iterations = 500;
  double polish_target = 1e-14;  // scaled residual, see PmPolynomial::newton_step
  double accept = 1e-12;         // NonConvergence above this after polishing
};

/// All 2m roots (with multiplicity) by Aberth-Ehrlich iteration, falling
/// back to companion-matrix eigenvalues, each polished by Newton steps.
/// Sorted lexicographically by (re, im). Throws InvalidArgument for m = 0
/// and NonConvergence when a root cannot be polished.
std::vector<Complex> roots_of_Pm(const PmPolynomial& P, const RootOptions& opts = {});

/// Rectangular complex-time lattice T = tau1[j] + i tau2[k].
struct TimeLattice {
  std::vector<double> tau1{0.0};
  std::vector<double> tau2{0.0};

  std::size_t size() const noexcept { return tau1.size() * tau2.size(); }
  /// Nodes are stored row-major: node = k * tau1.size() + j.
  std::size_t node(std::size_t j, std::size_t k) const noexcept { return k * tau1.size() + j; }
  Complex time(std::size_t node) const {
    return {tau1[node % tau1.size()], tau2[node / tau1.size()]};
  }
  static TimeLattice linspace(double t1_min, double t1_max, std::size_t n1, double t2_min,
                              double t2_max, std::size_t n2);
};

struct ContinuationOptions {
  /// Largest allowed distance between a predicted and a matched root.
  /// Non-positive selects half the smallest distance between zeros.
  double max_jump = 0.0;
  double branch_eps_factor = 1e-4;
  unsigned threads = 1;
  RootOptions roots{};
};

struct BranchEvent {
  Complex T;
  Complex z;          // point of the matched step closest to the critical point
  double min_dp = 0;  // |P'_m| there
  std::size_t sheet = 0;
};

struct SurfaceGrid {
  std::size_t m = 0;
  Complex z0;
  Complex log_anchor;
  std::vector<Complex> zeros;
  TimeLattice lattice;
  /// sheets[s][node]; unsolved nodes (after a continuation break) hold NaN.
  std::vector<std::vector<Complex>> sheets;
  std::vector<BranchEvent> branch_events;
  bool complete = false;

  std::size_t sheet_count() const noexcept { return sheets.size(); }
};

class ContinuationBreak : public Error {
 public:
  ContinuationBreak(std::size_t node, SurfaceGrid partial)
      : Error("root continuation broke at lattice node " + std::to_string(node)),
        node_(node),
        partial_(std::make_shared<SurfaceGrid>(std::move(partial))) {}
  std::size_t node() const noexcept { return node_; }
  const SurfaceGrid& partial() const noexcept { return *partial_; }

 private:
  std::size_t node_;
  std::shared_ptr<SurfaceGrid> partial_;
};

/// Solves P_m over the lattice and continues roots node to node from the
/// node nearest T = 0. Sheet 0 starts at the root nearest z0.
SurfaceGrid trace_surface(const ZeroTable& zeros, std::size_t m, Complex z0,
                          const TimeLattice& lattice, const ContinuationOptions& opts = {});
SurfaceGrid trace_surface(std::span<const double> gammas, Complex z0, const TimeLattice& lattice,
                          const ContinuationOptions& opts = {});

/// max over stored (T, z) of |prod (z - rho)/(z0 - rho) - exp(-T)| / |exp(-T)|;
/// 0 for an empty grid.
double verify_constant_phase(const SurfaceGrid& grid);

/// p prod_n (z - rho_n) - p0 prod_n (z0 - rho_n) over the 2m symmetric zeros.
Complex eval_Pm_zp(const ZeroTable& zeros, std::size_t m, Complex z, Complex p, Complex z0,
                   Complex p0);

nlohmann::json surface_to_json(const SurfaceGrid& grid);
SurfaceGrid surface_from_json(const nlohmann::json& j);

}  // namespace holoflow
