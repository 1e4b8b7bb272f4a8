#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "holoflow/types.hpp"

namespace holoflow {

/// Imaginary parts 0 < gamma_1 < gamma_2 < ... of critical-line zeros
/// rho_n = 1/2 + i gamma_n. The conjugates rho_{-n} are implied.
struct ZeroTable {
  std::vector<double> gammas;
  std::string source;

  std::size_t size() const noexcept { return gammas.size(); }
  bool empty() const noexcept { return gammas.empty(); }
  /// rho_n for n = 1..size().
  Complex rho(std::size_t n) const { return {0.5, gammas.at(n - 1)}; }
  /// The first m zeros and their conjugates, upper half first.
  std::vector<Complex> symmetric_zeros(std::size_t m) const;
};

/// Reads one positive decimal per line; '#' starts a comment line, blank
/// lines are skipped. Throws IoError, ParseError or MonotonicityError.
ZeroTable load_zero_table(const std::filesystem::path& path);
ZeroTable parse_zero_table(std::istream& in, std::string source);

enum class HoloKind { CoshShift, XiApprox, GenericPoly, Linear };

const char* to_string(HoloKind kind);

/// Value and first two complex derivatives at one point.
struct Jet {
  Complex f;
  Complex df;
  Complex d2f;
};

struct Evaluation {
  Complex value;
  bool overflow = false;
};

/// An entire function h together with exact h' and h''.
///
/// Every kind carries a complex prefactor c, so h = c * base(z). For
/// xi-approximating polynomials c is the positive scale alpha.
class HoloFunction {
 public:
  /// h(z) = cosh(z - 1/2).
  static HoloFunction cosh_shift();
  /// h(z) = a z.
  static HoloFunction linear(Complex a);
  /// h(z) = sum_k coeffs[k] z^k. An empty list is the zero polynomial.
  static HoloFunction polynomial(std::vector<Complex> coeffs);
  /// h(z) = scale * prod_{n<=m} ((z - 1/2)^2 + gamma_n^2) / (1/4 + gamma_n^2).
  static HoloFunction xi_approx(std::span<const double> gammas, double scale);

  HoloKind kind() const noexcept;
  Complex factor() const noexcept { return factor_; }
  /// The same function multiplied by c.
  HoloFunction times(Complex c) const;

  Complex value(Complex z) const;
  Complex derivative(Complex z) const;
  Complex second_derivative(Complex z) const;
  Jet jet(Complex z) const;
  /// order in {0, 1, 2}; sets overflow when the result is not finite.
  Evaluation eval(Complex z, int order) const;

  /// Number of conjugate zero pairs (XiApprox only, otherwise 0).
  std::size_t pair_count() const noexcept;
  std::span<const double> gammas() const noexcept;
  /// Roots known by construction (XiApprox, Linear); empty otherwise.
  std::vector<Complex> known_roots() const;

  std::string describe() const;

 private:
  struct Cosh {};
  struct Xi {
    std::vector<double> gammas;
  };
  struct Poly {
    std::vector<Complex> coeffs;
  };
  struct Lin {};

  using Base = std::variant<Cosh, Xi, Poly, Lin>;

  HoloFunction(Base base, Complex factor) : base_(std::move(base)), factor_(factor) {}
  Jet base_jet(Complex z) const;

  Base base_;
  Complex factor_{1.0, 0.0};
};

/// h_{2m} built from the first m zeros of the table. Throws
/// InsufficientZeros when the table is shorter than m, InvalidArgument for
/// m == 0 or a non-positive scale.
HoloFunction build_xi_approx(const ZeroTable& zeros, std::size_t m, double scale);

/// sum over n = -m..m, n != 0 of 1/(z - rho_n). Throws PoleError within
/// pole_epsilon(z) of an included zero.
Complex log_derivative_sum(const ZeroTable& zeros, std::size_t m, Complex z);
Complex log_derivative_sum(std::span<const double> gammas, Complex z);

}  // namespace holoflow
