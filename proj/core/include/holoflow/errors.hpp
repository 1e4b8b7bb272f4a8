#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include "holoflow/types.hpp"

namespace holoflow {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Zero-table line that is not a positive decimal. `line` is 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class MonotonicityError : public Error {
 public:
  explicit MonotonicityError(std::size_t line)
      : Error("line " + std::to_string(line) + ": zero table is not strictly increasing"),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class InsufficientZeros : public Error {
 public:
  InsufficientZeros(std::size_t wanted, std::size_t available)
      : Error("need " + std::to_string(wanted) + " zeros, table has " +
              std::to_string(available)),
        wanted_(wanted),
        available_(available) {}
  std::size_t wanted() const noexcept { return wanted_; }
  std::size_t available() const noexcept { return available_; }

 private:
  std::size_t wanted_;
  std::size_t available_;
};

// Evaluation point too close to a zero of the product (a pole of h'/h).
class PoleError : public Error {
 public:
  using Error::Error;
};

// |h(z)| vanishes where the momentum/Delta p closed forms divide by it.
class MomentumPole : public Error {
 public:
  using Error::Error;
};

// |h(z0)| vanishes where the sensitivity closed form divides by it.
class AnchorPole : public Error {
 public:
  using Error::Error;
};

class CriticalPointAbort : public Error {
 public:
  CriticalPointAbort(Complex z, double dh_abs)
      : Error("h'(z) vanishes near z = (" + std::to_string(z.real()) + ", " +
              std::to_string(z.imag()) + "), |h'| = " + std::to_string(dh_abs)),
        z_(z),
        dh_abs_(dh_abs) {}
  Complex z() const noexcept { return z_; }
  double derivative_modulus() const noexcept { return dh_abs_; }

 private:
  Complex z_;
  double dh_abs_;
};

class Inconclusive : public Error {
 public:
  using Error::Error;
};

class NoReturn : public Error {
 public:
  using Error::Error;
};

class NotASimpleRoot : public Error {
 public:
  using Error::Error;
};

class DegenerateAnchor : public Error {
 public:
  using Error::Error;
};

class NonConvergence : public Error {
 public:
  using Error::Error;
};

class MetricSingular : public Error {
 public:
  using Error::Error;
};

class NonHolomorphicField : public Error {
 public:
  using Error::Error;
};

}  // namespace holoflow
