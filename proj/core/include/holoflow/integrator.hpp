#pragma once

// Embedded Dormand-Prince 5(4) pair with PI step-size control for complex
// state vectors, integrated along a real arc parameter s.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>

#include "holoflow/types.hpp"

namespace holoflow {

enum class IntegrationStatus { Completed, Stopped, StepUnderflow, TooManySteps };

template <std::size_t N>
class Dopri5 {
 public:
  using State = std::array<Complex, N>;
  using Rhs = std::function<State(double, const State&)>;

  struct Outcome {
    IntegrationStatus status = IntegrationStatus::Completed;
    double s = 0.0;
    State y{};
    std::size_t accepted = 0;
    std::size_t rejected = 0;
  };

  Dopri5(Rhs rhs, Tolerance tol, double min_step_fraction = 1e-14,
         std::size_t max_steps = 2'000'000)
      : rhs_(std::move(rhs)),
        tol_(tol),
        min_step_fraction_(min_step_fraction),
        max_steps_(max_steps) {}

  const Tolerance& tolerance() const noexcept { return tol_; }

  /// Upper bound on the step size; non-positive means unbounded.
  void set_max_step(double h_max) noexcept {
    max_step_ = h_max > 0.0 ? h_max : std::numeric_limits<double>::infinity();
  }

  /// One fifth-order step of size h from (s, y); no error control.
  State step(double s, const State& y, double h) const {
    State err;
    return step_with_error(s, y, rhs_(s, y), h, err, nullptr);
  }

  /// Integrates from s0 to s1 >= s0. The observer is called after each
  /// accepted step as obs(s_prev, y_prev, s, y) and may return false to stop.
  /// Every value in `stops` (ascending, inside (s0, s1]) is hit exactly by a
  /// step end.
  template <class Observer>
  Outcome integrate(double s0, const State& y0, double s1, Observer&& obs,
                    std::span<const double> stops = {}) const {
    Outcome out;
    out.s = s0;
    out.y = y0;
    const double span = s1 - s0;
    if (!(span > 0.0)) return out;

    const double s_min = min_step_fraction_ * span;
    State k1 = rhs_(s0, y0);
    double h = initial_step(s0, y0, k1, span);
    double err_old = 1e-4;
    bool last_rejected = false;
    std::size_t next_stop = 0;
    while (next_stop < stops.size() && stops[next_stop] <= s0) ++next_stop;

    double s = s0;
    State y = y0;
    while (s < s1) {
      if (out.accepted + out.rejected >= max_steps_) {
        out.status = IntegrationStatus::TooManySteps;
        break;
      }
      double target = s1;
      if (next_stop < stops.size() && stops[next_stop] < s1) target = stops[next_stop];
      double h_try = std::min(h, max_step_);
      bool lands = false;
      // Absorb a leftover too small to take as a step of its own.
      const double slack = std::max({1e-12 * h_try, 2.0 * s_min,
                                     8.0 * std::numeric_limits<double>::epsilon() * std::abs(target)});
      if (s + h_try >= target || target - (s + h_try) < slack) {
        h_try = target - s;
        lands = true;
      }
      if (h_try < s_min || s + h_try == s) {
        out.status = IntegrationStatus::StepUnderflow;
        break;
      }

      State err_vec;
      State k7;
      State y_new = step_with_error(s, y, k1, h_try, err_vec, &k7);
      const double err = error_norm(y, y_new, err_vec);

      if (!(err <= 1.0)) {
        ++out.rejected;
        const double fac = std::isfinite(err) ? std::max(0.2, kSafety * std::pow(err, -0.2)) : 0.2;
        h = h_try * fac;
        last_rejected = true;
        continue;
      }

      ++out.accepted;
      const double s_new = lands ? target : s + h_try;
      const bool keep_going = obs(s, y, s_new, y_new);
      s = s_new;
      y = y_new;
      k1 = k7;
      if (lands && target != s1) ++next_stop;
      if (!keep_going) {
        out.status = IntegrationStatus::Stopped;
        break;
      }

      double fac = kSafety * std::pow(std::max(err, 1e-10), -kAlpha) * std::pow(err_old, kBeta);
      fac = std::clamp(fac, 0.2, 10.0);
      if (last_rejected) fac = std::min(fac, 1.0);
      err_old = std::max(err, 1e-4);
      last_rejected = false;
      // A step shortened to land on a stop does not reflect the controller's choice.
      h = lands ? std::max(h, h_try * fac) : h_try * fac;
    }
    out.s = s;
    out.y = y;
    return out;
  }

 private:
  static constexpr double kSafety = 0.9;
  static constexpr double kAlpha = 0.7 / 5.0;
  static constexpr double kBeta = 0.4 / 5.0;

  static bool finite(const State& y) {
    for (const auto& v : y) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    }
    return true;
  }

  double error_norm(const State& y, const State& y_new, const State& err) const {
    if (!finite(y_new) || !finite(err)) return std::numeric_limits<double>::infinity();
    double worst = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sc = tol_.abs + tol_.rel * std::max(std::abs(y[i]), std::abs(y_new[i]));
      worst = std::max(worst, std::abs(err[i]) / sc);
    }
    return worst;
  }

  double initial_step(double s0, const State& y0, const State& f0, double span) const {
    auto rms = [&](const State& v, const State& ref) {
      double acc = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        const double sc = tol_.abs + tol_.rel * std::abs(ref[i]);
        acc += std::norm(v[i]) / (sc * sc);
      }
      return std::sqrt(acc / N);
    };
    const double d0 = rms(y0, y0);
    const double d1 = rms(f0, y0);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    State y1;
    for (std::size_t i = 0; i < N; ++i) y1[i] = y0[i] + h0 * f0[i];
    const State f1 = rhs_(s0 + h0, y1);
    State df;
    for (std::size_t i = 0; i < N; ++i) df[i] = f1[i] - f0[i];
    const double d2 = finite(f1) ? rms(df, y0) / h0 : std::numeric_limits<double>::infinity();
    const double dmax = std::max(d1, d2);
    const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
    return std::min({100.0 * h0, h1, span});
  }

  State step_with_error(double s, const State& y, const State& k1, double h, State& err,
                        State* k7_out) const {
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                     b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                     e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    State tmp;
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * a21 * k1[i];
    const State k2 = rhs_(s + c2 * h, tmp);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    const State k3 = rhs_(s + c3 * h, tmp);
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    const State k4 = rhs_(s + c4 * h, tmp);
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    const State k5 = rhs_(s + c5 * h, tmp);
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    const State k6 = rhs_(s + h, tmp);
    State y_new;
    for (std::size_t i = 0; i < N; ++i)
      y_new[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    const State k7 = rhs_(s + h, y_new);
    for (std::size_t i = 0; i < N; ++i)
      err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    if (k7_out != nullptr) *k7_out = k7;
    return y_new;
  }

  Rhs rhs_;
  Tolerance tol_;
  double min_step_fraction_;
  std::size_t max_steps_;
  double max_step_ = std::numeric_limits<double>::infinity();
};

}  // namespace holoflow
