#include "holoflow/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "holoflow/errors.hpp"

namespace holoflow {

namespace {

Complex nonsingular_h(const HoloFunction& h, Complex z) {
  const Complex v = h.value(z);
  if (!(std::abs(v) > pole_epsilon(z)) || !std::isfinite(std::abs(v))) {
    throw MetricSingular("metric is singular where h vanishes");
  }
  return v;
}

Vec2 mul(const Mat2& m, const Vec2& v) {
  return {m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]};
}

Vec2 split(Complex w) { return {w.real(), w.imag()}; }

Mat2 raw_jacobian(const RawField& X, Complex z, Vec2& value) {
  const double x = z.real(), y = z.imag();
  const double step = 1e-5 * (1.0 + std::abs(z));
  const Vec2 xp = X.components(x + step, y), xm = X.components(x - step, y);
  const Vec2 yp = X.components(x, y + step), ym = X.components(x, y - step);
  value = X.components(x, y);
  Mat2 J;
  for (int r = 0; r < 2; ++r) {
    J[r][0] = (xp[r] - xm[r]) / (2.0 * step);
    J[r][1] = (yp[r] - ym[r]) / (2.0 * step);
  }
  const double size = 1.0 + std::max({std::abs(J[0][0]), std::abs(J[0][1]), std::abs(J[1][0]),
                                      std::abs(J[1][1])});
  const double cr = std::max(std::abs(J[0][0] - J[1][1]), std::abs(J[0][1] + J[1][0]));
  if (cr > 1e-8 * size) {
    throw NonHolomorphicField("vector field violates the Cauchy-Riemann relations");
  }
  return J;
}

}  // namespace

Mat2 holomorphic_jacobian(Complex d) {
  return Mat2{Vec2{d.real(), -d.imag()}, Vec2{d.imag(), d.real()}};
}

double lagrangian(const HoloFunction& h, Complex z, const TangentVector& v) {
  const Complex hz = nonsingular_h(h, z);
  return (v.v1 * v.v1 + v.v2 * v.v2) / (2.0 * std::norm(hz));
}

MetricFrame metric_frame(const HoloFunction& h, Complex z) {
  const Jet j = h.jet(z);
  if (!(std::abs(j.f) > pole_epsilon(z)) || !std::isfinite(std::abs(j.f))) {
    throw MetricSingular("metric is singular where h vanishes");
  }
  const double h1 = j.f.real(), h2 = j.f.imag();
  const double n = h1 * h1 + h2 * h2;
  // Cauchy-Riemann: dh1/dz1 = Re h', dh1/dz2 = -Im h', dh2/dz1 = Im h', dh2/dz2 = Re h'.
  const double a = j.df.real(), b = j.df.imag();
  const double m1 = h1 * a + h2 * b;
  const double m2 = -h1 * b + h2 * a;

  MetricFrame f;
  f.z = z;
  f.h = j.f;
  f.g11 = f.g22 = 1.0 / n;
  f.ginv11 = f.ginv22 = n;
  f.gamma1 = Mat2{Vec2{-m1 / n, -m2 / n}, Vec2{-m2 / n, m1 / n}};
  f.gamma2 = Mat2{Vec2{m2 / n, -m1 / n}, Vec2{-m1 / n, -m2 / n}};
  return f;
}

TangentVector covariant_derivative(const HoloFunction& h, const VectorFieldSpec& X,
                                   Direction direction, Complex z) {
  const Jet jh = h.jet(z);
  if (!(std::abs(jh.f) > pole_epsilon(z)) || !std::isfinite(std::abs(jh.f))) {
    throw MetricSingular("metric is singular where h vanishes");
  }
  const Mat2 Jh = holomorphic_jacobian(jh.df);
  const Vec2 hv = split(jh.f);

  Mat2 JX;
  Vec2 xv;
  if (const auto* s = std::get_if<HoloSplit>(&X)) {
    const Jet jg = s->g.jet(z);
    JX = holomorphic_jacobian(jg.df);
    xv = split(jg.f);
  } else if (const auto* c = std::get_if<LinearComb>(&X)) {
    const Mat2 A{Vec2{c->a, -c->b}, Vec2{c->b, c->a}};
    // J_{A h} = A J_h
    for (int r = 0; r < 2; ++r) {
      for (int col = 0; col < 2; ++col) JX[r][col] = A[r][0] * Jh[0][col] + A[r][1] * Jh[1][col];
    }
    xv = mul(A, hv);
  } else {
    JX = raw_jacobian(std::get<RawField>(X), z, xv);
  }

  const Vec2 a = mul(JX, hv);
  const Vec2 b = mul(Jh, xv);
  const Vec2 d{a[0] - b[0], a[1] - b[1]};
  if (direction == Direction::AlongH) return {d[0], d[1]};
  return {-d[1], d[0]};
}

double parallel_residual_scale(const HoloFunction& h, Complex z) {
  const Jet j = h.jet(z);
  return 1.0 + std::abs(j.df) * std::abs(j.f);
}

double check_parallel_sensitivity(const HoloFunction& h, Complex z0, Complex dz0,
                                  std::span<const Complex> sample_points) {
  const Complex h0 = h.value(z0);
  if (!(std::abs(h0) > pole_epsilon(z0))) throw AnchorPole("h(z0) vanishes at the anchor");
  const Complex c = dz0 / h0;
  const VectorFieldSpec X = LinearComb{c.real(), c.imag()};
  double worst = 0.0;
  for (const Complex& z : sample_points) {
    for (Direction d : {Direction::AlongH, Direction::AlongIH}) {
      worst = std::max(worst, covariant_derivative(h, X, d, z).norm());
    }
  }
  return worst;
}

double curvature_flatness_check(const HoloFunction& h, Complex z, double fd_step) {
  const double step = fd_step > 0.0 ? fd_step : 1e-5 * (1.0 + std::abs(z));
  for (const Complex& root : h.known_roots()) {
    if (std::abs(z - root) < 10.0 * step) {
      throw MetricSingular("curvature stencil reaches a zero of h");
    }
  }
  const MetricFrame f0 = metric_frame(h, z);
  // dG[i] = partial derivative along z_{i+1} of the Christoffel array
  std::array<std::array<Mat2, 2>, 2> dG{};  // dG[i][l][j][k] = d_i Gamma^l_{jk}
  const Complex offsets[2] = {Complex(step, 0.0), Complex(0.0, step)};
  for (int i = 0; i < 2; ++i) {
    const MetricFrame fp = metric_frame(h, z + offsets[i]);
    const MetricFrame fm = metric_frame(h, z - offsets[i]);
    for (int l = 0; l < 2; ++l) {
      for (int j = 0; j < 2; ++j) {
        for (int k = 0; k < 2; ++k) {
          dG[i][l][j][k] = (fp.gamma(l)[j][k] - fm.gamma(l)[j][k]) / (2.0 * step);
        }
      }
    }
  }
  double worst = 0.0;
  for (int l = 0; l < 2; ++l) {
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        for (int k = 0; k < 2; ++k) {
          double r = dG[i][l][j][k] - dG[j][l][i][k];
          for (int m = 0; m < 2; ++m) {
            r += f0.gamma(l)[i][m] * f0.gamma(m)[j][k] - f0.gamma(l)[j][m] * f0.gamma(m)[i][k];
          }
          worst = std::max(worst, std::abs(r));
        }
      }
    }
  }
  return worst;
}

std::vector<TimeChartSample> trivialize_in_time_chart(const HoloFunction& h,
                                                      const Trajectory& trajectory) {
  std::vector<TimeChartSample> out;
  out.reserve(trajectory.samples.size());
  for (const auto& s : trajectory.samples) {
    const Complex hz = nonsingular_h(h, s.z);
    const Complex ih = kI * hz;
    const double scale = 2.0 * std::norm(hz);
    auto inner = [&](Complex v, Complex w) { return (v.real() * w.real() + v.imag() * w.imag()) / scale; };
    out.push_back({s.z, inner(hz, hz), inner(hz, ih), inner(ih, ih)});
  }
  return out;
}

}  // namespace holoflow
