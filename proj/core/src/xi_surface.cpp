#include "holoflow/xi_surface.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <optional>
#include <thread>
#include <tuple>

#include "holoflow/export.hpp"

namespace holoflow {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

void validate_gammas(std::span<const double> gammas) {
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    if (!(gammas[i] > 0.0) || !std::isfinite(gammas[i]) || (i > 0 && gammas[i] <= gammas[i - 1])) {
      throw InvalidArgument("zero ordinates must be positive, finite and strictly increasing");
    }
  }
}

bool lex_less(Complex a, Complex b) {
  return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
}

}  // namespace

PmPolynomial::PmPolynomial(std::span<const double> gammas, Complex z0, Complex T)
    : gammas_(gammas.begin(), gammas.end()), z0_(z0), T_(T) {
  validate_gammas(gammas_);
  if (!finite(z0) || !finite(T)) throw InvalidArgument("z0 and T must be finite");
  for (double g : gammas_) zeros_.emplace_back(0.5, g);
  for (double g : gammas_) zeros_.emplace_back(0.5, -g);
  const double eps = pole_epsilon(z0);
  log_anchor_ = 0.0;
  for (const Complex& rho : zeros_) {
    if (std::abs(z0 - rho) <= eps) {
      throw DegenerateAnchor("anchor z0 coincides with a zero of the product");
    }
    log_anchor_ += std::log(z0 - rho);
  }
}

PmPolynomial PmPolynomial::from_table(const ZeroTable& zeros, std::size_t m, Complex z0,
                                      Complex T) {
  if (zeros.size() < m) throw InsufficientZeros(m, zeros.size());
  return PmPolynomial(std::span<const double>(zeros.gammas.data(), m), z0, T);
}

PmPolynomial PmPolynomial::at_time(Complex T) const {
  if (!finite(T)) throw InvalidArgument("T must be finite");
  PmPolynomial copy = *this;
  copy.T_ = T;
  return copy;
}

Complex PmPolynomial::anchor_product() const {
  Complex prod = 1.0;
  for (const Complex& rho : zeros_) prod *= z0_ - rho;
  return prod;
}

Complex PmPolynomial::evaluate_direct(Complex z) const {
  // z == z0 gives ratios of exactly 1, so the anchor root is exact at T = 0.
  Complex prod = 1.0;
  if (z != z0_) {
    for (const Complex& rho : zeros_) prod *= (z - rho) / (z0_ - rho);
  }
  return prod - std::exp(-T_);
}

Complex PmPolynomial::log_ratio(Complex z) const {
  if (z == z0_) return 0.0;
  Complex acc = 0.0;
  for (const Complex& rho : zeros_) acc += std::log((z - rho) / (z0_ - rho));
  return acc;
}

Complex PmPolynomial::evaluate_log(Complex z) const {
  const Complex L = log_ratio(z);
  if (!std::isfinite(L.real())) return -std::exp(-T_);  // z is one of the zeros
  // Factor out the larger of the two exponentials so neither overflows
  // before the difference is taken.
  if (L.real() >= -T_.real()) return std::exp(L) * (1.0 - std::exp(-T_ - L));
  return std::exp(-T_) * (std::exp(L + T_) - 1.0);
}

Complex PmPolynomial::evaluate(Complex z) const {
  Complex prod = 1.0;
  bool on_zero = false;
  if (z != z0_) {
    for (const Complex& rho : zeros_) {
      if (z == rho) on_zero = true;
      prod *= (z - rho) / (z0_ - rho);
    }
  }
  const Complex e = std::exp(-T_);
  const bool underflow = prod == Complex(0.0) && !on_zero;
  if (!finite(prod) || underflow || !finite(e)) return evaluate_log(z);
  return prod - e;
}

Complex PmPolynomial::derivative(Complex z) const {
  Complex f = 1.0, df = 0.0;
  for (const Complex& rho : zeros_) {
    const Complex inv = 1.0 / (z0_ - rho);
    df = df * ((z - rho) * inv) + f * inv;
    f *= (z - rho) * inv;
  }
  return df;
}

double PmPolynomial::relative_residual(Complex z) const {
  const Complex L = log_ratio(z);
  if (!std::isfinite(L.real())) return 1.0;
  return std::abs(std::exp(L + T_) - 1.0);
}

std::vector<Complex> PmPolynomial::coefficients() const {
  std::vector<Complex> c{1.0};
  for (double g : gammas_) {
    // (z - 1/2)^2 + g^2 = z^2 - z + (1/4 + g^2)
    const Complex q[3] = {0.25 + g * g, -1.0, 1.0};
    std::vector<Complex> next(c.size() + 2, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) {
      for (std::size_t k = 0; k < 3; ++k) next[i + k] += c[i] * q[k];
    }
    c = std::move(next);
  }
  const Complex inv_anchor = 1.0 / anchor_product();
  for (auto& v : c) v *= inv_anchor;
  c[0] -= std::exp(-T_);
  return c;
}

std::vector<Complex> PmPolynomial::critical_points() const {
  std::vector<Complex> out;
  if (gammas_.empty()) return out;
  // P' vanishes where sum_n 1/((z - 1/2)^2 + g_n^2) * (z - 1/2) = 0. On
  // z = 1/2 + iy this is y = 0 or f(u) = sum_n 1/(g_n^2 - u) = 0 with u = y^2,
  // and f increases from -inf to +inf between consecutive g_k^2.
  std::vector<double> ys;
  for (std::size_t k = 0; k + 1 < gammas_.size(); ++k) {
    double lo = gammas_[k] * gammas_[k];
    double hi = gammas_[k + 1] * gammas_[k + 1];
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      double f = 0.0;
      for (double g : gammas_) f += 1.0 / (g * g - mid);
      (f < 0.0 ? lo : hi) = mid;
    }
    ys.push_back(std::sqrt(0.5 * (lo + hi)));
  }
  for (auto it = ys.rbegin(); it != ys.rend(); ++it) out.emplace_back(0.5, -*it);
  out.emplace_back(0.5, 0.0);
  for (double y : ys) out.emplace_back(0.5, y);
  return out;
}

double PmPolynomial::local_zero_spacing(Complex critical_point) const {
  if (gammas_.empty()) return 1.0;
  const double y = std::abs(critical_point.imag());
  if (y < gammas_.front()) return 2.0 * gammas_.front();
  for (std::size_t k = 0; k + 1 < gammas_.size(); ++k) {
    if (y < gammas_[k + 1]) return gammas_[k + 1] - gammas_[k];
  }
  return gammas_.size() > 1 ? gammas_.back() - gammas_[gammas_.size() - 2] : 2.0 * gammas_.back();
}

PmPolynomial::NewtonStep PmPolynomial::newton_step(Complex z) const {
  // With Q(z) = prod (z - rho) and c = Pi_0 exp(-T): P = (Q - c) / Pi_0,
  // E = c / Q, S = Q'/Q, R = c / Q'. Everything stays in logarithms.
  const Complex log_c = log_anchor_ - T_;
  Complex log_q = 0.0, s = 0.0;
  std::size_t hits = 0;
  for (const Complex& rho : zeros_) {
    const Complex d = z - rho;
    if (d == Complex(0.0)) {
      ++hits;
      continue;
    }
    log_q += std::log(d);
    s += 1.0 / d;
  }
  NewtonStep out;
  if (hits > 1) {
    // Only possible for repeated zeros, which the constructor rules out.
    out.step = Complex(kNaN, kNaN);
    out.scaled_residual = kNaN;
    return out;
  }
  if (hits == 1) {
    // z is a zero of Q: P = -c / Pi_0 and P' = Q'/Pi_0 with Q' = log_q here.
    const Complex R = std::exp(log_c - log_q);
    out.step = -R;
    out.scaled_residual = std::abs(R) / (std::abs(R) + 1.0 + std::abs(z));
    return out;
  }
  const Complex log_e = log_c - log_q;
  const double az = 1.0 + std::abs(z);
  if (log_e.real() <= 0.0) {
    const Complex E = std::exp(log_e);
    const Complex one_minus_e = 1.0 - E;
    out.step = one_minus_e / s;
    out.scaled_residual = std::abs(one_minus_e) / (std::abs(E) + az * std::abs(s));
  } else {
    // |E| > 1: divide through by E so nothing overflows.
    const Complex inv_e = std::exp(-log_e);
    const Complex R = std::exp(log_e - std::log(s));
    out.step = R * (inv_e - 1.0);
    out.scaled_residual = std::abs(inv_e - 1.0) / (1.0 + az * std::abs(s) * std::abs(inv_e));
  }
  if (s == Complex(0.0)) out.step = Complex(kNaN, kNaN);
  return out;
}

namespace {

bool aberth(const PmPolynomial& P, std::vector<Complex>& z, int max_iter) {
  const std::size_t n = z.size();
  const double eps = std::numeric_limits<double>::epsilon();
  std::vector<bool> done(n, false);
  for (int iter = 0; iter < max_iter; ++iter) {
    bool all_done = true;
    for (std::size_t k = 0; k < n; ++k) {
      if (done[k]) continue;
      const auto t = P.newton_step(z[k]);
      if (t.scaled_residual <= 4.0 * eps) {
        done[k] = true;
        continue;
      }
      Complex a = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j != k) a += 1.0 / (z[k] - z[j]);
      }
      // Aberth correction N / (1 - N a) with the Newton step N.
      const Complex w = t.step / (1.0 - t.step * a);
      all_done = false;
      if (!finite(w)) {
        z[k] += Complex(1e-7, -1e-7) * (1.0 + std::abs(z[k]));
        continue;
      }
      z[k] -= w;
      if (std::abs(w) <= 4.0 * eps * (1.0 + std::abs(z[k]))) done[k] = true;
    }
    if (all_done) return true;
  }
  return false;
}

std::optional<std::vector<Complex>> companion_roots(const PmPolynomial& P) {
  const auto c = P.coefficients();
  const auto n = static_cast<Eigen::Index>(c.size() - 1);
  Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
  for (Eigen::Index i = 0; i < n; ++i) comp(i, n - 1) = -c[static_cast<std::size_t>(i)] / c.back();
  if (!comp.allFinite()) return std::nullopt;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(comp, false);
  if (solver.info() != Eigen::Success) return std::nullopt;
  std::vector<Complex> out(solver.eigenvalues().begin(), solver.eigenvalues().end());
  return out;
}

Complex polish(const PmPolynomial& P, Complex z, double target) {
  auto t = P.newton_step(z);
  for (int it = 0; it < 20 && t.scaled_residual > target; ++it) {
    if (!finite(t.step)) break;
    const Complex next = z - t.step;
    const auto tn = P.newton_step(next);
    if (!(tn.scaled_residual < t.scaled_residual)) break;
    z = next;
    t = tn;
  }
  return z;
}

}  // namespace

std::vector<Complex> roots_of_Pm(const PmPolynomial& P, const RootOptions& opts) {
  const std::size_t n = P.degree();
  if (n == 0) throw InvalidArgument("P_m has degree 0; roots need m >= 1");
  // Start on a circle enclosing the zeros and the large-|c| roots, where
  // Q(z) = c with c = Pi_0 exp(-T).
  const Complex log_c = P.log_anchor() - P.time();
  const double radius =
      std::max(P.gammas().back(), std::exp(log_c.real() / static_cast<double>(n))) * 1.1;
  std::vector<Complex> z(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double angle = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(n) + 0.4;
    z[k] = Complex(0.5, 0.0) + std::polar(radius, angle);
  }
  auto acceptable = [&](Complex r) {
    return finite(r) && P.newton_step(r).scaled_residual <= opts.accept;
  };
  if (!aberth(P, z, opts.max_iterations) && !std::all_of(z.begin(), z.end(), acceptable)) {
    if (auto eig = companion_roots(P)) z = std::move(*eig);
  }
  for (auto& r : z) {
    r = polish(P, r, opts.polish_target);
    if (!acceptable(r)) {
      throw NonConvergence("root of P_m not polished below tolerance (scaled residual " +
                           std::to_string(P.newton_step(r).scaled_residual) + ")");
    }
  }
  std::sort(z.begin(), z.end(), lex_less);
  return z;
}

TimeLattice TimeLattice::linspace(double t1_min, double t1_max, std::size_t n1, double t2_min,
                                  double t2_max, std::size_t n2) {
  if (n1 == 0 || n2 == 0) throw InvalidArgument("lattice needs at least one node per axis");
  auto axis = [](double a, double b, std::size_t count) {
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i) {
      v[i] = count == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    return v;
  };
  return {axis(t1_min, t1_max, n1), axis(t2_min, t2_max, n2)};
}

namespace {

Complex log_derivative(const PmPolynomial& P, Complex z) {
  Complex s = 0.0;
  for (const Complex& rho : P.zeros()) s += 1.0 / (z - rho);
  return s;
}

struct Matching {
  std::vector<Complex> matched;
  bool ok = true;
};

// Greedy global matching: pairs are taken by increasing distance between the
// predicted sheet position and a root; ties go to the smaller sheet, then
// the smaller root index.
Matching match_roots(const PmPolynomial& P, const std::vector<Complex>& from, Complex T_from,
                     Complex T_to, const std::vector<Complex>& roots, double max_jump) {
  const std::size_t n = from.size();
  std::vector<Complex> predicted(n);
  const Complex dT = T_to - T_from;
  for (std::size_t s = 0; s < n; ++s) {
    // Along the solution z(T), dz/dT = -1 / sum 1/(z - rho).
    const Complex S = log_derivative(P, from[s]);
    Complex step = (S == Complex(0.0)) ? Complex(0.0) : -dT / S;
    if (!finite(step) || std::abs(step) > max_jump) step = 0.0;
    predicted[s] = from[s] + step;
  }
  std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
  pairs.reserve(n * n);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t r = 0; r < n; ++r) pairs.emplace_back(std::abs(predicted[s] - roots[r]), s, r);
  }
  std::sort(pairs.begin(), pairs.end());
  Matching m;
  m.matched.assign(n, Complex(kNaN, kNaN));
  std::vector<bool> sheet_used(n, false), root_used(n, false);
  for (const auto& [d, s, r] : pairs) {
    if (sheet_used[s] || root_used[r]) continue;
    sheet_used[s] = root_used[r] = true;
    m.matched[s] = roots[r];
    if (d > max_jump) m.ok = false;
  }
  return m;
}

double segment_distance(Complex a, Complex b, Complex p, Complex& closest) {
  const Complex ab = b - a;
  const double len2 = std::norm(ab);
  double t = len2 > 0.0 ? ((p - a) * std::conj(ab)).real() / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  closest = a + t * ab;
  return std::abs(p - closest);
}

void record_branch_events(const PmPolynomial& P, const std::vector<Complex>& crit,
                          double eps_factor, const std::vector<Complex>& from,
                          const std::vector<Complex>& to, Complex T,
                          std::vector<BranchEvent>& events) {
  for (std::size_t s = 0; s < from.size(); ++s) {
    for (const Complex& c : crit) {
      Complex closest;
      const double d = segment_distance(from[s], to[s], c, closest);
      if (d <= eps_factor * P.local_zero_spacing(c)) {
        events.push_back({T, closest, std::abs(P.derivative(closest)), s});
      }
    }
  }
}

std::vector<std::vector<Complex>> solve_nodes(const PmPolynomial& P, const TimeLattice& lattice,
                                              const RootOptions& opts, unsigned threads) {
  const std::size_t count = lattice.size();
  std::vector<std::vector<Complex>> out(count);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t node = next.fetch_add(1);
      if (node >= count) return;
      try {
        out[node] = roots_of_Pm(P.at_time(lattice.time(node)), opts);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
        return;
      }
    }
  };
  const unsigned n_threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace

SurfaceGrid trace_surface(std::span<const double> gammas, Complex z0, const TimeLattice& lattice,
                          const ContinuationOptions& opts) {
  if (gammas.empty()) throw InvalidArgument("surface tracing needs m >= 1");
  if (lattice.tau1.empty() || lattice.tau2.empty()) {
    throw InvalidArgument("time lattice needs at least one node");
  }
  for (double v : lattice.tau1) {
    if (!std::isfinite(v)) throw InvalidArgument("time lattice entries must be finite");
  }
  for (double v : lattice.tau2) {
    if (!std::isfinite(v)) throw InvalidArgument("time lattice entries must be finite");
  }
  const PmPolynomial P(gammas, z0);

  double max_jump = opts.max_jump;
  if (!(max_jump > 0.0)) {
    double min_gap = 2.0 * gammas.front();
    for (std::size_t k = 1; k < gammas.size(); ++k) min_gap = std::min(min_gap, gammas[k] - gammas[k - 1]);
    max_jump = 0.5 * min_gap;
  }

  SurfaceGrid grid;
  grid.m = gammas.size();
  grid.z0 = z0;
  grid.log_anchor = P.log_anchor();
  grid.zeros = P.zeros();
  grid.lattice = lattice;
  const std::size_t n_sheets = P.degree();
  const std::size_t n1 = lattice.tau1.size(), n2 = lattice.tau2.size();
  grid.sheets.assign(n_sheets, std::vector<Complex>(lattice.size(), Complex(kNaN, kNaN)));

  const auto node_roots = solve_nodes(P, lattice, opts.roots, opts.threads);
  const auto crit = P.critical_points();

  std::size_t start = 0;
  for (std::size_t node = 1; node < lattice.size(); ++node) {
    if (std::abs(lattice.time(node)) < std::abs(lattice.time(start))) start = node;
  }
  {
    std::vector<Complex> first = node_roots[start];
    const auto nearest = std::min_element(first.begin(), first.end(), [&](Complex a, Complex b) {
      return std::abs(a - z0) < std::abs(b - z0);
    });
    std::rotate(first.begin(), nearest, nearest + 1);
    for (std::size_t s = 0; s < n_sheets; ++s) grid.sheets[s][start] = first[s];
  }

  auto sheet_values = [&](std::size_t node) {
    std::vector<Complex> v(n_sheets);
    for (std::size_t s = 0; s < n_sheets; ++s) v[s] = grid.sheets[s][node];
    return v;
  };

  auto continue_edge = [&](std::size_t parent, std::size_t child) {
    const Complex T0 = lattice.time(parent), T1 = lattice.time(child);
    const auto from = sheet_values(parent);
    Matching direct = match_roots(P, from, T0, T1, node_roots[child], max_jump);
    if (direct.ok) {
      record_branch_events(P, crit, opts.branch_eps_factor, from, direct.matched, T1,
                           grid.branch_events);
    } else {
      // One bisection of the offending edge before giving up.
      const Complex Tm = 0.5 * (T0 + T1);
      const auto mid_roots = roots_of_Pm(P.at_time(Tm), opts.roots);
      Matching half = match_roots(P, from, T0, Tm, mid_roots, max_jump);
      Matching rest = half.ok ? match_roots(P, half.matched, Tm, T1, node_roots[child], max_jump)
                              : Matching{{}, false};
      if (!half.ok || !rest.ok) throw ContinuationBreak(child, grid);
      record_branch_events(P, crit, opts.branch_eps_factor, from, half.matched, Tm,
                           grid.branch_events);
      record_branch_events(P, crit, opts.branch_eps_factor, half.matched, rest.matched, T1,
                           grid.branch_events);
      direct = std::move(rest);
    }
    for (std::size_t s = 0; s < n_sheets; ++s) grid.sheets[s][child] = direct.matched[s];
  };

  const std::size_t j0 = start % n1, k0 = start / n1;
  for (std::size_t j = j0 + 1; j < n1; ++j) continue_edge(lattice.node(j - 1, k0), lattice.node(j, k0));
  for (std::size_t j = j0; j-- > 0;) continue_edge(lattice.node(j + 1, k0), lattice.node(j, k0));
  for (std::size_t j = 0; j < n1; ++j) {
    for (std::size_t k = k0 + 1; k < n2; ++k) continue_edge(lattice.node(j, k - 1), lattice.node(j, k));
    for (std::size_t k = k0; k-- > 0;) continue_edge(lattice.node(j, k + 1), lattice.node(j, k));
  }
  grid.complete = true;
  return grid;
}

SurfaceGrid trace_surface(const ZeroTable& zeros, std::size_t m, Complex z0,
                          const TimeLattice& lattice, const ContinuationOptions& opts) {
  if (m == 0) throw InvalidArgument("surface tracing needs m >= 1");
  if (zeros.size() < m) throw InsufficientZeros(m, zeros.size());
  return trace_surface(std::span<const double>(zeros.gammas.data(), m), z0, lattice, opts);
}

double verify_constant_phase(const SurfaceGrid& grid) {
  if (grid.sheets.empty() || grid.lattice.size() == 0) return 0.0;
  double worst = 0.0;
  for (const auto& sheet : grid.sheets) {
    for (std::size_t node = 0; node < sheet.size() && node < grid.lattice.size(); ++node) {
      const Complex z = sheet[node];
      if (!finite(z)) continue;
      Complex L = 0.0;
      bool on_zero = false;
      for (const Complex& rho : grid.zeros) {
        if (z == rho) on_zero = true;
        L += std::log((z - rho) / (grid.z0 - rho));
      }
      const double r = on_zero ? 1.0 : std::abs(std::exp(L + grid.lattice.time(node)) - 1.0);
      worst = std::max(worst, r);
    }
  }
  return worst;
}

Complex eval_Pm_zp(const ZeroTable& zeros, std::size_t m, Complex z, Complex p, Complex z0,
                   Complex p0) {
  Complex at_z = 1.0, at_z0 = 1.0;
  for (const Complex& rho : zeros.symmetric_zeros(m)) {
    at_z *= z - rho;
    at_z0 *= z0 - rho;
  }
  return p * at_z - p0 * at_z0;
}

nlohmann::json surface_to_json(const SurfaceGrid& grid) {
  using nlohmann::json;
  json j;
  j["z0"] = complex_to_json(grid.z0);
  j["m"] = grid.m;
  json gam = json::array();
  for (std::size_t n = 0; n < grid.m && n < grid.zeros.size(); ++n) gam.push_back(grid.zeros[n].imag());
  j["gammas"] = gam;
  j["lattice"] = {{"tau1", grid.lattice.tau1}, {"tau2", grid.lattice.tau2}};
  json sheets = json::array();
  for (const auto& sheet : grid.sheets) {
    json s = json::array();
    for (const Complex& z : sheet) s.push_back(finite(z) ? complex_to_json(z) : json(nullptr));
    sheets.push_back(std::move(s));
  }
  j["sheets"] = std::move(sheets);
  json events = json::array();
  for (const auto& e : grid.branch_events) {
    events.push_back({{"T", complex_to_json(e.T)},
                      {"z", complex_to_json(e.z)},
                      {"min_dp", e.min_dp},
                      {"sheet", e.sheet}});
  }
  j["branch_events"] = std::move(events);
  j["complete"] = grid.complete;
  return j;
}

SurfaceGrid surface_from_json(const nlohmann::json& j) {
  try {
    SurfaceGrid grid;
    grid.z0 = complex_from_json(j.at("z0"));
    grid.m = j.at("m").get<std::size_t>();
    const auto gammas = j.at("gammas").get<std::vector<double>>();
    if (gammas.size() != grid.m) throw InvalidArgument("surface JSON: gammas do not match m");
    const PmPolynomial P(gammas, grid.z0);
    grid.zeros = P.zeros();
    grid.log_anchor = P.log_anchor();
    grid.lattice.tau1 = j.at("lattice").at("tau1").get<std::vector<double>>();
    grid.lattice.tau2 = j.at("lattice").at("tau2").get<std::vector<double>>();
    for (const auto& s : j.at("sheets")) {
      std::vector<Complex> sheet;
      for (const auto& z : s) sheet.push_back(z.is_null() ? Complex(kNaN, kNaN) : complex_from_json(z));
      if (sheet.size() != grid.lattice.size()) {
        throw InvalidArgument("surface JSON: sheet length does not match the lattice");
      }
      grid.sheets.push_back(std::move(sheet));
    }
    for (const auto& e : j.at("branch_events")) {
      grid.branch_events.push_back({complex_from_json(e.at("T")), complex_from_json(e.at("z")),
                                    e.at("min_dp").get<double>(), e.at("sheet").get<std::size_t>()});
    }
    grid.complete = j.value("complete", false);
    return grid;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("surface JSON: ") + e.what());
  }
}

}  // namespace holoflow
