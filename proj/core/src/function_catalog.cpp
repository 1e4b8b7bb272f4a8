#include "holoflow/function_catalog.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>
#include <string_view>

#include "holoflow/errors.hpp"

namespace holoflow {

namespace {

std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\f\v";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(ws);
  return s.substr(first, last - first + 1);
}

// Product-rule accumulation of jets: (f g)' = f'g + f g', (f g)'' = f''g + 2f'g' + f g''.
Jet multiply(const Jet& a, const Jet& b) {
  return {a.f * b.f, a.df * b.f + a.f * b.df, a.d2f * b.f + 2.0 * a.df * b.df + a.f * b.d2f};
}

Jet scale(const Jet& j, Complex c) { return {c * j.f, c * j.df, c * j.d2f}; }

}  // namespace

std::vector<Complex> ZeroTable::symmetric_zeros(std::size_t m) const {
  if (m > gammas.size()) throw InsufficientZeros(m, gammas.size());
  std::vector<Complex> out;
  out.reserve(2 * m);
  for (std::size_t n = 0; n < m; ++n) out.emplace_back(0.5, gammas[n]);
  for (std::size_t n = 0; n < m; ++n) out.emplace_back(0.5, -gammas[n]);
  return out;
}

ZeroTable parse_zero_table(std::istream& in, std::string source) {
  ZeroTable table;
  table.source = std::move(source);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    double value = 0.0;
    const auto* begin = line.data();
    const auto* end = line.data() + line.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value, std::chars_format::general);
    if (ec != std::errc{} || ptr != end) {
      throw ParseError(line_no, "not a decimal number: '" + std::string(line) + "'");
    }
    if (!std::isfinite(value) || value <= 0.0) {
      throw ParseError(line_no, "zero ordinates must be positive and finite");
    }
    if (!table.gammas.empty() && value <= table.gammas.back()) {
      throw MonotonicityError(line_no);
    }
    table.gammas.push_back(value);
  }
  if (in.bad()) throw IoError("read failure in " + table.source);
  return table;
}

ZeroTable load_zero_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open zero table " + path.string());
  return parse_zero_table(in, path.string());
}

const char* to_string(HoloKind kind) {
  switch (kind) {
    case HoloKind::CoshShift:
      return "cosh";
    case HoloKind::XiApprox:
      return "xi-approx";
    case HoloKind::GenericPoly:
      return "polynomial";
    case HoloKind::Linear:
      return "linear";
  }
  return "unknown";
}

HoloFunction HoloFunction::cosh_shift() { return HoloFunction(Cosh{}, 1.0); }

HoloFunction HoloFunction::linear(Complex a) { return HoloFunction(Lin{}, a); }

HoloFunction HoloFunction::polynomial(std::vector<Complex> coeffs) {
  return HoloFunction(Poly{std::move(coeffs)}, 1.0);
}

HoloFunction HoloFunction::xi_approx(std::span<const double> gammas, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw InvalidArgument("xi-approximating polynomial needs a positive finite scale");
  }
  if (gammas.empty()) throw InvalidArgument("xi-approximating polynomial needs m >= 1");
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    if (!(gammas[i] > 0.0) || (i > 0 && gammas[i] <= gammas[i - 1])) {
      throw InvalidArgument("zero ordinates must be positive and strictly increasing");
    }
  }
  return HoloFunction(Xi{std::vector<double>(gammas.begin(), gammas.end())}, scale);
}

HoloKind HoloFunction::kind() const noexcept {
  switch (base_.index()) {
    case 0:
      return HoloKind::CoshShift;
    case 1:
      return HoloKind::XiApprox;
    case 2:
      return HoloKind::GenericPoly;
    default:
      return HoloKind::Linear;
  }
}

HoloFunction HoloFunction::times(Complex c) const { return HoloFunction(base_, factor_ * c); }

Jet HoloFunction::base_jet(Complex z) const {
  struct Visitor {
    Complex z;
    Jet operator()(const Cosh&) const {
      const Complex w = z - 0.5;
      const Complex c = std::cosh(w);
      return {c, std::sinh(w), c};
    }
    Jet operator()(const Xi& xi) const {
      // Conjugate pairs are combined into real quadratics
      // ((z - 1/2)^2 + gamma^2) / (1/4 + gamma^2).
      const Complex w = z - 0.5;
      Jet acc{1.0, 0.0, 0.0};
      for (double g : xi.gammas) {
        const double norm = 0.25 + g * g;
        const Jet pair{(w * w + g * g) / norm, 2.0 * w / norm, Complex(2.0 / norm)};
        acc = multiply(acc, pair);
      }
      return acc;
    }
    Jet operator()(const Poly& p) const {
      Complex f = 0.0, df = 0.0, d2f = 0.0;
      for (auto it = p.coeffs.rbegin(); it != p.coeffs.rend(); ++it) {
        d2f = d2f * z + 2.0 * df;
        df = df * z + f;
        f = f * z + *it;
      }
      return {f, df, d2f};
    }
    Jet operator()(const Lin&) const { return {z, 1.0, 0.0}; }
  };
  return std::visit(Visitor{z}, base_);
}

Jet HoloFunction::jet(Complex z) const { return scale(base_jet(z), factor_); }

Complex HoloFunction::value(Complex z) const { return jet(z).f; }
Complex HoloFunction::derivative(Complex z) const { return jet(z).df; }
Complex HoloFunction::second_derivative(Complex z) const { return jet(z).d2f; }

Evaluation HoloFunction::eval(Complex z, int order) const {
  if (order < 0 || order > 2) throw InvalidArgument("derivative order must be 0, 1 or 2");
  const Jet j = jet(z);
  const Complex v = order == 0 ? j.f : (order == 1 ? j.df : j.d2f);
  const bool finite = std::isfinite(v.real()) && std::isfinite(v.imag());
  return {v, !finite};
}

std::size_t HoloFunction::pair_count() const noexcept {
  if (const auto* xi = std::get_if<Xi>(&base_)) return xi->gammas.size();
  return 0;
}

std::span<const double> HoloFunction::gammas() const noexcept {
  if (const auto* xi = std::get_if<Xi>(&base_)) return xi->gammas;
  return {};
}

std::vector<Complex> HoloFunction::known_roots() const {
  std::vector<Complex> roots;
  if (const auto* xi = std::get_if<Xi>(&base_)) {
    for (double g : xi->gammas) roots.emplace_back(0.5, g);
    for (double g : xi->gammas) roots.emplace_back(0.5, -g);
  } else if (std::holds_alternative<Lin>(base_) && factor_ != Complex(0.0)) {
    roots.emplace_back(0.0, 0.0);
  }
  return roots;
}

std::string HoloFunction::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << to_string(kind());
  if (kind() == HoloKind::XiApprox) os << "(m=" << pair_count() << ")";
  if (kind() == HoloKind::GenericPoly) {
    const auto& c = std::get<Poly>(base_).coeffs;
    os << "(degree=" << (c.empty() ? 0 : c.size() - 1) << ")";
  }
  os << " factor=(" << factor_.real() << "," << factor_.imag() << ")";
  return os.str();
}

HoloFunction build_xi_approx(const ZeroTable& zeros, std::size_t m, double scale) {
  if (m == 0) throw InvalidArgument("xi-approximating polynomial needs m >= 1");
  if (zeros.size() < m) throw InsufficientZeros(m, zeros.size());
  return HoloFunction::xi_approx(std::span<const double>(zeros.gammas.data(), m), scale);
}

Complex log_derivative_sum(std::span<const double> gammas, Complex z) {
  const double eps = pole_epsilon(z);
  Complex sum = 0.0;
  for (double g : gammas) {
    const Complex up = z - Complex(0.5, g);
    const Complex down = z - Complex(0.5, -g);
    if (std::abs(up) < eps || std::abs(down) < eps) {
      throw PoleError("log-derivative sum evaluated on a zero (gamma = " + std::to_string(g) +
                      ")");
    }
    sum += 1.0 / up + 1.0 / down;
  }
  return sum;
}

Complex log_derivative_sum(const ZeroTable& zeros, std::size_t m, Complex z) {
  if (zeros.size() < m) throw InsufficientZeros(m, zeros.size());
  return log_derivative_sum(std::span<const double>(zeros.gammas.data(), m), z);
}

}  // namespace holoflow
