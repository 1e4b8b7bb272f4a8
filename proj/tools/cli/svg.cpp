#include "svg.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace holoflow::cli {

namespace {

constexpr double kWidth = 800.0;
constexpr double kMargin = 20.0;

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

void write_svg(std::ostream& out, const Window& w, const std::vector<Polyline>& lines,
               const std::vector<Marker>& markers, const std::string& title) {
  const double dx = w.re_max - w.re_min;
  const double dy = w.im_max - w.im_min;
  const double scale = (kWidth - 2 * kMargin) / dx;
  const double height = dy * scale + 2 * kMargin;
  auto px = [&](Complex z) { return kMargin + (z.real() - w.re_min) * scale; };
  // SVG y grows downwards
  auto py = [&](Complex z) { return kMargin + (w.im_max - z.imag()) * scale; };
  auto inside = [&](Complex z) {
    const double sx = 0.02 * dx, sy = 0.02 * dy;
    return z.real() >= w.re_min - sx && z.real() <= w.re_max + sx && z.imag() >= w.im_min - sy &&
           z.imag() <= w.im_max + sy;
  };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(kWidth) << "\" height=\""
      << fmt(height) << "\" viewBox=\"0 0 " << fmt(kWidth) << ' ' << fmt(height) << "\">\n";
  out << "<title>" << xml_escape(title) << "</title>\n";
  out << "<rect x=\"" << fmt(kMargin) << "\" y=\"" << fmt(kMargin) << "\" width=\"" << fmt(dx * scale)
      << "\" height=\"" << fmt(dy * scale) << "\" fill=\"white\" stroke=\"#888\"/>\n";

  for (const auto& line : lines) {
    std::string pts;
    std::size_t count = 0;
    auto flush = [&] {
      if (count >= 2) {
        out << "<polyline fill=\"none\" stroke=\"" << line.stroke << "\" stroke-width=\"0.8\" points=\""
            << pts << "\"/>\n";
      }
      pts.clear();
      count = 0;
    };
    for (Complex z : line.points) {
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag()) || !inside(z)) {
        flush();
        continue;
      }
      if (count > 0) pts += ' ';
      pts += fmt(px(z)) + ',' + fmt(py(z));
      ++count;
    }
    flush();
  }
  for (const auto& m : markers) {
    if (!inside(m.at)) continue;
    out << "<circle cx=\"" << fmt(px(m.at)) << "\" cy=\"" << fmt(py(m.at)) << "\" r=\"2.5\" fill=\""
        << m.fill << "\"/>\n";
  }
  out << "</svg>\n";
}

}  // namespace holoflow::cli
