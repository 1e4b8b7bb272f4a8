#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <holoflow/checks.hpp>
#include <holoflow/types.hpp>

namespace holoflow::cli {

struct Polyline {
  std::vector<Complex> points;
  std::string stroke = "#1f4e79";
};

struct Marker {
  Complex at;
  std::string fill = "#c0392b";
};

// Quick-look rendering only. Polylines are cut where they leave the window.
void write_svg(std::ostream& out, const Window& window, const std::vector<Polyline>& lines,
               const std::vector<Marker>& markers, const std::string& title);

}  // namespace holoflow::cli
