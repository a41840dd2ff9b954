#pragma once

#include <array>
#include <string>
#include <vector>

#include "formset/invariants.hpp"

namespace formset {

/// Minimal deterministic SVG writer (no timestamps, fixed precision).
/// World coordinates are y-up; the canvas flips to SVG's y-down.
class SvgCanvas {
 public:
  SvgCanvas(double min_x, double min_y, double max_x, double max_y,
            int pixel_width = 900);

  void rect(double x0, double y0, double x1, double y1, const std::string& style);
  void polygon(const std::vector<std::array<double, 2>>& pts, const std::string& style);
  void polyline(const std::vector<std::array<double, 2>>& pts, const std::string& style);
  void circle(double x, double y, double radius_px, const std::string& style);
  void arrow(double x0, double y0, double x1, double y1, const std::string& stroke);
  void text(double x, double y, const std::string& s, const std::string& style);

  std::string str() const;

 private:
  std::array<double, 2> map(double x, double y) const;
  double min_x_, min_y_, max_x_, max_y_, scale_;
  int width_, height_;
  std::string body_;
};

/// Boundary polygon of a 2-D zonotope (counterclockwise).
std::vector<std::array<double, 2>> zonotope_polygon(const Zonotope& z);

}  // namespace formset
