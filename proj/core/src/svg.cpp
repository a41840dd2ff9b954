#include "formset/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace formset {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace

SvgCanvas::SvgCanvas(double min_x, double min_y, double max_x, double max_y,
                     int pixel_width)
    : min_x_(min_x), min_y_(min_y), max_x_(max_x), max_y_(max_y) {
  const double span_x = std::max(max_x - min_x, 1e-9);
  const double span_y = std::max(max_y - min_y, 1e-9);
  width_ = pixel_width;
  scale_ = width_ / span_x;
  height_ = static_cast<int>(std::lround(span_y * scale_));
}

std::array<double, 2> SvgCanvas::map(double x, double y) const {
  return {(x - min_x_) * scale_, (max_y_ - y) * scale_};
}

void SvgCanvas::rect(double x0, double y0, double x1, double y1,
                     const std::string& style) {
  const auto a = map(std::min(x0, x1), std::max(y0, y1));
  body_ += "<rect x=\"" + num(a[0]) + "\" y=\"" + num(a[1]) + "\" width=\"" +
           num(std::abs(x1 - x0) * scale_) + "\" height=\"" +
           num(std::abs(y1 - y0) * scale_) + "\" style=\"" + style + "\"/>\n";
}

void SvgCanvas::polygon(const std::vector<std::array<double, 2>>& pts,
                        const std::string& style) {
  body_ += "<polygon points=\"";
  for (const auto& p : pts) {
    const auto m = map(p[0], p[1]);
    body_ += num(m[0]) + "," + num(m[1]) + " ";
  }
  body_ += "\" style=\"" + style + "\"/>\n";
}

void SvgCanvas::polyline(const std::vector<std::array<double, 2>>& pts,
                         const std::string& style) {
  body_ += "<polyline points=\"";
  for (const auto& p : pts) {
    const auto m = map(p[0], p[1]);
    body_ += num(m[0]) + "," + num(m[1]) + " ";
  }
  body_ += "\" style=\"fill:none;" + style + "\"/>\n";
}

void SvgCanvas::circle(double x, double y, double radius_px, const std::string& style) {
  const auto m = map(x, y);
  body_ += "<circle cx=\"" + num(m[0]) + "\" cy=\"" + num(m[1]) + "\" r=\"" +
           num(radius_px) + "\" style=\"" + style + "\"/>\n";
}

void SvgCanvas::arrow(double x0, double y0, double x1, double y1,
                      const std::string& stroke) {
  const auto a = map(x0, y0);
  const auto b = map(x1, y1);
  body_ += "<line x1=\"" + num(a[0]) + "\" y1=\"" + num(a[1]) + "\" x2=\"" +
           num(b[0]) + "\" y2=\"" + num(b[1]) + "\" style=\"stroke:" + stroke +
           ";stroke-width:1.4\" marker-end=\"url(#ah)\"/>\n";
}

void SvgCanvas::text(double x, double y, const std::string& s, const std::string& style) {
  const auto m = map(x, y);
  body_ += "<text x=\"" + num(m[0]) + "\" y=\"" + num(m[1]) + "\" style=\"" +
           (style.empty() ? "font-size:12px;font-family:sans-serif" : style) +
           "\">" + s + "</text>\n";
}

std::string SvgCanvas::str() const {
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                    std::to_string(width_) + "\" height=\"" + std::to_string(height_) +
                    "\" viewBox=\"0 0 " + std::to_string(width_) + " " +
                    std::to_string(height_) + "\">\n";
  out += "<defs><marker id=\"ah\" markerWidth=\"8\" markerHeight=\"8\" refX=\"6\" "
         "refY=\"3\" orient=\"auto\"><path d=\"M0,0 L6,3 L0,6 z\" fill=\"purple\"/>"
         "</marker></defs>\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += body_;
  out += "</svg>\n";
  return out;
}

std::vector<std::array<double, 2>> zonotope_polygon(const Zonotope& z) {
  if (z.center.size() != 2)
    throw DimensionError("zonotope_polygon: only 2-D supported");
  std::vector<Eigen::Vector2d> gens;
  for (Eigen::Index j = 0; j < z.generators.cols(); ++j) {
    Eigen::Vector2d g = z.generators.col(j);
    if (g.norm() < 1e-14) continue;
    if (g(1) < 0 || (g(1) == 0 && g(0) < 0)) g = -g;  // fold into upper half
    gens.push_back(g);
  }
  if (gens.empty())
    return {{z.center(0), z.center(1)}};
  std::sort(gens.begin(), gens.end(), [](const auto& a, const auto& b) {
    return std::atan2(a(1), a(0)) < std::atan2(b(1), b(0));
  });

  Eigen::Vector2d corner = z.center.head<2>();
  for (const auto& g : gens) corner -= g;
  std::vector<std::array<double, 2>> pts;
  Eigen::Vector2d cur = corner;
  pts.push_back({cur(0), cur(1)});
  for (const auto& g : gens) {
    cur += 2.0 * g;
    pts.push_back({cur(0), cur(1)});
  }
  // Mirror the walked half through the center for the opposite boundary.
  const Eigen::Vector2d c2 = 2.0 * z.center.head<2>();
  const size_t half = pts.size();
  for (size_t i = 1; i + 1 < half; ++i)
    pts.push_back({c2(0) - pts[i][0], c2(1) - pts[i][1]});
  return pts;
}

}  // namespace formset
