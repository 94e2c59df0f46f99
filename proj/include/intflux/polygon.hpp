#pragma once

#include <array>
#include <vector>

namespace intflux {

using Point2 = std::array<double, 2>;
using Polygon2 = std::vector<Point2>;

/// Keeps the part of a convex polygon where a x + b y + c >= 0.
inline Polygon2 clip_halfplane(const Polygon2& poly, double a, double b, double c) {
  Polygon2 out;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& p = poly[i];
    const Point2& q = poly[(i + 1) % n];
    const double fp = a * p[0] + b * p[1] + c;
    const double fq = a * q[0] + b * q[1] + c;
    if (fp >= 0) out.push_back(p);
    if ((fp >= 0) != (fq >= 0)) {
      const double t = fp / (fp - fq);
      out.push_back({p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])});
    }
  }
  return out;
}

inline Polygon2 clip_box(Polygon2 poly, double x0, double x1, double y0, double y1) {
  poly = clip_halfplane(poly, 1, 0, -x0);
  poly = clip_halfplane(poly, -1, 0, x1);
  poly = clip_halfplane(poly, 0, 1, -y0);
  return clip_halfplane(poly, 0, -1, y1);
}

/// Signed shoelace area (positive for counter-clockwise).
inline double polygon_area(const Polygon2& poly) {
  double s = 0.0;
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
    const Point2& p = poly[i];
    const Point2& q = poly[(i + 1) % n];
    s += p[0] * q[1] - q[0] * p[1];
  }
  return 0.5 * s;
}

}  // namespace intflux
