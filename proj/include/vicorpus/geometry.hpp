#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>

namespace vicorpus {

/// Axis-aligned rectangle in CSS or image pixels; origin top-left, y down.
struct Rect {
  double x = 0;
  double y = 0;
  double w = 0;
  double h = 0;

  double left() const { return x; }
  double top() const { return y; }
  double right() const { return x + w; }
  double bottom() const { return y + h; }
  double area() const { return std::max(0.0, w) * std::max(0.0, h); }
  bool empty() const { return !(w > 0 && h > 0); }

  static Rect from_edges(double x0, double y0, double x1, double y1) {
    return {x0, y0, x1 - x0, y1 - y0};
  }

  bool contains(const Rect& o) const {
    return o.x >= x && o.y >= y && o.right() <= right() && o.bottom() <= bottom();
  }

  friend bool operator==(const Rect&, const Rect&) = default;
};

inline Rect intersection(const Rect& a, const Rect& b) {
  const double x0 = std::max(a.left(), b.left());
  const double y0 = std::max(a.top(), b.top());
  const double x1 = std::min(a.right(), b.right());
  const double y1 = std::min(a.bottom(), b.bottom());
  if (x1 <= x0 || y1 <= y0) return {x0, y0, 0, 0};
  return Rect::from_edges(x0, y0, x1, y1);
}

inline Rect bounding_union(const Rect& a, const Rect& b) {
  return Rect::from_edges(std::min(a.left(), b.left()), std::min(a.top(), b.top()),
                          std::max(a.right(), b.right()), std::max(a.bottom(), b.bottom()));
}

/// Length of the vertical overlap between two rects (0 when disjoint).
inline double vertical_overlap(const Rect& a, const Rect& b) {
  return std::max(0.0, std::min(a.bottom(), b.bottom()) - std::max(a.top(), b.top()));
}

struct Point {
  double x = 0;
  double y = 0;
  friend bool operator==(const Point&, const Point&) = default;
};

/// Axis-aligned quadrilateral: top-left, top-right, bottom-right, bottom-left.
struct Quad {
  std::array<Point, 4> p{};

  static Quad from_rect(const Rect& r) {
    return Quad{{Point{r.left(), r.top()}, Point{r.right(), r.top()},
                 Point{r.right(), r.bottom()}, Point{r.left(), r.bottom()}}};
  }

  Rect bounds() const {
    double x0 = p[0].x, y0 = p[0].y, x1 = p[0].x, y1 = p[0].y;
    for (const auto& q : p) {
      x0 = std::min(x0, q.x);
      y0 = std::min(y0, q.y);
      x1 = std::max(x1, q.x);
      y1 = std::max(y1, q.y);
    }
    return Rect::from_edges(x0, y0, x1, y1);
  }

  bool axis_aligned() const {
    return p[0].y == p[1].y && p[2].y == p[3].y && p[0].x == p[3].x && p[1].x == p[2].x &&
           p[1].x >= p[0].x && p[3].y >= p[0].y;
  }

  /// Corner comparison for axis-aligned quads; exact, no width arithmetic.
  bool contains(const Quad& o) const {
    return o.p[0].x >= p[0].x && o.p[0].y >= p[0].y && o.p[2].x <= p[2].x && o.p[2].y <= p[2].y;
  }

  /// Flat `[x0,y0,x1,y1,x2,y2,x3,y3]` form used on disk.
  std::array<double, 8> flat() const {
    return {p[0].x, p[0].y, p[1].x, p[1].y, p[2].x, p[2].y, p[3].x, p[3].y};
  }

  static Quad from_flat(std::span<const double, 8> v) {
    return Quad{{Point{v[0], v[1]}, Point{v[2], v[3]}, Point{v[4], v[5]}, Point{v[6], v[7]}}};
  }

  friend bool operator==(const Quad&, const Quad&) = default;
};

}  // namespace vicorpus
