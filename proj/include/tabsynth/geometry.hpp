#pragma once

#include <algorithm>
#include <cmath>

namespace tabsynth {

/// Axis-aligned box, top-left origin, pixels.
struct Rect {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double right() const { return x + w; }
  double bottom() const { return y + h; }
  double center_x() const { return x + w / 2.0; }
  double center_y() const { return y + h / 2.0; }
  double area() const { return w * h; }

  bool contains(double px, double py) const {
    return px >= x && px <= right() && py >= y && py <= bottom();
  }
  bool contains(const Rect& other, double tol = 0.0) const {
    return other.x >= x - tol && other.y >= y - tol && other.right() <= right() + tol &&
           other.bottom() <= bottom() + tol;
  }

  friend bool operator==(const Rect&, const Rect&) = default;
};

inline double intersection_area(const Rect& a, const Rect& b) {
  const double iw = std::min(a.right(), b.right()) - std::max(a.x, b.x);
  const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
  return (iw > 0.0 && ih > 0.0) ? iw * ih : 0.0;
}

inline double iou(const Rect& a, const Rect& b) {
  const double inter = intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

/// Rounds half-up; the single rounding rule used at render and annotation time.
inline long round_half_up(double v) { return static_cast<long>(std::floor(v + 0.5)); }

enum class Orientation { Horizontal, Vertical };

/// A ruling line. `position` is the coordinate on the perpendicular axis,
/// [start, end] the extent along the parallel axis.
struct LineSegment {
  Orientation orientation = Orientation::Horizontal;
  double position = 0.0;
  double start = 0.0;
  double end = 0.0;
  double thickness = 1.0;

  double length() const { return end - start; }
  friend bool operator==(const LineSegment&, const LineSegment&) = default;
};

}  // namespace tabsynth
