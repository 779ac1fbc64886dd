#include "floordiff/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>

namespace floordiff::geom {

namespace {

int sign(std::int64_t v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

IPoint scaled(IPoint p, std::int64_t k) { return {p.x * k, p.y * k}; }

std::vector<IPoint> scaled_polygon(std::span<const IPoint> poly, std::int64_t k) {
  std::vector<IPoint> out(poly.begin(), poly.end());
  for (auto& p : out) p = scaled(p, k);
  return out;
}

}  // namespace

std::int64_t cross(IPoint a, IPoint b, IPoint c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

bool on_segment(IPoint p, IPoint a, IPoint b) {
  if (cross(a, b, p) != 0) return false;
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
         std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

bool segments_properly_cross(IPoint a1, IPoint a2, IPoint b1, IPoint b2) {
  const int o1 = sign(cross(a1, a2, b1));
  const int o2 = sign(cross(a1, a2, b2));
  const int o3 = sign(cross(b1, b2, a1));
  const int o4 = sign(cross(b1, b2, a2));
  return o1 * o2 < 0 && o3 * o4 < 0;
}

bool segments_intersect(IPoint a1, IPoint a2, IPoint b1, IPoint b2) {
  if (segments_properly_cross(a1, a2, b1, b2)) return true;
  return on_segment(b1, a1, a2) || on_segment(b2, a1, a2) ||
         on_segment(a1, b1, b2) || on_segment(a2, b1, b2);
}

PointLocation locate_point(IPoint p, std::span<const IPoint> polygon) {
  const std::size_t n = polygon.size();
  int crossings = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const IPoint u = polygon[i];
    const IPoint v = polygon[(i + 1) % n];
    if (on_segment(p, u, v)) return PointLocation::kBoundary;
    const bool upward = u.y <= p.y && v.y > p.y;
    const bool downward = v.y <= p.y && u.y > p.y;
    if (!upward && !downward) continue;
    const std::int64_t o = cross(u, v, p);
    if (upward && o > 0) ++crossings;
    if (downward && o < 0) ++crossings;
  }
  return (crossings & 1) ? PointLocation::kInside : PointLocation::kOutside;
}

double point_segment_dist2(double px, double py, IPoint a, IPoint b) {
  const double ax = static_cast<double>(a.x), ay = static_cast<double>(a.y);
  const double dx = static_cast<double>(b.x) - ax, dy = static_cast<double>(b.y) - ay;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(((px - ax) * dx + (py - ay) * dy) / len2, 0.0, 1.0);
  const double cx = ax + t * dx - px;
  const double cy = ay + t * dy - py;
  return cx * cx + cy * cy;
}

double segment_segment_dist2(IPoint a1, IPoint a2, IPoint b1, IPoint b2) {
  if (segments_intersect(a1, a2, b1, b2)) return 0.0;
  double d = point_segment_dist2(static_cast<double>(a1.x), static_cast<double>(a1.y), b1, b2);
  d = std::min(d, point_segment_dist2(static_cast<double>(a2.x), static_cast<double>(a2.y), b1, b2));
  d = std::min(d, point_segment_dist2(static_cast<double>(b1.x), static_cast<double>(b1.y), a1, a2));
  d = std::min(d, point_segment_dist2(static_cast<double>(b2.x), static_cast<double>(b2.y), a1, a2));
  return d;
}

double polygon_dist2(std::span<const IPoint> a, std::span<const IPoint> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("polygon_dist2: empty polygon");
  if (locate_point(a[0], b) != PointLocation::kOutside) return 0.0;
  if (locate_point(b[0], a) != PointLocation::kOutside) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const IPoint a1 = a[i], a2 = a[(i + 1) % a.size()];
    for (std::size_t j = 0; j < b.size(); ++j) {
      const IPoint b1 = b[j], b2 = b[(j + 1) % b.size()];
      best = std::min(best, segment_segment_dist2(a1, a2, b1, b2));
      if (best == 0.0) return 0.0;
    }
  }
  return best;
}

std::int64_t polygon_area2(std::span<const IPoint> polygon) {
  std::int64_t acc = 0;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) {
    const IPoint p = polygon[i], q = polygon[(i + 1) % n];
    acc += p.x * q.y - q.x * p.y;
  }
  return acc;
}

IPoint interior_point_times6(std::span<const IPoint> polygon) {
  const std::size_t n = polygon.size();
  if (n < 3) throw std::invalid_argument("interior_point_times6: need at least 3 vertices");
  // Lexicographically smallest vertex is a convex corner.
  std::size_t vi = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (polygon[i].x < polygon[vi].x ||
        (polygon[i].x == polygon[vi].x && polygon[i].y < polygon[vi].y)) {
      vi = i;
    }
  }
  const IPoint v = polygon[vi];
  const IPoint a = polygon[(vi + n - 1) % n];
  const IPoint b = polygon[(vi + 1) % n];
  // If the ear triangle (a, v, b) is empty, its centroid is interior.
  // Otherwise take the midpoint between v and the contained vertex farthest
  // from line (a, b).
  bool found = false;
  IPoint best{};
  std::int64_t best_dist = -1;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == vi || i == (vi + n - 1) % n || i == (vi + 1) % n) continue;
    const IPoint q = polygon[i];
    const std::int64_t s1 = cross(a, v, q);
    const std::int64_t s2 = cross(v, b, q);
    const std::int64_t s3 = cross(b, a, q);
    const bool inside_or_on =
        (s1 >= 0 && s2 >= 0 && s3 >= 0) || (s1 <= 0 && s2 <= 0 && s3 <= 0);
    if (!inside_or_on) continue;
    const std::int64_t d = std::llabs(cross(a, b, q));
    if (d > best_dist) {
      best_dist = d;
      best = q;
      found = true;
    }
  }
  if (!found) {
    return {2 * (a.x + v.x + b.x), 2 * (a.y + v.y + b.y)};
  }
  return {3 * (v.x + best.x), 3 * (v.y + best.y)};
}

bool polygon_interiors_overlap(std::span<const IPoint> a, std::span<const IPoint> b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    const IPoint a1 = a[i], a2 = a[(i + 1) % a.size()];
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (segments_properly_cross(a1, a2, b[j], b[(j + 1) % b.size()])) return true;
    }
  }
  for (const IPoint& p : a) {
    if (locate_point(p, b) == PointLocation::kInside) return true;
  }
  for (const IPoint& p : b) {
    if (locate_point(p, a) == PointLocation::kInside) return true;
  }
  // Edge midpoints, exact at doubled scale.
  const auto a2x = scaled_polygon(a, 2);
  const auto b2x = scaled_polygon(b, 2);
  for (std::size_t i = 0; i < a2x.size(); ++i) {
    const IPoint u = a2x[i], v = a2x[(i + 1) % a2x.size()];
    const IPoint mid{(u.x + v.x) / 2, (u.y + v.y) / 2};
    if (locate_point(mid, b2x) == PointLocation::kInside) return true;
  }
  for (std::size_t i = 0; i < b2x.size(); ++i) {
    const IPoint u = b2x[i], v = b2x[(i + 1) % b2x.size()];
    const IPoint mid{(u.x + v.x) / 2, (u.y + v.y) / 2};
    if (locate_point(mid, a2x) == PointLocation::kInside) return true;
  }
  // Interior representative points, exact at 6x scale.
  const auto a6x = scaled_polygon(a, 6);
  const auto b6x = scaled_polygon(b, 6);
  if (locate_point(interior_point_times6(a), b6x) == PointLocation::kInside) return true;
  if (locate_point(interior_point_times6(b), a6x) == PointLocation::kInside) return true;
  return false;
}

}  // namespace floordiff::geom
