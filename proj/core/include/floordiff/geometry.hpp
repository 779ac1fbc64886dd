#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace floordiff::geom {

struct IPoint {
  std::int64_t x = 0;
  std::int64_t y = 0;
};

enum class PointLocation { kInside, kBoundary, kOutside };

// Twice the signed area of triangle (a, b, c). Exact for coordinates well
// below 2^30.
std::int64_t cross(IPoint a, IPoint b, IPoint c);

// p lies on segment [a, b] (inclusive).
bool on_segment(IPoint p, IPoint a, IPoint b);

// Segments [a1,a2] and [b1,b2] share at least one point (touching counts).
bool segments_intersect(IPoint a1, IPoint a2, IPoint b1, IPoint b2);

// Segments cross at a single interior point of both.
bool segments_properly_cross(IPoint a1, IPoint a2, IPoint b1, IPoint b2);

// Exact point-in-polygon for integer coordinates (even-odd rule with an
// explicit boundary test).
PointLocation locate_point(IPoint p, std::span<const IPoint> polygon);

double point_segment_dist2(double px, double py, IPoint a, IPoint b);

double segment_segment_dist2(IPoint a1, IPoint a2, IPoint b1, IPoint b2);

// Minimum squared distance between two polygon boundaries; 0 when they
// touch, overlap, or one contains the other.
double polygon_dist2(std::span<const IPoint> a, std::span<const IPoint> b);

// True when the open interiors of two simple polygons share any point.
// Decided by exact proper-crossing tests plus strict containment probes of
// vertices, edge midpoints and one interior point per polygon.
bool polygon_interiors_overlap(std::span<const IPoint> a, std::span<const IPoint> b);

// Twice the signed area (positive for counter-clockwise).
std::int64_t polygon_area2(std::span<const IPoint> polygon);

// A point strictly inside a simple polygon, scaled by 6 so it stays exact:
// the result is (6*px, 6*py) for the rational interior point (px, py).
IPoint interior_point_times6(std::span<const IPoint> polygon);

}  // namespace floordiff::geom
