#include "floordiff/floorplan.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace floordiff {

namespace {

constexpr std::string_view kTypeNames[kComponentTypeCount] = {
    "Kitchen", "Living-room", "Bedroom",  "Dining-room",   "Bathroom", "Study-room",
    "Balcony", "Entrance",    "Storage",  "Unknown",       "Interior door", "Front door",
};

}  // namespace

bool is_door(ComponentType type) {
  return type == ComponentType::kInteriorDoor || type == ComponentType::kFrontDoor;
}

bool is_room(ComponentType type) { return !is_door(type); }

std::string_view to_string(ComponentType type) {
  const int i = static_cast<int>(type);
  if (i < 0 || i >= kComponentTypeCount) throw std::invalid_argument("unknown ComponentType");
  return kTypeNames[i];
}

std::optional<ComponentType> component_type_from_name(std::string_view name) {
  for (int i = 0; i < kComponentTypeCount; ++i) {
    if (kTypeNames[i] == name) return static_cast<ComponentType>(i);
  }
  return std::nullopt;
}

int min_corners(ComponentType type) { return is_door(type) ? kMinDoorCorners : kMinRoomCorners; }

int Floorplan::room_count() const {
  int n = 0;
  for (const auto& l : loops) n += is_room(l.kind) ? 1 : 0;
  return n;
}

int Floorplan::door_count() const { return static_cast<int>(loops.size()) - room_count(); }

void BubbleDiagram::validate() const {
  for (ComponentType t : rooms) {
    if (is_door(t)) throw std::invalid_argument("BubbleDiagram: door type in room list");
  }
  for (const Door& d : doors) {
    if (!is_door(d.kind)) throw std::invalid_argument("BubbleDiagram: room type in door list");
    const std::size_t expected = d.kind == ComponentType::kFrontDoor ? 1 : 2;
    if (d.endpoints.size() != expected) {
      throw std::invalid_argument("BubbleDiagram: " + std::string(to_string(d.kind)) + " must have " +
                                  std::to_string(expected) + " endpoint(s)");
    }
    for (int e : d.endpoints) {
      if (e < 0 || e >= static_cast<int>(rooms.size())) {
        throw std::invalid_argument("BubbleDiagram: door endpoint " + std::to_string(e) + " out of range");
      }
    }
    if (d.endpoints.size() == 2 && d.endpoints[0] == d.endpoints[1]) {
      throw std::invalid_argument("BubbleDiagram: interior door endpoints must be distinct");
    }
  }
}

ComponentGraph::ComponentGraph(int components) : components_(components) {
  adj_.assign(static_cast<std::size_t>(components) * components, 0);
}

bool ComponentGraph::adjacent(int a, int b) const {
  if (a < 0 || b < 0 || a >= components_ || b >= components_) return false;
  return adj_[static_cast<std::size_t>(a) * components_ + b] != 0;
}

void ComponentGraph::set_adjacent(int a, int b) {
  adj_[static_cast<std::size_t>(a) * components_ + b] = 1;
  adj_[static_cast<std::size_t>(b) * components_ + a] = 1;
}

LoopOrder LoopOrder::rooms_then_doors(const BubbleDiagram& diagram) {
  LoopOrder order;
  order.room_index.resize(diagram.rooms.size());
  order.door_index.resize(diagram.doors.size());
  for (std::size_t i = 0; i < diagram.rooms.size(); ++i) order.room_index[i] = static_cast<int>(i);
  for (std::size_t i = 0; i < diagram.doors.size(); ++i) {
    order.door_index[i] = static_cast<int>(diagram.rooms.size() + i);
  }
  return order;
}

void CornerHistogram::add(ComponentType type, int corner_count, std::int64_t occurrences) {
  if (corner_count < min_corners(type) || corner_count > kMaxLoopCorners) {
    throw std::invalid_argument("CornerHistogram: corner count " + std::to_string(corner_count) +
                                " out of bounds for " + std::string(to_string(type)));
  }
  if (occurrences <= 0) throw std::invalid_argument("CornerHistogram: occurrences must be positive");
  counts[type][corner_count] += occurrences;
}

double dequantize(int v) { return 2.0 * static_cast<double>(v) / 255.0 - 1.0; }

int quantize(double c) {
  const double clamped = std::clamp(c, -1.0, 1.0);
  const double mapped = 255.0 * (clamped + 1.0) / 2.0;
  const int v = static_cast<int>(std::round(mapped));  // round half away from zero
  return std::clamp(v, 0, kCoordMax);
}

std::vector<double> augment_corner(double cx, double cy, double next_x, double next_y, int point_count) {
  if (point_count < 1) throw std::invalid_argument("augment_corner: point count must be >= 1");
  std::vector<double> out;
  out.reserve(2 * static_cast<std::size_t>(point_count + 1));
  out.push_back(cx);
  out.push_back(cy);
  for (int k = 1; k <= point_count; ++k) {
    const double f = static_cast<double>(k) / point_count;
    out.push_back(cx + f * (next_x - cx));
    out.push_back(cy + f * (next_y - cy));
  }
  return out;
}

std::vector<int> sample_corner_counts(const CornerHistogram& histogram,
                                      const BubbleDiagram& diagram,
                                      const CornerCountOverrides& overrides,
                                      Rng& rng) {
  diagram.validate();
  const int components = diagram.component_count();
  std::vector<ComponentType> kinds;
  kinds.reserve(static_cast<std::size_t>(components));
  for (ComponentType t : diagram.rooms) kinds.push_back(t);
  for (const auto& d : diagram.doors) kinds.push_back(d.kind);

  std::vector<int> result(static_cast<std::size_t>(components), 0);
  for (int i = 0; i < components; ++i) {
    const ComponentType kind = kinds[static_cast<std::size_t>(i)];
    int chosen = 0;
    if (auto it = overrides.by_component.find(i); it != overrides.by_component.end()) {
      chosen = it->second;
    } else if (auto ty = overrides.by_type.find(kind); ty != overrides.by_type.end()) {
      chosen = ty->second;
    } else {
      auto hist_it = histogram.counts.find(kind);
      if (hist_it == histogram.counts.end() || hist_it->second.empty()) {
        throw std::runtime_error("sample_corner_counts: no histogram entries for type '" +
                                 std::string(to_string(kind)) + "'");
      }
      std::vector<int> values;
      std::vector<std::int64_t> weights;
      for (const auto& [count, occurrences] : hist_it->second) {
        values.push_back(count);
        weights.push_back(occurrences);
      }
      chosen = values[rng.pick_weighted(weights)];
    }
    if (chosen < min_corners(kind) || chosen > kMaxLoopCorners) {
      throw std::invalid_argument("sample_corner_counts: count " + std::to_string(chosen) +
                                  " out of bounds for " + std::string(to_string(kind)));
    }
    result[static_cast<std::size_t>(i)] = chosen;
  }
  return result;
}

ComponentGraph build_component_graph(const BubbleDiagram& diagram, const LoopOrder& order) {
  diagram.validate();
  if (order.room_index.size() != diagram.rooms.size() || order.door_index.size() != diagram.doors.size()) {
    throw std::invalid_argument("build_component_graph: loop order size mismatch");
  }
  const int components = diagram.component_count();
  std::vector<char> seen(static_cast<std::size_t>(components), 0);
  auto claim = [&](int idx) {
    if (idx < 0 || idx >= components || seen[static_cast<std::size_t>(idx)]) {
      throw std::invalid_argument("build_component_graph: loop order is not a bijection onto [0, " +
                                  std::to_string(components) + ")");
    }
    seen[static_cast<std::size_t>(idx)] = 1;
  };
  for (int idx : order.room_index) claim(idx);
  for (int idx : order.door_index) claim(idx);

  ComponentGraph graph(components);
  for (std::size_t d = 0; d < diagram.doors.size(); ++d) {
    const int door_idx = order.door_index[d];
    for (int room : diagram.doors[d].endpoints) {
      graph.set_adjacent(order.room_index[static_cast<std::size_t>(room)], door_idx);
    }
  }
  return graph;
}

std::string_view to_string(ViolationCode code) {
  switch (code) {
    case ViolationCode::kCoordinateOutOfRange: return "coordinate-out-of-range";
    case ViolationCode::kTooFewCorners: return "too-few-corners";
    case ViolationCode::kTooManyCorners: return "too-many-corners";
    case ViolationCode::kDuplicateConsecutiveCorners: return "duplicate-consecutive-corners";
    case ViolationCode::kSelfIntersection: return "self-intersection";
    case ViolationCode::kComponentOverflow: return "component-overflow";
    case ViolationCode::kNoRooms: return "no-rooms";
  }
  return "unknown";
}

std::vector<geom::IPoint> loop_points(const Loop& loop) {
  std::vector<geom::IPoint> pts;
  pts.reserve(loop.corners.size());
  for (const Corner& c : loop.corners) pts.push_back({c.x, c.y});
  return pts;
}

namespace {

bool loop_self_intersects(const std::vector<geom::IPoint>& pts) {
  const std::size_t n = pts.size();
  if (n < 4) return false;  // triangles cannot self-intersect
  for (std::size_t i = 0; i < n; ++i) {
    const geom::IPoint a1 = pts[i], a2 = pts[(i + 1) % n];
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (geom::segments_intersect(a1, a2, pts[j], pts[(j + 1) % n])) return true;
    }
  }
  // Reversal spikes: consecutive edges that double back along the same line.
  for (std::size_t i = 0; i < n; ++i) {
    const geom::IPoint a = pts[i], b = pts[(i + 1) % n], c = pts[(i + 2) % n];
    if (geom::cross(a, b, c) != 0) continue;
    const std::int64_t dot = (b.x - a.x) * (c.x - b.x) + (b.y - a.y) * (c.y - b.y);
    if (dot < 0) return true;
  }
  return false;
}

}  // namespace

std::vector<Violation> validate_floorplan(const Floorplan& plan) {
  std::vector<Violation> violations;
  if (plan.loops.size() > static_cast<std::size_t>(kMaxComponents)) {
    violations.push_back({ViolationCode::kComponentOverflow, -1,
                          std::to_string(plan.loops.size()) + " loops exceed capacity " +
                              std::to_string(kMaxComponents)});
  }
  if (plan.room_count() == 0) {
    violations.push_back({ViolationCode::kNoRooms, -1, "plan has no room loops"});
  }
  for (std::size_t li = 0; li < plan.loops.size(); ++li) {
    const Loop& loop = plan.loops[li];
    const int idx = static_cast<int>(li);
    const int n = static_cast<int>(loop.corners.size());
    if (n < min_corners(loop.kind)) {
      violations.push_back({ViolationCode::kTooFewCorners, idx,
                            std::string(to_string(loop.kind)) + " has " + std::to_string(n) +
                                " corners, minimum is " + std::to_string(min_corners(loop.kind))});
      continue;
    }
    if (n > kMaxLoopCorners) {
      violations.push_back({ViolationCode::kTooManyCorners, idx,
                            std::to_string(n) + " corners exceed capacity " + std::to_string(kMaxLoopCorners)});
      continue;
    }
    bool in_range = true;
    for (const Corner& c : loop.corners) {
      if (c.x < 0 || c.x > kCoordMax || c.y < 0 || c.y > kCoordMax) {
        violations.push_back({ViolationCode::kCoordinateOutOfRange, idx,
                              "corner (" + std::to_string(c.x) + ", " + std::to_string(c.y) +
                                  ") outside [0, " + std::to_string(kCoordMax) + "]"});
        in_range = false;
        break;
      }
    }
    bool has_duplicate = false;
    for (int i = 0; i < n; ++i) {
      if (loop.corners[static_cast<std::size_t>(i)] == loop.corners[static_cast<std::size_t>((i + 1) % n)]) {
        violations.push_back({ViolationCode::kDuplicateConsecutiveCorners, idx,
                              "corners " + std::to_string(i) + " and " + std::to_string((i + 1) % n) +
                                  " coincide"});
        has_duplicate = true;
        break;
      }
    }
    if (in_range && !has_duplicate && loop_self_intersects(loop_points(loop))) {
      violations.push_back({ViolationCode::kSelfIntersection, idx, "loop boundary intersects itself"});
    }
  }
  return violations;
}

}  // namespace floordiff
