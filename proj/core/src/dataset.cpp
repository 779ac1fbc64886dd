#include "floordiff/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>
#include <optional>
#include <stdexcept>

#include <json.hpp>

#include "floordiff/eval.hpp"
#include "floordiff/geometry.hpp"

namespace floordiff {

using nlohmann::json;

namespace {

json corner_array(const Corner& c) { return json::array({c.x, c.y}); }

ComponentType parse_type(const json& node, const char* where) {
  if (!node.is_string()) throw std::runtime_error(std::string(where) + ": kind must be a string");
  const auto type = component_type_from_name(node.get<std::string>());
  if (!type) throw std::runtime_error(std::string(where) + ": unknown type '" + node.get<std::string>() + "'");
  return *type;
}

}  // namespace

std::string plan_to_json_line(const Floorplan& plan, const BubbleDiagram& diagram) {
  json loops = json::array();
  for (const Loop& loop : plan.loops) {
    json corners = json::array();
    for (const Corner& c : loop.corners) corners.push_back(corner_array(c));
    loops.push_back({{"kind", std::string(to_string(loop.kind))}, {"corners", std::move(corners)}});
  }
  json rooms = json::array();
  for (ComponentType t : diagram.rooms) rooms.push_back(std::string(to_string(t)));
  json doors = json::array();
  for (const auto& d : diagram.doors) {
    doors.push_back({{"kind", std::string(to_string(d.kind))}, {"endpoints", d.endpoints}});
  }
  json record = {{"loops", std::move(loops)},
                 {"diagram", {{"rooms", std::move(rooms)}, {"doors", std::move(doors)}}}};
  return record.dump();
}

BubbleDiagram diagram_from_json(const std::string& text) {
  const json node = json::parse(text);
  BubbleDiagram diagram;
  if (!node.contains("rooms") || !node["rooms"].is_array()) {
    throw std::runtime_error("diagram: missing 'rooms' array");
  }
  for (const auto& r : node["rooms"]) {
    const ComponentType t = parse_type(r, "diagram.rooms");
    if (is_door(t)) throw std::runtime_error("diagram: door type listed as a room");
    diagram.rooms.push_back(t);
  }
  for (const auto& d : node.value("doors", json::array())) {
    BubbleDiagram::Door door;
    door.kind = parse_type(d.at("kind"), "diagram.doors");
    for (const auto& e : d.at("endpoints")) door.endpoints.push_back(e.get<int>());
    diagram.doors.push_back(std::move(door));
  }
  diagram.validate();
  return diagram;
}

std::string diagram_to_json(const BubbleDiagram& diagram) {
  json rooms = json::array();
  for (ComponentType t : diagram.rooms) rooms.push_back(std::string(to_string(t)));
  json doors = json::array();
  for (const auto& d : diagram.doors) {
    doors.push_back({{"kind", std::string(to_string(d.kind))}, {"endpoints", d.endpoints}});
  }
  return json{{"rooms", std::move(rooms)}, {"doors", std::move(doors)}}.dump();
}

Corpus::Entry plan_from_json(const std::string& text) {
  const json record = json::parse(text);
  Corpus::Entry entry;
  if (!record.contains("loops") || !record["loops"].is_array() || record["loops"].empty()) {
    throw std::runtime_error("record: missing 'loops' array");
  }
  for (const auto& l : record["loops"]) {
    Loop loop;
    loop.kind = parse_type(l.at("kind"), "loops");
    for (const auto& c : l.at("corners")) {
      if (!c.is_array() || c.size() != 2) throw std::runtime_error("loops: corner must be [x, y]");
      loop.corners.push_back({c[0].get<int>(), c[1].get<int>()});
    }
    entry.plan.loops.push_back(std::move(loop));
  }
  entry.diagram = diagram_from_json(record.at("diagram").dump());

  // Plan/diagram consistency: loop kinds must line up with the diagram in
  // class order (rooms with rooms, doors with doors).
  std::vector<ComponentType> room_kinds, door_kinds;
  for (const Loop& loop : entry.plan.loops) {
    (is_room(loop.kind) ? room_kinds : door_kinds).push_back(loop.kind);
  }
  if (room_kinds != entry.diagram.rooms) {
    throw std::runtime_error("record: room loops do not match diagram rooms");
  }
  if (door_kinds.size() != entry.diagram.doors.size()) {
    throw std::runtime_error("record: door loop count does not match diagram doors");
  }
  for (std::size_t i = 0; i < door_kinds.size(); ++i) {
    if (door_kinds[i] != entry.diagram.doors[i].kind) {
      throw std::runtime_error("record: door loop kind mismatch at index " + std::to_string(i));
    }
  }
  const auto violations = validate_floorplan(entry.plan);
  if (!violations.empty()) {
    std::string msg = "record: invalid plan:";
    for (const auto& v : violations) {
      msg += " [" + std::string(to_string(v.code)) + "] " + v.detail + ";";
    }
    throw std::runtime_error(msg);
  }
  return entry;
}

IngestResult ingest(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("ingest: cannot open " + path.string());
  IngestResult result;
  result.corpus.provenance = Provenance::kIngested;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      result.corpus.entries.push_back(plan_from_json(line));
    } catch (const std::exception& e) {
      result.diagnostics.push_back({line_no, e.what()});
    }
  }
  if (result.corpus.entries.empty()) {
    throw std::runtime_error("ingest: no valid records in " + path.string() + " (" +
                             std::to_string(result.diagnostics.size()) + " rejected)");
  }
  return result;
}

void write_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("write_corpus: cannot open " + path.string());
  for (const auto& entry : corpus.entries) {
    os << plan_to_json_line(entry.plan, entry.diagram) << '\n';
  }
  if (!os) throw std::runtime_error("write_corpus: write failed for " + path.string());
}

namespace {

struct Rect {
  int x0, y0, x1, y1;
  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  std::int64_t area() const { return static_cast<std::int64_t>(width()) * height(); }
};

constexpr int kMinRoomSide = 24;
constexpr int kDoorLength = 10;
constexpr int kDoorHalfWidth = 2;
constexpr int kDoorInset = 4;  // clearance from segment ends, > incidence tol
constexpr int kMinSharedSegment = kDoorLength + 2 * kDoorInset;

const ComponentType kSecondaryRoomTypes[] = {
    ComponentType::kKitchen,   ComponentType::kBedroom,  ComponentType::kDiningRoom,
    ComponentType::kBathroom,  ComponentType::kStudyRoom, ComponentType::kBalcony,
    ComponentType::kEntrance,  ComponentType::kStorage,  ComponentType::kUnknown,
};

Loop rect_loop(ComponentType kind, const Rect& r) {
  Loop loop;
  loop.kind = kind;
  loop.corners = {{r.x0, r.y0}, {r.x1, r.y0}, {r.x1, r.y1}, {r.x0, r.y1}};
  return loop;
}

// Shared wall segment between two non-overlapping rects, if any.
struct SharedWall {
  bool vertical = false;
  int line = 0;        // x for vertical walls, y for horizontal
  int lo = 0, hi = 0;  // segment extent along the wall
  int length() const { return hi - lo; }
};

std::optional<SharedWall> shared_wall(const Rect& a, const Rect& b) {
  if (a.x1 == b.x0 || b.x1 == a.x0) {
    const int lo = std::max(a.y0, b.y0), hi = std::min(a.y1, b.y1);
    if (hi > lo) return SharedWall{true, a.x1 == b.x0 ? a.x1 : b.x1, lo, hi};
  }
  if (a.y1 == b.y0 || b.y1 == a.y0) {
    const int lo = std::max(a.x0, b.x0), hi = std::min(a.x1, b.x1);
    if (hi > lo) return SharedWall{false, a.y1 == b.y0 ? a.y1 : b.y1, lo, hi};
  }
  return std::nullopt;
}

struct Partition {
  std::vector<Rect> rooms;
  Rect bounds;
};

std::optional<Partition> try_partition(int room_count, Rng& rng) {
  Partition part;
  part.bounds = {static_cast<int>(rng.uniform_int(10, 30)), static_cast<int>(rng.uniform_int(10, 30)),
                 static_cast<int>(rng.uniform_int(226, 246)), static_cast<int>(rng.uniform_int(226, 246))};
  part.rooms = {part.bounds};
  while (static_cast<int>(part.rooms.size()) < room_count) {
    // Split the largest splittable rect along its longer axis.
    int pick = -1;
    std::int64_t best_area = -1;
    for (std::size_t i = 0; i < part.rooms.size(); ++i) {
      const Rect& r = part.rooms[i];
      if (std::max(r.width(), r.height()) < 2 * kMinRoomSide) continue;
      if (r.area() > best_area) {
        best_area = r.area();
        pick = static_cast<int>(i);
      }
    }
    if (pick < 0) return std::nullopt;
    const Rect r = part.rooms[static_cast<std::size_t>(pick)];
    const bool split_x = r.width() >= r.height();
    const int span = split_x ? r.width() : r.height();
    const int cut = static_cast<int>(rng.uniform_int(kMinRoomSide, span - kMinRoomSide));
    Rect first = r, second = r;
    if (split_x) {
      first.x1 = r.x0 + cut;
      second.x0 = r.x0 + cut;
    } else {
      first.y1 = r.y0 + cut;
      second.y0 = r.y0 + cut;
    }
    part.rooms[static_cast<std::size_t>(pick)] = first;
    part.rooms.push_back(second);
  }
  return part;
}

struct DisjointSet {
  std::vector<int> parent;
  explicit DisjointSet(int n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) { return parent[static_cast<std::size_t>(x)] == x ? x : parent[static_cast<std::size_t>(x)] = find(parent[static_cast<std::size_t>(x)]); }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[static_cast<std::size_t>(a)] = b;
    return true;
  }
};

std::optional<Corpus::Entry> try_synthesize_plan(int room_count, Rng& rng) {
  const auto part = try_partition(room_count, rng);
  if (!part) return std::nullopt;
  const auto& rooms = part->rooms;
  const int n = static_cast<int>(rooms.size());

  // Candidate door sites: room pairs with a long-enough shared wall.
  struct Candidate {
    int a, b;
    SharedWall wall;
  };
  std::vector<Candidate> candidates;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      const auto wall = shared_wall(rooms[static_cast<std::size_t>(a)], rooms[static_cast<std::size_t>(b)]);
      if (wall && wall->length() >= kMinSharedSegment) {
        candidates.push_back({a, b, *wall});
      }
    }
  }
  // Randomized spanning tree, then a few extra doors.
  for (std::size_t i = candidates.size(); i > 1; --i) {
    std::swap(candidates[i - 1], candidates[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);
  }
  DisjointSet components(n);
  std::vector<Candidate> doors;
  std::vector<Candidate> unused;
  for (const auto& c : candidates) {
    if (components.unite(c.a, c.b)) {
      doors.push_back(c);
    } else {
      unused.push_back(c);
    }
  }
  for (int r = 1; r < n; ++r) {
    if (components.find(r) != components.find(0)) return std::nullopt;  // not connectable
  }
  for (const auto& c : unused) {
    if (rng.bernoulli(0.15)) doors.push_back(c);
  }

  // Front door site: a boundary wall of some room.
  struct FrontSite {
    int room;
    SharedWall wall;  // line on the house boundary
    int outward;      // -1: door extends below/left of the line
  };
  std::vector<FrontSite> fronts;
  for (int r = 0; r < n; ++r) {
    const Rect& room = rooms[static_cast<std::size_t>(r)];
    if (room.x0 == part->bounds.x0 && room.height() >= kMinSharedSegment) {
      fronts.push_back({r, {true, room.x0, room.y0, room.y1}, -1});
    }
    if (room.x1 == part->bounds.x1 && room.height() >= kMinSharedSegment) {
      fronts.push_back({r, {true, room.x1, room.y0, room.y1}, +1});
    }
    if (room.y0 == part->bounds.y0 && room.width() >= kMinSharedSegment) {
      fronts.push_back({r, {false, room.y0, room.x0, room.x1}, -1});
    }
    if (room.y1 == part->bounds.y1 && room.width() >= kMinSharedSegment) {
      fronts.push_back({r, {false, room.y1, room.x0, room.x1}, +1});
    }
  }
  if (fronts.empty()) return std::nullopt;
  const FrontSite front = fronts[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(fronts.size()) - 1))];

  // Types: the largest room is the living room, the rest draw from the
  // remaining categories.
  std::vector<ComponentType> types(static_cast<std::size_t>(n));
  int largest = 0;
  for (int r = 1; r < n; ++r) {
    if (rooms[static_cast<std::size_t>(r)].area() > rooms[static_cast<std::size_t>(largest)].area()) largest = r;
  }
  for (int r = 0; r < n; ++r) {
    types[static_cast<std::size_t>(r)] =
        r == largest ? ComponentType::kLivingRoom
                     : kSecondaryRoomTypes[rng.uniform_int(0, std::size(kSecondaryRoomTypes) - 1)];
  }

  Corpus::Entry entry;
  for (int r = 0; r < n; ++r) {
    entry.plan.loops.push_back(rect_loop(types[static_cast<std::size_t>(r)], rooms[static_cast<std::size_t>(r)]));
    entry.diagram.rooms.push_back(types[static_cast<std::size_t>(r)]);
  }
  auto door_rect = [&rng](const SharedWall& wall, int out_lo, int out_hi) {
    const int start = static_cast<int>(
        rng.uniform_int(wall.lo + kDoorInset, wall.hi - kDoorInset - kDoorLength));
    Rect r{};
    if (wall.vertical) {
      r = {wall.line + out_lo, start, wall.line + out_hi, start + kDoorLength};
    } else {
      r = {start, wall.line + out_lo, start + kDoorLength, wall.line + out_hi};
    }
    return r;
  };
  for (const auto& d : doors) {
    entry.plan.loops.push_back(
        rect_loop(ComponentType::kInteriorDoor, door_rect(d.wall, -kDoorHalfWidth, kDoorHalfWidth)));
    entry.diagram.doors.push_back({ComponentType::kInteriorDoor, {d.a, d.b}});
  }
  const Rect front_rect = front.outward < 0 ? door_rect(front.wall, -kDoorHalfWidth, 0)
                                            : door_rect(front.wall, 0, kDoorHalfWidth);
  entry.plan.loops.push_back(rect_loop(ComponentType::kFrontDoor, front_rect));
  entry.diagram.doors.push_back({ComponentType::kFrontDoor, {front.room}});

  if (!validate_floorplan(entry.plan).empty()) return std::nullopt;
  if (!(reconstruct_bubble_diagram(entry.plan) == entry.diagram)) return std::nullopt;
  return entry;
}

}  // namespace

Corpus synthesize(int plan_count, int rooms_min, int rooms_max, Rng& rng) {
  if (plan_count < 1) throw std::invalid_argument("synthesize: plan count must be >= 1");
  if (rooms_min < 2 || rooms_max > 10 || rooms_min > rooms_max) {
    throw std::invalid_argument("synthesize: rooms per plan must lie in [2, 10]");
  }
  Corpus corpus;
  corpus.provenance = Provenance::kSynthetic;
  corpus.entries.reserve(static_cast<std::size_t>(plan_count));
  for (int i = 0; i < plan_count; ++i) {
    const int rooms = static_cast<int>(rng.uniform_int(rooms_min, rooms_max));
    std::optional<Corpus::Entry> entry;
    for (int attempt = 0; attempt < 100 && !entry; ++attempt) {
      entry = try_synthesize_plan(rooms, rng);
    }
    if (!entry) {
      throw std::runtime_error("synthesize: could not realize a " + std::to_string(rooms) +
                               "-room layout after 100 attempts");
    }
    corpus.entries.push_back(std::move(*entry));
  }
  return corpus;
}

namespace {

struct WallPick {
  std::size_t corner_index;  // wall from this corner to the next
  double mid_x, mid_y;
  double length;
  bool horizontal;  // dominant axis
};

WallPick farthest_wall(const Loop& loop, double house_cx, double house_cy) {
  WallPick best{};
  double best_dist = -1.0;
  const std::size_t n = loop.corners.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Corner& a = loop.corners[i];
    const Corner& b = loop.corners[(i + 1) % n];
    const double mx = (a.x + b.x) / 2.0, my = (a.y + b.y) / 2.0;
    const double dist = (mx - house_cx) * (mx - house_cx) + (my - house_cy) * (my - house_cy);
    if (dist > best_dist) {
      best_dist = dist;
      best = {i, mx, my, std::hypot(b.x - a.x, b.y - a.y),
              std::abs(b.x - a.x) >= std::abs(b.y - a.y)};
    }
  }
  return best;
}

}  // namespace

Floorplan non_manhattan_augment(const Floorplan& plan, double keep_prob, Rng& rng,
                                double incidence_tol) {
  if (keep_prob < 0.0 || keep_prob > 1.0) {
    throw std::invalid_argument("non_manhattan_augment: keep_prob outside [0, 1]");
  }
  // House center from the bounding box of all room corners.
  int min_x = kCoordMax, max_x = 0, min_y = kCoordMax, max_y = 0;
  for (const Loop& loop : plan.loops) {
    if (is_door(loop.kind)) continue;
    for (const Corner& c : loop.corners) {
      min_x = std::min(min_x, c.x);
      max_x = std::max(max_x, c.x);
      min_y = std::min(min_y, c.y);
      max_y = std::max(max_y, c.y);
    }
  }
  const double house_cx = (min_x + max_x) / 2.0;
  const double house_cy = (min_y + max_y) / 2.0;

  Floorplan result = plan;
  const BubbleDiagram reference = reconstruct_bubble_diagram(result, incidence_tol);

  for (std::size_t li = 0; li < result.loops.size(); ++li) {
    if (is_door(result.loops[li].kind)) continue;
    const Loop& room = result.loops[li];

    const bool keep = rng.bernoulli(keep_prob);
    const double depth_f1 = rng.uniform(0.25, 0.75);
    const double depth_f2 = rng.uniform(0.25, 0.75);
    const double pos_f1 = rng.uniform(0.25, 0.75);
    const double pos_f2 = rng.uniform(0.25, 0.75);
    if (!keep) continue;

    int rmin_x = kCoordMax, rmax_x = 0, rmin_y = kCoordMax, rmax_y = 0;
    for (const Corner& c : room.corners) {
      rmin_x = std::min(rmin_x, c.x);
      rmax_x = std::max(rmax_x, c.x);
      rmin_y = std::min(rmin_y, c.y);
      rmax_y = std::max(rmax_y, c.y);
    }
    const double room_cx = (rmin_x + rmax_x) / 2.0;
    const double room_cy = (rmin_y + rmax_y) / 2.0;

    const WallPick wall = farthest_wall(room, house_cx, house_cy);
    const Corner a = room.corners[wall.corner_index];
    const Corner b = room.corners[(wall.corner_index + 1) % room.corners.size()];

    // Offsets: depth beyond the wall is a fraction of the room half-extent
    // on the cross axis; positions spread from the wall center along the
    // wall. Both new corners get their own depth, so the bump is slanted.
    Corner p1{}, p2{};
    if (wall.horizontal) {
      const double half = std::max(1.0, (rmax_y - rmin_y) / 2.0);
      const int sign = wall.mid_y >= room_cy ? 1 : -1;
      const int y1 = static_cast<int>(std::lround(wall.mid_y + sign * depth_f1 * half));
      const int y2 = static_cast<int>(std::lround(wall.mid_y + sign * depth_f2 * half));
      const int dir = b.x >= a.x ? 1 : -1;
      const double half_len = std::abs(b.x - a.x) / 2.0;
      const int x1 = static_cast<int>(std::lround(wall.mid_x - dir * pos_f1 * half_len));
      const int x2 = static_cast<int>(std::lround(wall.mid_x + dir * pos_f2 * half_len));
      p1 = {std::clamp(x1, 0, kCoordMax), std::clamp(y1, 0, kCoordMax)};
      p2 = {std::clamp(x2, 0, kCoordMax), std::clamp(y2, 0, kCoordMax)};
    } else {
      const double half = std::max(1.0, (rmax_x - rmin_x) / 2.0);
      const int sign = wall.mid_x >= room_cx ? 1 : -1;
      const int x1 = static_cast<int>(std::lround(wall.mid_x + sign * depth_f1 * half));
      const int x2 = static_cast<int>(std::lround(wall.mid_x + sign * depth_f2 * half));
      const int dir = b.y >= a.y ? 1 : -1;
      const double half_len = std::abs(b.y - a.y) / 2.0;
      const int y1 = static_cast<int>(std::lround(wall.mid_y - dir * pos_f1 * half_len));
      const int y2 = static_cast<int>(std::lround(wall.mid_y + dir * pos_f2 * half_len));
      p1 = {std::clamp(x1, 0, kCoordMax), std::clamp(y1, 0, kCoordMax)};
      p2 = {std::clamp(x2, 0, kCoordMax), std::clamp(y2, 0, kCoordMax)};
    }

    Loop candidate = room;
    candidate.corners.insert(candidate.corners.begin() + static_cast<std::ptrdiff_t>(wall.corner_index) + 1,
                             {p1, p2});
    if (candidate.corners.size() > static_cast<std::size_t>(kMaxLoopCorners)) continue;

    Floorplan trial = result;
    trial.loops[li] = candidate;
    if (!validate_floorplan(trial).empty()) continue;
    bool overlaps = false;
    const auto cand_pts = loop_points(candidate);
    for (std::size_t lj = 0; lj < trial.loops.size() && !overlaps; ++lj) {
      if (lj == li || is_door(trial.loops[lj].kind)) continue;
      overlaps = geom::polygon_interiors_overlap(cand_pts, loop_points(trial.loops[lj]));
    }
    if (overlaps) continue;
    if (!(reconstruct_bubble_diagram(trial, incidence_tol) == reference)) continue;
    result = std::move(trial);
  }
  return result;
}

Corpus augment_corpus(const Corpus& corpus, double keep_prob, Rng& rng, double incidence_tol) {
  Corpus out;
  out.provenance = Provenance::kAugmented;
  out.entries.reserve(corpus.entries.size());
  for (const auto& entry : corpus.entries) {
    out.entries.push_back({non_manhattan_augment(entry.plan, keep_prob, rng, incidence_tol), entry.diagram});
  }
  return out;
}

CornerHistogram build_histogram(const Corpus& corpus) {
  if (corpus.entries.empty()) throw std::invalid_argument("build_histogram: empty corpus");
  CornerHistogram hist;
  for (const auto& entry : corpus.entries) {
    for (const Loop& loop : entry.plan.loops) {
      hist.add(loop.kind, static_cast<int>(loop.corners.size()));
    }
  }
  return hist;
}

SplitResult split_by_room_count(const Corpus& corpus, int k) {
  if (corpus.entries.empty()) throw std::invalid_argument("split_by_room_count: empty corpus");
  SplitResult result;
  result.train.provenance = corpus.provenance;
  result.eval.provenance = corpus.provenance;
  for (const auto& entry : corpus.entries) {
    (entry.plan.room_count() == k ? result.eval : result.train).entries.push_back(entry);
  }
  if (result.train.entries.empty()) {
    result.warning = "split_by_room_count: no training plans (all have " + std::to_string(k) + " rooms)";
  } else if (result.eval.entries.empty()) {
    result.warning = "split_by_room_count: no eval plans with " + std::to_string(k) + " rooms";
  }
  return result;
}

}  // namespace floordiff
