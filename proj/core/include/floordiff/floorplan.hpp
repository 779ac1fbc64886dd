#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "floordiff/geometry.hpp"
#include "floordiff/rng.hpp"

namespace floordiff {

// The twelve component categories: ten room types followed by the two door
// types. The enum value is the category's one-hot index; the mapping is part
// of the file and checkpoint contracts and must never be reordered. Indices
// [12, 25) of the 25-wide type one-hot are reserved and never emitted.
enum class ComponentType : int {
  kKitchen = 0,
  kLivingRoom = 1,
  kBedroom = 2,
  kDiningRoom = 3,
  kBathroom = 4,
  kStudyRoom = 5,
  kBalcony = 6,
  kEntrance = 7,
  kStorage = 8,
  kUnknown = 9,
  kInteriorDoor = 10,
  kFrontDoor = 11,
};

inline constexpr int kComponentTypeCount = 12;
inline constexpr int kRoomTypeCount = 10;
inline constexpr int kTypeOneHotDim = 25;
inline constexpr int kIndexOneHotDim = 32;
inline constexpr int kMaxComponents = 32;   // room-index one-hot capacity
inline constexpr int kMaxLoopCorners = 32;  // corner-index one-hot capacity
inline constexpr int kMinRoomCorners = 3;
inline constexpr int kMinDoorCorners = 4;
inline constexpr int kCoordMax = 255;       // quantized grid is 256 x 256

bool is_door(ComponentType type);
bool is_room(ComponentType type);
std::string_view to_string(ComponentType type);
std::optional<ComponentType> component_type_from_name(std::string_view name);
int min_corners(ComponentType type);

// One corner on the 256x256 integer grid.
struct Corner {
  int x = 0;
  int y = 0;
  bool operator==(const Corner&) const = default;
};

// Closed polygonal loop for one room or door; the last corner connects back
// to the first.
struct Loop {
  ComponentType kind = ComponentType::kUnknown;
  std::vector<Corner> corners;
  bool operator==(const Loop&) const = default;
};

struct Floorplan {
  std::vector<Loop> loops;

  int room_count() const;
  int door_count() const;
  bool operator==(const Floorplan&) const = default;
};

// Input constraint graph: typed room nodes plus door edges. A front door has
// one endpoint; an interior door has two distinct endpoints. Reconstructed
// diagrams may additionally carry dangling doors (0 or >2 endpoints).
struct BubbleDiagram {
  struct Door {
    ComponentType kind = ComponentType::kInteriorDoor;
    std::vector<int> endpoints;  // indices into rooms
    bool operator==(const Door&) const = default;
  };

  std::vector<ComponentType> rooms;
  std::vector<Door> doors;

  int component_count() const { return static_cast<int>(rooms.size() + doors.size()); }
  // Throws std::invalid_argument when endpoints are malformed.
  void validate() const;
  bool operator==(const BubbleDiagram&) const = default;
};

// Bipartite room<->door adjacency over component indices.
class ComponentGraph {
 public:
  ComponentGraph() = default;
  explicit ComponentGraph(int components);

  int components() const { return components_; }
  bool adjacent(int a, int b) const;
  void set_adjacent(int a, int b);

 private:
  int components_ = 0;
  std::vector<std::uint8_t> adj_;
};

// Assignment of component indices to the diagram's rooms and doors.
struct LoopOrder {
  std::vector<int> room_index;
  std::vector<int> door_index;

  static LoopOrder rooms_then_doors(const BubbleDiagram& diagram);
};

// Per-type empirical distribution of loop corner counts.
struct CornerHistogram {
  std::map<ComponentType, std::map<int, std::int64_t>> counts;

  void add(ComponentType type, int corner_count, std::int64_t occurrences = 1);
  bool empty() const { return counts.empty(); }
};

struct CornerCountOverrides {
  std::map<ComponentType, int> by_type;
  std::map<int, int> by_component;  // component index wins over type
};

// Affine map between the continuous [-1, 1] coordinate space and the
// [0, 255] integer grid. quantize clamps, rounds half away from zero, and
// inverts dequantize exactly on 0..255.
double dequantize(int v);
int quantize(double c);

// [c, s_1, ..., s_L] with s_k = c + (k/L)*(next - c); 2*(L+1) scalars. The
// far corner is included (s_L == next) so loops sharing a wall sample
// overlapping points.
std::vector<double> augment_corner(double cx, double cy, double next_x, double next_y, int point_count);

// Corner counts for every component of the diagram in rooms-then-doors
// order. Components without an override draw from the histogram with
// probability proportional to the per-type counts.
std::vector<int> sample_corner_counts(const CornerHistogram& histogram,
                                      const BubbleDiagram& diagram,
                                      const CornerCountOverrides& overrides,
                                      Rng& rng);

ComponentGraph build_component_graph(const BubbleDiagram& diagram, const LoopOrder& order);

enum class ViolationCode {
  kCoordinateOutOfRange,
  kTooFewCorners,
  kTooManyCorners,
  kDuplicateConsecutiveCorners,
  kSelfIntersection,
  kComponentOverflow,
  kNoRooms,
};

struct Violation {
  ViolationCode code;
  int loop_index = -1;  // -1 for plan-level violations
  std::string detail;
};

std::string_view to_string(ViolationCode code);

// Structural checks; an empty result means the plan is valid. Violations are
// data, not errors.
std::vector<Violation> validate_floorplan(const Floorplan& plan);

std::vector<geom::IPoint> loop_points(const Loop& loop);

}  // namespace floordiff
