#include "floordiff/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "floordiff/geometry.hpp"

namespace floordiff {

BubbleDiagram reconstruct_bubble_diagram(const Floorplan& plan, double tol) {
  if (tol < 0) throw std::invalid_argument("reconstruct_bubble_diagram: negative tolerance");
  BubbleDiagram diagram;
  std::vector<std::vector<geom::IPoint>> room_polys;
  for (const Loop& loop : plan.loops) {
    if (is_room(loop.kind)) {
      diagram.rooms.push_back(loop.kind);
      room_polys.push_back(loop_points(loop));
    }
  }
  const double tol2 = tol * tol;
  for (const Loop& loop : plan.loops) {
    if (!is_door(loop.kind)) continue;
    const auto door_poly = loop_points(loop);
    std::vector<int> incident;
    for (std::size_t r = 0; r < room_polys.size(); ++r) {
      if (geom::polygon_dist2(door_poly, room_polys[r]) <= tol2) {
        incident.push_back(static_cast<int>(r));
      }
    }
    BubbleDiagram::Door door;
    door.endpoints = incident;
    if (incident.size() == 2) {
      door.kind = ComponentType::kInteriorDoor;
    } else if (incident.size() == 1) {
      door.kind = ComponentType::kFrontDoor;
    } else {
      door.kind = loop.kind;  // dangling; endpoints keep the incident list
    }
    diagram.doors.push_back(std::move(door));
  }
  return diagram;
}

namespace {

struct DoorKey {
  int kind;
  std::vector<int> endpoints;
  bool operator<(const DoorKey& o) const {
    if (kind != o.kind) return kind < o.kind;
    return endpoints < o.endpoints;
  }
  bool operator==(const DoorKey& o) const = default;
};

// Door edit count for a fixed partial room matching. `to_common` maps input
// room indices into the reconstruction's index space (-1 when unmatched).
int door_edits(const BubbleDiagram& input, const BubbleDiagram& recon,
               const std::vector<int>& to_common) {
  std::map<DoorKey, int> lhs, rhs;
  int missing = 0;
  for (const auto& door : input.doors) {
    DoorKey key{static_cast<int>(door.kind), {}};
    bool unmatched_endpoint = false;
    for (int e : door.endpoints) {
      const int mapped = to_common[static_cast<std::size_t>(e)];
      if (mapped < 0) {
        unmatched_endpoint = true;
        break;
      }
      key.endpoints.push_back(mapped);
    }
    if (unmatched_endpoint) {
      ++missing;  // can never match a reconstructed door
      continue;
    }
    std::sort(key.endpoints.begin(), key.endpoints.end());
    ++lhs[std::move(key)];
  }
  for (const auto& door : recon.doors) {
    DoorKey key{static_cast<int>(door.kind), door.endpoints};
    std::sort(key.endpoints.begin(), key.endpoints.end());
    ++rhs[std::move(key)];
  }
  // Exact matches cancel; leftovers pair up as kind mismatches when the
  // endpoint sets agree, otherwise they count as missing/extraneous.
  std::map<std::vector<int>, int> lhs_left, rhs_left;
  int extraneous = 0;
  for (const auto& [key, count] : lhs) {
    auto it = rhs.find(key);
    const int matched = it == rhs.end() ? 0 : std::min(count, it->second);
    if (count > matched) lhs_left[key.endpoints] += count - matched;
  }
  for (const auto& [key, count] : rhs) {
    auto it = lhs.find(key);
    const int matched = it == lhs.end() ? 0 : std::min(count, it->second);
    if (count > matched) rhs_left[key.endpoints] += count - matched;
  }
  int mismatch_pairs = 0;
  for (const auto& [eps, count] : lhs_left) {
    missing += count;
    auto it = rhs_left.find(eps);
    if (it != rhs_left.end()) mismatch_pairs += std::min(count, it->second);
  }
  for (const auto& kv : rhs_left) extraneous += kv.second;
  return missing + extraneous - mismatch_pairs;
}

constexpr std::int64_t kBijectionCap = 5'000'000;

// Enumerates, per type, every injection of the smaller room group into the
// larger one; unmatched rooms are charged in the fixed room penalty.
struct MatchSearch {
  struct Group {
    std::vector<int> small, large;
    bool input_is_small = true;
  };

  const BubbleDiagram* input;
  const BubbleDiagram* recon;
  std::vector<Group> groups;
  std::vector<int> to_common;  // input room -> recon room, -1 when unmatched
  std::vector<char> input_used, recon_used;
  int room_penalty = 0;
  int best = std::numeric_limits<int>::max();

  void search(std::size_t group, std::size_t member) {
    if (group == groups.size()) {
      best = std::min(best, room_penalty + door_edits(*input, *recon, to_common));
      return;
    }
    const Group& g = groups[group];
    if (member == g.small.size()) {
      search(group + 1, 0);
      return;
    }
    std::vector<char>& used = g.input_is_small ? recon_used : input_used;
    for (int candidate : g.large) {
      if (used[static_cast<std::size_t>(candidate)]) continue;
      const int input_room = g.input_is_small ? g.small[member] : candidate;
      const int recon_room = g.input_is_small ? candidate : g.small[member];
      used[static_cast<std::size_t>(candidate)] = 1;
      to_common[static_cast<std::size_t>(input_room)] = recon_room;
      search(group, member + 1);
      used[static_cast<std::size_t>(candidate)] = 0;
      to_common[static_cast<std::size_t>(input_room)] = -1;
    }
  }
};

std::int64_t arrangements(std::int64_t n, std::int64_t k) {
  std::int64_t total = 1;
  for (std::int64_t i = 0; i < k; ++i) {
    total *= n - i;
    if (total > kBijectionCap) return kBijectionCap + 1;
  }
  return total;
}

}  // namespace

int compatibility(const BubbleDiagram& input, const BubbleDiagram& reconstructed) {
  MatchSearch search;
  search.input = &input;
  search.recon = &reconstructed;
  std::int64_t combinations = 1;
  int room_penalty = 0;
  for (int ty = 0; ty < kComponentTypeCount; ++ty) {
    const ComponentType type = static_cast<ComponentType>(ty);
    std::vector<int> in_rooms, re_rooms;
    for (std::size_t i = 0; i < input.rooms.size(); ++i) {
      if (input.rooms[i] == type) in_rooms.push_back(static_cast<int>(i));
    }
    for (std::size_t i = 0; i < reconstructed.rooms.size(); ++i) {
      if (reconstructed.rooms[i] == type) re_rooms.push_back(static_cast<int>(i));
    }
    if (in_rooms.empty() && re_rooms.empty()) continue;
    room_penalty += std::abs(static_cast<int>(in_rooms.size()) - static_cast<int>(re_rooms.size()));
    combinations *= arrangements(static_cast<std::int64_t>(std::max(in_rooms.size(), re_rooms.size())),
                                 static_cast<std::int64_t>(std::min(in_rooms.size(), re_rooms.size())));
    if (combinations > kBijectionCap) {
      throw std::runtime_error("compatibility: diagram too large for exact search");
    }
    MatchSearch::Group group;
    group.input_is_small = in_rooms.size() <= re_rooms.size();
    group.small = group.input_is_small ? std::move(in_rooms) : std::move(re_rooms);
    group.large = group.input_is_small ? std::move(re_rooms) : std::move(in_rooms);
    search.groups.push_back(std::move(group));
  }
  search.to_common.assign(input.rooms.size(), -1);
  search.input_used.assign(input.rooms.size(), 0);
  search.recon_used.assign(reconstructed.rooms.size(), 0);
  search.room_penalty = room_penalty;
  search.search(0, 0);
  return search.best;
}

ValidityReport validity_report(const std::vector<Floorplan>& plans) {
  if (plans.empty()) throw std::invalid_argument("validity_report: empty plan set");
  ValidityReport report;
  report.total = static_cast<int>(plans.size());
  for (const Floorplan& plan : plans) {
    const auto violations = validate_floorplan(plan);
    if (violations.empty()) {
      ++report.valid;
    } else {
      for (const auto& v : violations) {
        ++report.violation_counts[std::string(to_string(v.code))];
      }
    }
  }
  return report;
}

std::vector<double> plan_features(const Floorplan& plan) {
  std::vector<double> areas, aspects, corners;
  double cx_sum = 0.0, cy_sum = 0.0;
  std::vector<std::pair<double, double>> centers;
  double diag_sum = 0.0;
  int rooms = 0, doors = 0;
  for (const Loop& loop : plan.loops) {
    if (is_door(loop.kind)) {
      ++doors;
      continue;
    }
    ++rooms;
    const auto pts = loop_points(loop);
    areas.push_back(std::abs(static_cast<double>(geom::polygon_area2(pts))) / 2.0 / (256.0 * 256.0));
    int min_x = kCoordMax, max_x = 0, min_y = kCoordMax, max_y = 0;
    for (const Corner& c : loop.corners) {
      min_x = std::min(min_x, c.x);
      max_x = std::max(max_x, c.x);
      min_y = std::min(min_y, c.y);
      max_y = std::max(max_y, c.y);
    }
    const double w = std::max(1, max_x - min_x);
    const double h = std::max(1, max_y - min_y);
    aspects.push_back(std::max(w, h) / std::min(w, h));
    diag_sum += std::sqrt(w * w + h * h) / (256.0 * std::numbers::sqrt2);
    corners.push_back(static_cast<double>(loop.corners.size()) / kMaxLoopCorners);
    const double cx = (min_x + max_x) / 2.0, cy = (min_y + max_y) / 2.0;
    centers.push_back({cx, cy});
    cx_sum += cx;
    cy_sum += cy;
  }
  if (rooms == 0) throw std::invalid_argument("plan_features: no rooms");
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  auto stddev = [&](const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
  };
  const double mcx = cx_sum / rooms, mcy = cy_sum / rooms;
  double disp = 0.0;
  for (const auto& [cx, cy] : centers) disp += (cx - mcx) * (cx - mcx) + (cy - mcy) * (cy - mcy);
  disp = std::sqrt(disp / rooms) / 256.0;
  return {
      static_cast<double>(rooms) / kMaxComponents,
      static_cast<double>(doors) / kMaxComponents,
      mean(areas),
      stddev(areas),
      mean(aspects),
      mean(corners),
      disp,
      diag_sum / rooms,
  };
}

namespace {

// Jacobi eigenvalues of a symmetric matrix (row-major n*n).
std::vector<double> symmetric_eigenvalues(std::vector<double> m, int n) {
  auto at = [&](int r, int c) -> double& { return m[static_cast<std::size_t>(r) * n + c]; };
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int r = 0; r < n; ++r) {
      for (int c = r + 1; c < n; ++c) off += at(r, c) * at(r, c);
    }
    if (off < 1e-24) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(at(p, q)) < 1e-30) continue;
        const double theta = (at(q, q) - at(p, p)) / (2.0 * at(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double mkp = at(k, p), mkq = at(k, q);
          at(k, p) = c * mkp - s * mkq;
          at(k, q) = s * mkp + c * mkq;
        }
        for (int k = 0; k < n; ++k) {
          const double mpk = at(p, k), mqk = at(q, k);
          at(p, k) = c * mpk - s * mqk;
          at(q, k) = s * mpk + c * mqk;
        }
      }
    }
  }
  std::vector<double> eig(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) eig[static_cast<std::size_t>(i)] = at(i, i);
  return eig;
}

// B = V sqrt(diag) V^T for symmetric PSD input.
std::vector<double> symmetric_sqrt(const std::vector<double>& m, int n) {
  std::vector<double> a = m;
  std::vector<double> v(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i) * n + i] = 1.0;
  auto at = [&](std::vector<double>& mat, int r, int c) -> double& {
    return mat[static_cast<std::size_t>(r) * n + c];
  };
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int r = 0; r < n; ++r) {
      for (int c = r + 1; c < n; ++c) off += at(a, r, c) * at(a, r, c);
    }
    if (off < 1e-24) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(at(a, p, q)) < 1e-30) continue;
        const double theta = (at(a, q, q) - at(a, p, p)) / (2.0 * at(a, p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = at(a, k, p), akq = at(a, k, q);
          at(a, k, p) = c * akp - s * akq;
          at(a, k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = at(a, p, k), aqk = at(a, q, k);
          at(a, p, k) = c * apk - s * aqk;
          at(a, q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = at(v, k, p), vkq = at(v, k, q);
          at(v, k, p) = c * vkp - s * vkq;
          at(v, k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<double> out(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    const double lambda = std::max(0.0, a[static_cast<std::size_t>(i) * n + i]);
    const double root = std::sqrt(lambda);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        out[static_cast<std::size_t>(r) * n + c] +=
            root * v[static_cast<std::size_t>(r) * n + i] * v[static_cast<std::size_t>(c) * n + i];
      }
    }
  }
  return out;
}

void gaussian_fit(const std::vector<Floorplan>& plans, std::vector<double>& mean,
                  std::vector<double>& cov, int& dim) {
  if (plans.size() < 2) {
    throw std::invalid_argument("diversity_proxy: need at least 2 plans per side for covariance");
  }
  std::vector<std::vector<double>> feats;
  feats.reserve(plans.size());
  for (const auto& p : plans) feats.push_back(plan_features(p));
  dim = static_cast<int>(feats[0].size());
  mean.assign(static_cast<std::size_t>(dim), 0.0);
  for (const auto& f : feats) {
    for (int i = 0; i < dim; ++i) mean[static_cast<std::size_t>(i)] += f[static_cast<std::size_t>(i)];
  }
  for (auto& m : mean) m /= static_cast<double>(feats.size());
  cov.assign(static_cast<std::size_t>(dim) * dim, 0.0);
  for (const auto& f : feats) {
    for (int r = 0; r < dim; ++r) {
      for (int c = 0; c < dim; ++c) {
        cov[static_cast<std::size_t>(r) * dim + c] +=
            (f[static_cast<std::size_t>(r)] - mean[static_cast<std::size_t>(r)]) *
            (f[static_cast<std::size_t>(c)] - mean[static_cast<std::size_t>(c)]);
      }
    }
  }
  for (auto& v : cov) v /= static_cast<double>(feats.size() - 1);
}

}  // namespace

double diversity_proxy(const std::vector<Floorplan>& set_a, const std::vector<Floorplan>& set_b) {
  std::vector<double> mu1, mu2, cov1, cov2;
  int dim = 0;
  gaussian_fit(set_a, mu1, cov1, dim);
  gaussian_fit(set_b, mu2, cov2, dim);
  double mean_gap2 = 0.0;
  for (int i = 0; i < dim; ++i) {
    const double d = mu1[static_cast<std::size_t>(i)] - mu2[static_cast<std::size_t>(i)];
    mean_gap2 += d * d;
  }
  // tr(c1) + tr(c2) - 2 tr((c1 c2)^{1/2}) with the product symmetrized as
  // s1^{1/2} c2 s1^{1/2}.
  const auto root1 = symmetric_sqrt(cov1, dim);
  std::vector<double> inner(static_cast<std::size_t>(dim) * dim, 0.0);
  std::vector<double> tmp(static_cast<std::size_t>(dim) * dim, 0.0);
  for (int r = 0; r < dim; ++r) {
    for (int k = 0; k < dim; ++k) {
      const double a = root1[static_cast<std::size_t>(r) * dim + k];
      for (int c = 0; c < dim; ++c) {
        tmp[static_cast<std::size_t>(r) * dim + c] += a * cov2[static_cast<std::size_t>(k) * dim + c];
      }
    }
  }
  for (int r = 0; r < dim; ++r) {
    for (int k = 0; k < dim; ++k) {
      const double a = tmp[static_cast<std::size_t>(r) * dim + k];
      for (int c = 0; c < dim; ++c) {
        inner[static_cast<std::size_t>(r) * dim + c] += a * root1[static_cast<std::size_t>(k) * dim + c];
      }
    }
  }
  // Symmetrize against round-off before the eigen solve.
  for (int r = 0; r < dim; ++r) {
    for (int c = r + 1; c < dim; ++c) {
      const double s = 0.5 * (inner[static_cast<std::size_t>(r) * dim + c] +
                              inner[static_cast<std::size_t>(c) * dim + r]);
      inner[static_cast<std::size_t>(r) * dim + c] = s;
      inner[static_cast<std::size_t>(c) * dim + r] = s;
    }
  }
  double trace_sqrt = 0.0;
  for (double lambda : symmetric_eigenvalues(inner, dim)) {
    trace_sqrt += std::sqrt(std::max(0.0, lambda));
  }
  double trace1 = 0.0, trace2 = 0.0;
  for (int i = 0; i < dim; ++i) {
    trace1 += cov1[static_cast<std::size_t>(i) * dim + i];
    trace2 += cov2[static_cast<std::size_t>(i) * dim + i];
  }
  const double dist2 = mean_gap2 + trace1 + trace2 - 2.0 * trace_sqrt;
  return std::max(0.0, dist2);
}

std::string eval_report_to_json(const EvalReport& report) {
  nlohmann::json doc;
  doc["version"] = report.version;
  doc["aggregates"] = {
      {"count", report.per_plan.size()},
      {"mean_compatibility", report.mean_compatibility},
      {"validity_fraction", report.validity_fraction},
  };
  nlohmann::json plans = nlohmann::json::array();
  for (const auto& p : report.per_plan) {
    plans.push_back({{"index", p.index}, {"compatibility", p.compatibility}, {"valid", p.valid}});
  }
  doc["per_plan"] = std::move(plans);
  return doc.dump(2);
}

}  // namespace floordiff
