#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "floordiff/floorplan.hpp"

namespace floordiff {

// Rooms are copied from the room loops; each door is assigned to the rooms
// whose boundary it touches or overlaps within `tol` pixels. Two incident
// rooms make an interior edge, one makes a front door, anything else is kept
// dangling (with its incident rooms as endpoints) and penalized by the edit
// distance.
BubbleDiagram reconstruct_bubble_diagram(const Floorplan& plan, double tol = 2.0);

// Graph edit distance between two diagrams: the minimum over type-preserving
// bijections of same-type rooms of missing edges + extraneous edges +
// door-type mismatches, plus one per unmatched room when the room multisets
// differ. Exact search; the enumeration is capped (eight same-type rooms are
// always within the cap).
int compatibility(const BubbleDiagram& input, const BubbleDiagram& reconstructed);

struct ValidityReport {
  int total = 0;
  int valid = 0;
  std::map<std::string, int> violation_counts;  // keyed by violation code name

  double pass_fraction() const { return total == 0 ? 0.0 : static_cast<double>(valid) / total; }
};

ValidityReport validity_report(const std::vector<Floorplan>& plans);

// Squared Frechet distance between Gaussian fits of handcrafted geometric
// features (room areas, aspect ratios, corner counts, centroid dispersion).
// Zero for identical sets; needs at least two plans per side.
double diversity_proxy(const std::vector<Floorplan>& set_a, const std::vector<Floorplan>& set_b);

// Feature vector behind the proxy, exposed for tests.
std::vector<double> plan_features(const Floorplan& plan);

struct EvalReport {
  struct PerPlan {
    int index = 0;
    int compatibility = 0;
    bool valid = false;
  };
  int version = 1;
  std::vector<PerPlan> per_plan;
  double mean_compatibility = 0.0;
  double validity_fraction = 0.0;
};

std::string eval_report_to_json(const EvalReport& report);

}  // namespace floordiff
