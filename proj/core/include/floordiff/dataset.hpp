#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "floordiff/floorplan.hpp"
#include "floordiff/rng.hpp"

namespace floordiff {

enum class Provenance { kIngested, kSynthetic, kAugmented };

// A corpus pairs every plan with its constraint diagram. Loop order is
// canonical (rooms then doors) and loop kinds match the diagram entries.
struct Corpus {
  struct Entry {
    Floorplan plan;
    BubbleDiagram diagram;
  };
  std::vector<Entry> entries;
  Provenance provenance = Provenance::kIngested;

  std::size_t size() const { return entries.size(); }
};

struct IngestDiagnostic {
  int line = 0;  // 1-based
  std::string message;
};

struct IngestResult {
  Corpus corpus;
  std::vector<IngestDiagnostic> diagnostics;
};

// Reads the canonical corpus format: UTF-8 text, one JSON object per line,
// each carrying `loops` and `diagram` (see README for the field reference).
// Invalid records are skipped and reported; an empty valid set throws.
IngestResult ingest(const std::filesystem::path& path);

void write_corpus(const std::filesystem::path& path, const Corpus& corpus);

// Single-record (de)serialization used by both the corpus files and the CLI.
std::string plan_to_json_line(const Floorplan& plan, const BubbleDiagram& diagram);
Corpus::Entry plan_from_json(const std::string& text);

std::string diagram_to_json(const BubbleDiagram& diagram);
BubbleDiagram diagram_from_json(const std::string& text);

// Procedural axis-aligned layouts: a guillotine partition of the canvas into
// `rooms_per_plan` rooms, interior doors on shared walls forming a connected
// diagram, and one front door on the outer boundary. Every plan validates
// and reconstructs to its stored diagram.
Corpus synthesize(int plan_count, int rooms_min, int rooms_max, Rng& rng);
inline Corpus synthesize(int plan_count, int rooms_per_plan, Rng& rng) {
  return synthesize(plan_count, rooms_per_plan, rooms_per_plan, rng);
}

// Per room: break the wall farthest from the house center by inserting two
// corners at random offsets (depth from the room half-extent, position from
// the wall center). A candidate is kept with probability keep_prob and only
// if the plan stays valid, rooms do not overlap, and the reconstructed
// diagram is unchanged; otherwise the room reverts.
Floorplan non_manhattan_augment(const Floorplan& plan, double keep_prob, Rng& rng,
                                double incidence_tol = 2.0);

Corpus augment_corpus(const Corpus& corpus, double keep_prob, Rng& rng,
                      double incidence_tol = 2.0);

CornerHistogram build_histogram(const Corpus& corpus);

struct SplitResult {
  Corpus train;  // plans with a room count != k
  Corpus eval;   // plans with exactly k rooms
  std::string warning;  // set when either side is empty
};

SplitResult split_by_room_count(const Corpus& corpus, int k);

}  // namespace floordiff
