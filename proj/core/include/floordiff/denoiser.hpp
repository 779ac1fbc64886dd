#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "floordiff/floorplan.hpp"
#include "floordiff/params.hpp"
#include "floordiff/rng.hpp"
#include "floordiff/tape.hpp"
#include "floordiff/tensor.hpp"

namespace floordiff {

struct DenoiserConfig {
  int embed_dim = 64;  // d; 512 reproduces the reference scale, 64 is the desk default
  int heads = 4;
  int blocks_continuous = 4;
  int blocks_discrete = 2;
  int wall_points = 8;  // L: points sampled along the wall to the next corner
  int t_disc_train = 20;
  int t_disc_test = 32;
  int type_dim = kTypeOneHotDim;
  int index_dim = kIndexOneHotDim;
  int bits = 8;
  bool use_ffn = false;          // extra feed-forward sublayer; off by default
  bool time_as_fraction = true;  // feed t/T instead of raw t

  // [AU, R_i, one_hot(i), one_hot(j), t]
  int continuous_input_width() const {
    return 2 * (wall_points + 1) + type_dim + 2 * index_dim + 1;
  }
  // [AU, int2bit(x, y), R_i, one_hot(i), one_hot(j), t]
  int discrete_input_width() const { return continuous_input_width() + 2 * bits; }
  int head_dim() const { return embed_dim / heads; }

  void validate() const;
};

// MSB-first binary expansion of an integer coordinate in [0, 255].
std::array<double, 8> int2bit(int v);
// Threshold at 0.5, then reassemble. Accepts raw head outputs.
int bit2int(std::span<const double> bits);

// Per-corner denoising context. Corners are stored flat, loops concatenated
// in rooms-then-doors order.
struct CornerConditioning {
  int component = 0;  // i
  int corner = 0;     // j within the loop
  ComponentType type = ComponentType::kUnknown;
  int next_flat = 0;  // flat index of the next corner in the same loop
  bool padding = false;
};

struct Conditioning {
  std::vector<CornerConditioning> corners;
  std::vector<ComponentType> component_types;
  std::vector<int> corner_counts;

  int total() const { return static_cast<int>(corners.size()); }
  int real_count() const;

  // Lays out corners for the given component types and corner counts,
  // appending `pad_to - total` inert padding corners when pad_to is larger.
  // Throws when a component or corner index exceeds one-hot capacity.
  static Conditioning from_components(const std::vector<ComponentType>& types,
                                      const std::vector<int>& counts, int pad_to = 0);
};

// Boolean attention masks over corner pairs plus their additive (0 / -inf)
// forms. CSA restricts to the same component, GSA spans all real corners,
// RCA follows the room<->door constraint graph. Padding corners are excluded
// from every mask.
struct AttentionMasks {
  int n = 0;
  std::vector<std::uint8_t> csa, gsa, rca;
  num::Tensor csa_additive, gsa_additive, rca_additive;

  bool at(const std::vector<std::uint8_t>& m, int a, int b) const {
    return m[static_cast<std::size_t>(a) * n + b] != 0;
  }
};

AttentionMasks build_masks(const ComponentGraph& graph, const Conditioning& cond);

struct DenoiserParams {
  DenoiserConfig config;
  num::ParamStore store;

  static DenoiserParams init(const DenoiserConfig& config, Rng& rng);
};

// Learnable scalar count implied by the configuration.
std::int64_t parameter_count(const DenoiserConfig& config);

// Observer for post-softmax attention probabilities, used by tests.
struct AttentionProbe {
  std::function<void(const std::string& branch, int block, const std::string& attention, int head,
                     const num::Tensor& probs)>
      on_probs;
};

// One forward computation of the denoiser on a caller-owned tape. Parameter
// leaves are created lazily and shared across both branches.
class DenoiserPass {
 public:
  DenoiserPass(num::Tape& tape, const DenoiserParams& params, const AttentionProbe* probe = nullptr);

  num::Var param(const std::string& name);

  // Continuous branch: embeds [AU(coords), conditions, t] and runs the
  // masked attention blocks; returns the per-corner 2-vector prediction
  // (the noise, or x0 when training with the x0 target).
  num::Var continuous(const Conditioning& cond, const AttentionMasks& masks, num::Var coords,
                      int t, int total_steps);

  // Discrete branch: quantizes the x0 estimate, embeds [AU, int2bit,
  // conditions, t] and returns raw per-coordinate bit values [n, 2*bits].
  // The estimate enters detached (rounding has zero gradient a.e.).
  num::Var discrete(const Conditioning& cond, const AttentionMasks& masks,
                    const num::Tensor& x0_estimate, int t, int total_steps);

 private:
  num::Var attention_stack(num::Var x, const AttentionMasks& masks, const std::string& prefix, int blocks);

  num::Tape& tape_;
  const DenoiserParams& params_;
  const AttentionProbe* probe_;
  std::vector<num::Var> param_vars_;
};

// Inference helpers running on a private tape.
num::Tensor predict_continuous(const DenoiserParams& params, const Conditioning& cond,
                               const AttentionMasks& masks, const num::Tensor& coords, int t,
                               int total_steps);
num::Tensor predict_bits(const DenoiserParams& params, const Conditioning& cond,
                         const AttentionMasks& masks, const num::Tensor& x0_estimate, int t,
                         int total_steps);

// Thresholded integer coordinates from raw bit values; one [x, y] per corner.
std::vector<std::array<int, 2>> coords_from_bits(const num::Tensor& bits_raw);

// L2 losses with padding excluded. The discrete term participates iff
// t < config.t_disc_train; bits_pred may be invalid otherwise.
num::Var denoiser_loss(num::Tape& tape, num::Var continuous_pred, const num::Tensor& continuous_target,
                       std::optional<num::Var> bits_pred, const num::Tensor& bits_target, int t,
                       const DenoiserConfig& config, const Conditioning& cond);

// Training view of one plan: conditioning, continuous coordinates, bit
// targets, constraint graph and masks, all in canonical component order.
struct EncodedPlan {
  Conditioning cond;
  num::Tensor x0;    // [n, 2] in [-1, 1]
  num::Tensor bits;  // [n, 2*bits] targets in {0, 1}
  ComponentGraph graph;
  AttentionMasks masks;
};

EncodedPlan encode_plan(const Floorplan& plan, const BubbleDiagram& diagram,
                        const DenoiserConfig& config, int pad_to = 0);

// Assembles integer coordinates back into loops following the conditioning
// layout. Padding corners are never read.
Floorplan floorplan_from_coords(const Conditioning& cond, std::span<const std::array<int, 2>> coords);

}  // namespace floordiff
