#include "floordiff/denoiser.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace floordiff {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::string block_prefix(const std::string& branch, int block) {
  return branch + ".b" + std::to_string(block);
}

}  // namespace

void DenoiserConfig::validate() const {
  if (embed_dim <= 0 || heads <= 0 || embed_dim % heads != 0) {
    throw std::invalid_argument("DenoiserConfig: embed_dim must be a positive multiple of heads");
  }
  if (blocks_continuous < 1 || blocks_discrete < 1) {
    throw std::invalid_argument("DenoiserConfig: block counts must be >= 1");
  }
  if (wall_points < 1) throw std::invalid_argument("DenoiserConfig: wall_points must be >= 1");
  if (bits != 8) throw std::invalid_argument("DenoiserConfig: bits must be 8 for the 0..255 grid");
  if (type_dim < kComponentTypeCount) {
    throw std::invalid_argument("DenoiserConfig: type_dim below category count");
  }
  if (index_dim < 1) throw std::invalid_argument("DenoiserConfig: index_dim must be >= 1");
  if (t_disc_train < 0 || t_disc_test < 1) {
    throw std::invalid_argument("DenoiserConfig: discrete thresholds out of range");
  }
}

std::array<double, 8> int2bit(int v) {
  if (v < 0 || v > kCoordMax) {
    throw std::invalid_argument("int2bit: value " + std::to_string(v) + " outside [0, 255]");
  }
  std::array<double, 8> bits{};
  for (int b = 0; b < 8; ++b) bits[static_cast<std::size_t>(b)] = (v >> (7 - b)) & 1;
  return bits;
}

int bit2int(std::span<const double> bits) {
  if (bits.size() != 8) throw std::invalid_argument("bit2int: expected 8 values");
  int v = 0;
  for (int b = 0; b < 8; ++b) {
    if (bits[static_cast<std::size_t>(b)] >= 0.5) v |= 1 << (7 - b);
  }
  return v;
}

int Conditioning::real_count() const {
  int n = 0;
  for (const auto& c : corners) n += c.padding ? 0 : 1;
  return n;
}

Conditioning Conditioning::from_components(const std::vector<ComponentType>& types,
                                           const std::vector<int>& counts, int pad_to) {
  if (types.size() != counts.size()) {
    throw std::invalid_argument("Conditioning: types/counts size mismatch");
  }
  if (types.size() > static_cast<std::size_t>(kMaxComponents)) {
    throw std::invalid_argument("Conditioning: " + std::to_string(types.size()) +
                                " components exceed index capacity " + std::to_string(kMaxComponents));
  }
  Conditioning cond;
  cond.component_types = types;
  cond.corner_counts = counts;
  int flat = 0;
  for (std::size_t i = 0; i < types.size(); ++i) {
    const int n = counts[i];
    if (n < min_corners(types[i]) || n > kMaxLoopCorners) {
      throw std::invalid_argument("Conditioning: corner count " + std::to_string(n) +
                                  " out of bounds for " + std::string(to_string(types[i])));
    }
    const int base = flat;
    for (int j = 0; j < n; ++j) {
      CornerConditioning cc;
      cc.component = static_cast<int>(i);
      cc.corner = j;
      cc.type = types[i];
      cc.next_flat = base + (j + 1) % n;
      cond.corners.push_back(cc);
      ++flat;
    }
  }
  for (int p = flat; p < pad_to; ++p) {
    CornerConditioning cc;
    cc.component = 0;
    cc.corner = 0;
    cc.type = types.empty() ? ComponentType::kUnknown : types[0];
    cc.next_flat = p;  // padding corners point at themselves
    cc.padding = true;
    cond.corners.push_back(cc);
  }
  return cond;
}

AttentionMasks build_masks(const ComponentGraph& graph, const Conditioning& cond) {
  const int n = cond.total();
  AttentionMasks masks;
  masks.n = n;
  masks.csa.assign(static_cast<std::size_t>(n) * n, 0);
  masks.gsa.assign(static_cast<std::size_t>(n) * n, 0);
  masks.rca.assign(static_cast<std::size_t>(n) * n, 0);
  for (int a = 0; a < n; ++a) {
    const auto& ca = cond.corners[static_cast<std::size_t>(a)];
    if (ca.padding) continue;
    for (int b = 0; b < n; ++b) {
      const auto& cb = cond.corners[static_cast<std::size_t>(b)];
      if (cb.padding) continue;
      const std::size_t at = static_cast<std::size_t>(a) * n + b;
      masks.gsa[at] = 1;
      if (ca.component == cb.component) masks.csa[at] = 1;
      if (graph.adjacent(ca.component, cb.component)) masks.rca[at] = 1;
    }
  }
  auto to_additive = [n](const std::vector<std::uint8_t>& m) {
    num::Tensor t({n, n});
    for (std::int64_t i = 0; i < t.size(); ++i) t[i] = m[static_cast<std::size_t>(i)] ? 0.0 : kNegInf;
    return t;
  };
  masks.csa_additive = to_additive(masks.csa);
  masks.gsa_additive = to_additive(masks.gsa);
  masks.rca_additive = to_additive(masks.rca);
  return masks;
}

namespace {

num::Tensor xavier_uniform(int fan_in, int fan_out, Rng& rng) {
  num::Tensor w({fan_in, fan_out});
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  for (std::int64_t i = 0; i < w.size(); ++i) w[i] = rng.uniform(-limit, limit);
  return w;
}

void add_linear(num::ParamStore& store, const std::string& name, int in, int out, Rng& rng) {
  store.add(name + ".weight", xavier_uniform(in, out, rng));
  store.add(name + ".bias", num::Tensor({out}));
}

void add_branch(num::ParamStore& store, const std::string& branch, int input_width, int blocks,
                int out_width, const DenoiserConfig& cfg, Rng& rng) {
  const int d = cfg.embed_dim;
  const int dh = cfg.head_dim();
  add_linear(store, branch + ".embed", input_width, d, rng);
  for (int b = 0; b < blocks; ++b) {
    const std::string prefix = block_prefix(branch, b);
    for (const char* att : {"csa", "gsa", "rca"}) {
      for (int h = 0; h < cfg.heads; ++h) {
        const std::string head = prefix + "." + att + ".h" + std::to_string(h);
        store.add(head + ".wq", xavier_uniform(d, dh, rng));
        store.add(head + ".wk", xavier_uniform(d, dh, rng));
        store.add(head + ".wv", xavier_uniform(d, dh, rng));
      }
    }
    store.add(prefix + ".norm.gain", num::Tensor::full({d}, 1.0));
    store.add(prefix + ".norm.bias", num::Tensor({d}));
    if (cfg.use_ffn) {
      add_linear(store, prefix + ".ffn.inner", d, 4 * d, rng);
      add_linear(store, prefix + ".ffn.outer", 4 * d, d, rng);
      store.add(prefix + ".norm2.gain", num::Tensor::full({d}, 1.0));
      store.add(prefix + ".norm2.bias", num::Tensor({d}));
    }
  }
  add_linear(store, branch + ".out", d, out_width, rng);
}

}  // namespace

DenoiserParams DenoiserParams::init(const DenoiserConfig& config, Rng& rng) {
  config.validate();
  DenoiserParams params;
  params.config = config;
  add_branch(params.store, "cont", config.continuous_input_width(), config.blocks_continuous, 2,
             config, rng);
  add_branch(params.store, "disc", config.discrete_input_width(), config.blocks_discrete,
             2 * config.bits, config, rng);
  return params;
}

std::int64_t parameter_count(const DenoiserConfig& config) {
  config.validate();
  const std::int64_t d = config.embed_dim;
  const std::int64_t dh = config.head_dim();
  auto linear = [](std::int64_t in, std::int64_t out) { return in * out + out; };
  std::int64_t per_block = 3 * config.heads * 3 * d * dh + 2 * d;
  if (config.use_ffn) per_block += linear(d, 4 * d) + linear(4 * d, d) + 2 * d;
  const std::int64_t cont = linear(config.continuous_input_width(), d) +
                            config.blocks_continuous * per_block + linear(d, 2);
  const std::int64_t disc = linear(config.discrete_input_width(), d) +
                            config.blocks_discrete * per_block + linear(d, 2 * config.bits);
  return cont + disc;
}

DenoiserPass::DenoiserPass(num::Tape& tape, const DenoiserParams& params, const AttentionProbe* probe)
    : tape_(tape), params_(params), probe_(probe) {
  param_vars_.assign(params_.store.count(), num::Var{});
}

num::Var DenoiserPass::param(const std::string& name) {
  const int idx = params_.store.index_of(name);
  if (idx < 0) throw std::out_of_range("DenoiserPass: unknown parameter " + name);
  num::Var& v = param_vars_[static_cast<std::size_t>(idx)];
  if (!v.valid()) v = tape_.leaf(params_.store.tensor(static_cast<std::size_t>(idx)));
  return v;
}

namespace {

// Constant part of the embedding: [R_i, one_hot(i), one_hot(j), t_enc].
num::Tensor conditioning_features(const Conditioning& cond, const DenoiserConfig& cfg, int t,
                                  int total_steps) {
  const int n = cond.total();
  const int width = cfg.type_dim + 2 * cfg.index_dim + 1;
  const double t_enc = cfg.time_as_fraction ? static_cast<double>(t) / total_steps
                                            : static_cast<double>(t);
  num::Tensor features({n, width});
  for (int a = 0; a < n; ++a) {
    const auto& cc = cond.corners[static_cast<std::size_t>(a)];
    if (cc.padding) continue;  // padding rows stay zero
    double* row = features.data() + static_cast<std::size_t>(a) * width;
    const int type_idx = static_cast<int>(cc.type);
    if (type_idx >= cfg.type_dim) throw std::invalid_argument("conditioning: type one-hot overflow");
    if (cc.component >= cfg.index_dim || cc.corner >= cfg.index_dim) {
      throw std::invalid_argument("conditioning: index one-hot overflow");
    }
    row[type_idx] = 1.0;
    row[cfg.type_dim + cc.component] = 1.0;
    row[cfg.type_dim + cfg.index_dim + cc.corner] = 1.0;
    row[width - 1] = t_enc;
  }
  return features;
}

std::vector<int> next_corner_rows(const Conditioning& cond) {
  std::vector<int> rows;
  rows.reserve(static_cast<std::size_t>(cond.total()));
  for (const auto& cc : cond.corners) rows.push_back(cc.next_flat);
  return rows;
}

}  // namespace

num::Var DenoiserPass::attention_stack(num::Var x, const AttentionMasks& masks,
                                       const std::string& branch, int blocks) {
  const DenoiserConfig& cfg = params_.config;
  const double att_scale = 1.0 / std::sqrt(static_cast<double>(cfg.head_dim()));
  const std::array<const num::Tensor*, 3> additive = {&masks.csa_additive, &masks.gsa_additive,
                                                      &masks.rca_additive};
  const std::array<const char*, 3> names = {"csa", "gsa", "rca"};
  for (int b = 0; b < blocks; ++b) {
    const std::string prefix = block_prefix(branch, b);
    num::Var type_sum{};
    for (int ty = 0; ty < 3; ++ty) {
      std::vector<num::Var> headed;
      headed.reserve(static_cast<std::size_t>(cfg.heads));
      for (int h = 0; h < cfg.heads; ++h) {
        const std::string head = prefix + "." + names[ty] + ".h" + std::to_string(h);
        const num::Var q = tape_.matmul(x, param(head + ".wq"));
        const num::Var k = tape_.matmul(x, param(head + ".wk"));
        const num::Var v = tape_.matmul(x, param(head + ".wv"));
        const num::Var logits = tape_.scale(tape_.matmul_nt(q, k), att_scale);
        const num::Var probs = tape_.softmax_lastdim(logits, *additive[static_cast<std::size_t>(ty)]);
        if (probe_ != nullptr && probe_->on_probs) {
          probe_->on_probs(branch, b, names[ty], h, tape_.value(probs));
        }
        headed.push_back(tape_.matmul(probs, v));
      }
      const num::Var type_out = tape_.concat_lastdim(headed);
      type_sum = type_sum.valid() ? tape_.add(type_sum, type_out) : type_out;
    }
    x = tape_.layernorm(tape_.add(x, type_sum), param(prefix + ".norm.gain"),
                        param(prefix + ".norm.bias"));
    if (cfg.use_ffn) {
      num::Var inner = tape_.relu(
          tape_.linear(x, param(prefix + ".ffn.inner.weight"), param(prefix + ".ffn.inner.bias")));
      num::Var outer =
          tape_.linear(inner, param(prefix + ".ffn.outer.weight"), param(prefix + ".ffn.outer.bias"));
      x = tape_.layernorm(tape_.add(x, outer), param(prefix + ".norm2.gain"),
                          param(prefix + ".norm2.bias"));
    }
  }
  return x;
}

num::Var DenoiserPass::continuous(const Conditioning& cond, const AttentionMasks& masks,
                                  num::Var coords, int t, int total_steps) {
  const DenoiserConfig& cfg = params_.config;
  if (masks.n != cond.total()) throw std::invalid_argument("denoiser: masks do not match conditioning");
  if (tape_.value(coords).rows() != cond.total()) {
    throw std::invalid_argument("denoiser: coords rows do not match conditioning");
  }
  // AU on the tape so input-coordinate gradients flow through the walls.
  const num::Var next = tape_.gather_rows(coords, next_corner_rows(cond));
  std::vector<num::Var> pieces;
  pieces.reserve(static_cast<std::size_t>(cfg.wall_points) + 2);
  pieces.push_back(coords);
  for (int k = 1; k <= cfg.wall_points; ++k) {
    const double f = static_cast<double>(k) / cfg.wall_points;
    pieces.push_back(tape_.add(tape_.scale(coords, 1.0 - f), tape_.scale(next, f)));
  }
  pieces.push_back(tape_.leaf(conditioning_features(cond, cfg, t, total_steps)));
  const num::Var embedded = tape_.concat_lastdim(pieces);
  if (tape_.value(embedded).cols() != cfg.continuous_input_width()) {
    throw std::logic_error("denoiser: continuous embedding width mismatch");
  }
  num::Var x = tape_.linear(embedded, param("cont.embed.weight"), param("cont.embed.bias"));
  x = attention_stack(x, masks, "cont", cfg.blocks_continuous);
  return tape_.linear(x, param("cont.out.weight"), param("cont.out.bias"));
}

num::Var DenoiserPass::discrete(const Conditioning& cond, const AttentionMasks& masks,
                                const num::Tensor& x0_estimate, int t, int total_steps) {
  const DenoiserConfig& cfg = params_.config;
  const int n = cond.total();
  if (masks.n != n) throw std::invalid_argument("denoiser: masks do not match conditioning");
  if (x0_estimate.rows() != n || x0_estimate.cols() != 2) {
    throw std::invalid_argument("denoiser: x0 estimate must be [n, 2], got " + x0_estimate.shape_str());
  }
  if (!x0_estimate.all_finite()) {
    throw std::invalid_argument("denoiser: x0 estimate contains non-finite values");
  }
  // Quantize, then build the whole input from the rounded coordinates: both
  // the wall augmentation and the bit features see the same snapped values.
  const num::Tensor cond_features = conditioning_features(cond, cfg, t, total_steps);
  const int width = cfg.discrete_input_width();
  num::Tensor input({n, width});
  const int au_width = 2 * (cfg.wall_points + 1);
  std::vector<std::array<int, 2>> ints(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) {
    ints[static_cast<std::size_t>(a)] = {quantize(x0_estimate.at(a, 0)), quantize(x0_estimate.at(a, 1))};
  }
  for (int a = 0; a < n; ++a) {
    double* row = input.data() + static_cast<std::size_t>(a) * width;
    const auto& cc = cond.corners[static_cast<std::size_t>(a)];
    const auto& self = ints[static_cast<std::size_t>(a)];
    const auto& nxt = ints[static_cast<std::size_t>(cc.next_flat)];
    const std::vector<double> au =
        augment_corner(dequantize(self[0]), dequantize(self[1]), dequantize(nxt[0]),
                       dequantize(nxt[1]), cfg.wall_points);
    for (int c = 0; c < au_width; ++c) row[c] = au[static_cast<std::size_t>(c)];
    const auto bx = int2bit(self[0]);
    const auto by = int2bit(self[1]);
    for (int b = 0; b < cfg.bits; ++b) {
      row[au_width + b] = bx[static_cast<std::size_t>(b)];
      row[au_width + cfg.bits + b] = by[static_cast<std::size_t>(b)];
    }
    const double* cf = cond_features.data() + static_cast<std::size_t>(a) * cond_features.cols();
    for (int c = 0; c < cond_features.cols(); ++c) row[au_width + 2 * cfg.bits + c] = cf[c];
  }
  num::Var x = tape_.linear(tape_.leaf(std::move(input)), param("disc.embed.weight"),
                            param("disc.embed.bias"));
  x = attention_stack(x, masks, "disc", cfg.blocks_discrete);
  return tape_.linear(x, param("disc.out.weight"), param("disc.out.bias"));
}

num::Tensor predict_continuous(const DenoiserParams& params, const Conditioning& cond,
                               const AttentionMasks& masks, const num::Tensor& coords, int t,
                               int total_steps) {
  num::Tape tape;
  DenoiserPass pass(tape, params);
  const num::Var out = pass.continuous(cond, masks, tape.leaf(coords), t, total_steps);
  return tape.value(out);
}

num::Tensor predict_bits(const DenoiserParams& params, const Conditioning& cond,
                         const AttentionMasks& masks, const num::Tensor& x0_estimate, int t,
                         int total_steps) {
  num::Tape tape;
  DenoiserPass pass(tape, params);
  const num::Var out = pass.discrete(cond, masks, x0_estimate, t, total_steps);
  return tape.value(out);
}

std::vector<std::array<int, 2>> coords_from_bits(const num::Tensor& bits_raw) {
  if (bits_raw.rank() != 2 || bits_raw.cols() != 16) {
    throw std::invalid_argument("coords_from_bits: expected [n, 16], got " + bits_raw.shape_str());
  }
  std::vector<std::array<int, 2>> out(static_cast<std::size_t>(bits_raw.rows()));
  for (int r = 0; r < bits_raw.rows(); ++r) {
    const double* row = bits_raw.data() + static_cast<std::size_t>(r) * 16;
    out[static_cast<std::size_t>(r)] = {bit2int({row, 8}), bit2int({row + 8, 8})};
  }
  return out;
}

num::Var denoiser_loss(num::Tape& tape, num::Var continuous_pred, const num::Tensor& continuous_target,
                       std::optional<num::Var> bits_pred, const num::Tensor& bits_target, int t,
                       const DenoiserConfig& config, const Conditioning& cond) {
  const int n = cond.total();
  const int n_real = cond.real_count();
  if (n_real == 0) throw std::invalid_argument("denoiser_loss: no real corners");
  num::Tensor mask2({n, 2});
  for (int a = 0; a < n; ++a) {
    const double m = cond.corners[static_cast<std::size_t>(a)].padding ? 0.0 : 1.0;
    mask2.at(a, 0) = m;
    mask2.at(a, 1) = m;
  }
  const num::Var cont_diff =
      tape.mul_const(tape.sub(continuous_pred, tape.leaf(continuous_target)), std::move(mask2));
  num::Var loss = tape.scale(tape.sum_of_squares(cont_diff), 1.0 / (2.0 * n_real));
  if (t < config.t_disc_train) {
    if (!bits_pred.has_value()) {
      throw std::invalid_argument("denoiser_loss: discrete prediction required for t < " +
                                  std::to_string(config.t_disc_train));
    }
    const int bw = 2 * config.bits;
    num::Tensor mask_bits({n, bw});
    for (int a = 0; a < n; ++a) {
      const double m = cond.corners[static_cast<std::size_t>(a)].padding ? 0.0 : 1.0;
      for (int c = 0; c < bw; ++c) mask_bits.at(a, c) = m;
    }
    const num::Var bit_diff =
        tape.mul_const(tape.sub(*bits_pred, tape.leaf(bits_target)), std::move(mask_bits));
    const num::Var bit_loss = tape.scale(tape.sum_of_squares(bit_diff), 1.0 / (static_cast<double>(bw) * n_real));
    loss = tape.add(loss, bit_loss);
  }
  return loss;
}

EncodedPlan encode_plan(const Floorplan& plan, const BubbleDiagram& diagram,
                        const DenoiserConfig& config, int pad_to) {
  config.validate();
  std::vector<const Loop*> rooms, doors;
  for (const Loop& loop : plan.loops) {
    (is_room(loop.kind) ? rooms : doors).push_back(&loop);
  }
  if (rooms.size() != diagram.rooms.size() || doors.size() != diagram.doors.size()) {
    throw std::invalid_argument("encode_plan: plan loops do not match the diagram");
  }
  for (std::size_t i = 0; i < rooms.size(); ++i) {
    if (rooms[i]->kind != diagram.rooms[i]) {
      throw std::invalid_argument("encode_plan: room type mismatch at index " + std::to_string(i));
    }
  }
  for (std::size_t i = 0; i < doors.size(); ++i) {
    if (doors[i]->kind != diagram.doors[i].kind) {
      throw std::invalid_argument("encode_plan: door type mismatch at index " + std::to_string(i));
    }
  }
  std::vector<const Loop*> ordered = rooms;
  ordered.insert(ordered.end(), doors.begin(), doors.end());
  std::vector<ComponentType> types;
  std::vector<int> counts;
  for (const Loop* loop : ordered) {
    types.push_back(loop->kind);
    counts.push_back(static_cast<int>(loop->corners.size()));
  }
  EncodedPlan encoded;
  encoded.cond = Conditioning::from_components(types, counts, pad_to);
  const int n = encoded.cond.total();
  encoded.x0 = num::Tensor({n, 2});
  encoded.bits = num::Tensor({n, 2 * config.bits});
  int flat = 0;
  for (const Loop* loop : ordered) {
    for (const Corner& c : loop->corners) {
      encoded.x0.at(flat, 0) = dequantize(c.x);
      encoded.x0.at(flat, 1) = dequantize(c.y);
      const auto bx = int2bit(c.x);
      const auto by = int2bit(c.y);
      for (int b = 0; b < config.bits; ++b) {
        encoded.bits.at(flat, b) = bx[static_cast<std::size_t>(b)];
        encoded.bits.at(flat, config.bits + b) = by[static_cast<std::size_t>(b)];
      }
      ++flat;
    }
  }
  encoded.graph = build_component_graph(diagram, LoopOrder::rooms_then_doors(diagram));
  encoded.masks = build_masks(encoded.graph, encoded.cond);
  return encoded;
}

Floorplan floorplan_from_coords(const Conditioning& cond, std::span<const std::array<int, 2>> coords) {
  if (coords.size() < static_cast<std::size_t>(cond.total())) {
    throw std::invalid_argument("floorplan_from_coords: coordinate rows below conditioning size");
  }
  Floorplan plan;
  int flat = 0;
  for (std::size_t i = 0; i < cond.component_types.size(); ++i) {
    Loop loop;
    loop.kind = cond.component_types[i];
    const int n = cond.corner_counts[i];
    loop.corners.reserve(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
      loop.corners.push_back({coords[static_cast<std::size_t>(flat)][0],
                              coords[static_cast<std::size_t>(flat)][1]});
      ++flat;
    }
    plan.loops.push_back(std::move(loop));
  }
  return plan;
}

}  // namespace floordiff
