#include "floordiff/sampler.hpp"

#include <stdexcept>

namespace floordiff {

Floorplan sample(const DenoiserParams& model, const NoiseSchedule& sched,
                 const BubbleDiagram& diagram, const CornerHistogram& histogram,
                 const CornerCountOverrides& overrides, Rng& rng, const StepHook& hook,
                 bool predict_x0) {
  const DenoiserConfig& cfg = model.config;
  cfg.validate();
  diagram.validate();
  if (diagram.component_count() > kMaxComponents) {
    throw std::invalid_argument("sample: " + std::to_string(diagram.component_count()) +
                                " components exceed capacity " + std::to_string(kMaxComponents));
  }

  const std::vector<int> counts = sample_corner_counts(histogram, diagram, overrides, rng);
  std::vector<ComponentType> types;
  types.reserve(static_cast<std::size_t>(diagram.component_count()));
  for (ComponentType t : diagram.rooms) types.push_back(t);
  for (const auto& d : diagram.doors) types.push_back(d.kind);

  SampleState state;
  state.cond = Conditioning::from_components(types, counts);
  state.graph = build_component_graph(diagram, LoopOrder::rooms_then_doors(diagram));
  state.masks = build_masks(state.graph, state.cond);

  const int n = state.cond.total();
  state.coords = num::Tensor({n, 2});
  for (std::int64_t i = 0; i < state.coords.size(); ++i) state.coords[i] = rng.normal();

  std::vector<std::array<int, 2>> last_discrete;
  for (int t = sched.steps; t >= 1; --t) {
    state.t = t;
    const num::Tensor prediction =
        predict_continuous(model, state.cond, state.masks, state.coords, t, sched.steps);
    const num::Tensor x0_estimate =
        predict_x0 ? prediction : x0_from_eps(state.coords, t, prediction, sched);
    const bool use_discrete = t < cfg.t_disc_test;
    num::Tensor x0_override;
    if (use_discrete) {
      const num::Tensor bits =
          predict_bits(model, state.cond, state.masks, x0_estimate, t, sched.steps);
      last_discrete = coords_from_bits(bits);
      x0_override = num::Tensor({n, 2});
      for (int a = 0; a < n; ++a) {
        x0_override.at(a, 0) = dequantize(last_discrete[static_cast<std::size_t>(a)][0]);
        x0_override.at(a, 1) = dequantize(last_discrete[static_cast<std::size_t>(a)][1]);
      }
    }
    if (hook) hook({t, use_discrete});
    const num::Tensor* override_ptr =
        use_discrete ? &x0_override : (predict_x0 ? &x0_estimate : nullptr);
    state.coords = reverse_step(state.coords, t, prediction, sched, rng, override_ptr);
  }

  if (last_discrete.empty()) {
    // t_disc_test <= 1 means the discrete head never ran; quantize the final
    // continuous state so the integer-output contract still holds.
    last_discrete.resize(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) {
      last_discrete[static_cast<std::size_t>(a)] = {quantize(state.coords.at(a, 0)),
                                                    quantize(state.coords.at(a, 1))};
    }
  }
  return floorplan_from_coords(state.cond, last_discrete);
}

}  // namespace floordiff
