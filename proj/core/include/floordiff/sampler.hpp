#pragma once

#include <functional>

#include "floordiff/denoiser.hpp"
#include "floordiff/floorplan.hpp"
#include "floordiff/schedule.hpp"

namespace floordiff {

// Reverse-trajectory state for one sample.
struct SampleState {
  num::Tensor coords;  // [n, 2], continuous
  int t = 0;
  Conditioning cond;
  ComponentGraph graph;
  AttentionMasks masks;
};

struct StepTrace {
  int t = 0;
  bool discrete_override = false;
};

using StepHook = std::function<void(const StepTrace&)>;

// Full reverse process: draws corner counts from the histogram (or
// overrides), initializes coordinates from N(0, 1), and denoises from t = T
// down to 1. For t < config.t_disc_test the discrete head's thresholded
// coordinates replace the x0 estimate in the posterior step, and the final
// plan is read from the last discrete output. Capacity violations throw
// before any compute. `predict_x0` selects the x0-target interpretation of
// the continuous head (the default is noise prediction).
Floorplan sample(const DenoiserParams& model, const NoiseSchedule& sched,
                 const BubbleDiagram& diagram, const CornerHistogram& histogram,
                 const CornerCountOverrides& overrides, Rng& rng, const StepHook& hook = {},
                 bool predict_x0 = false);

}  // namespace floordiff
