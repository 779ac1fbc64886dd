#pragma once

#include <cstdint>
#include <vector>

#include "floordiff/params.hpp"
#include "floordiff/tensor.hpp"

namespace floordiff::num {

struct AdamWConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

// Adam moments with bias correction; the weight decay is decoupled from the
// gradient step (p <- p - lr*lambda*p applied separately).
struct OptimizerState {
  AdamWConfig config;
  std::int64_t step = 0;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;

  static OptimizerState init(const ParamStore& params, AdamWConfig config);
};

// One update over all parameters. `grads` must be parallel to `params`.
void adamw_step(ParamStore& params, const std::vector<Tensor>& grads, OptimizerState& state);

}  // namespace floordiff::num
