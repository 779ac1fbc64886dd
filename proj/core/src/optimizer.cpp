#include "floordiff/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace floordiff::num {

OptimizerState OptimizerState::init(const ParamStore& params, AdamWConfig config) {
  OptimizerState s;
  s.config = config;
  s.first_moment.reserve(params.count());
  s.second_moment.reserve(params.count());
  for (std::size_t i = 0; i < params.count(); ++i) {
    s.first_moment.emplace_back(params.tensor(i).shape());
    s.second_moment.emplace_back(params.tensor(i).shape());
  }
  return s;
}

void adamw_step(ParamStore& params, const std::vector<Tensor>& grads, OptimizerState& state) {
  if (grads.size() != params.count() || state.first_moment.size() != params.count()) {
    throw std::invalid_argument("adamw_step: gradient/state count mismatch");
  }
  state.step += 1;
  const AdamWConfig& c = state.config;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.count(); ++i) {
    Tensor& p = params.tensor(i);
    const Tensor& g = grads[i];
    if (!p.same_shape(g)) {
      throw std::invalid_argument("adamw_step: gradient shape " + g.shape_str() +
                                  " does not match parameter " + params.name(i) + " " + p.shape_str());
    }
    Tensor& m = state.first_moment[i];
    Tensor& v = state.second_moment[i];
    for (std::int64_t j = 0; j < p.size(); ++j) {
      m[j] = c.beta1 * m[j] + (1.0 - c.beta1) * g[j];
      v[j] = c.beta2 * v[j] + (1.0 - c.beta2) * g[j] * g[j];
      const double m_hat = m[j] / bc1;
      const double v_hat = v[j] / bc2;
      p[j] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.eps);
      p[j] -= c.learning_rate * c.weight_decay * p[j];
    }
  }
}

}  // namespace floordiff::num
