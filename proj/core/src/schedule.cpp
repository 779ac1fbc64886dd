#include "floordiff/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace floordiff {

namespace {

constexpr double kScheduleOffset = 0.008;
constexpr double kAlphaFloor = 0.001;

void check_step(int t, int steps, const char* who) {
  if (t < 1 || t > steps) {
    throw std::invalid_argument(std::string(who) + ": step " + std::to_string(t) +
                                " outside [1, " + std::to_string(steps) + "]");
  }
}

}  // namespace

NoiseSchedule cosine_schedule(int steps) {
  if (steps < 1) throw std::invalid_argument("cosine_schedule: steps must be >= 1");
  auto f = [steps](int t) {
    const double phase = ((static_cast<double>(t) / steps + kScheduleOffset) / (1.0 + kScheduleOffset)) *
                         std::numbers::pi / 2.0;
    const double c = std::cos(phase);
    return c * c;
  };
  NoiseSchedule sched;
  sched.steps = steps;
  sched.gamma.resize(static_cast<std::size_t>(steps) + 1);
  sched.alpha.resize(static_cast<std::size_t>(steps) + 1);
  sched.gamma[0] = 1.0;
  sched.alpha[0] = 1.0;
  const double f0 = f(0);
  double prev = f0;
  for (int t = 1; t <= steps; ++t) {
    const double ft = f(t);
    const double alpha = std::clamp(ft / prev, kAlphaFloor, 1.0);
    sched.alpha[static_cast<std::size_t>(t)] = alpha;
    sched.gamma[static_cast<std::size_t>(t)] = sched.gamma[static_cast<std::size_t>(t - 1)] * alpha;
    prev = ft;
  }
  return sched;
}

double NoiseSchedule::posterior_variance(int t) const {
  check_step(t, steps, "posterior_variance");
  const double g_t = gamma[static_cast<std::size_t>(t)];
  const double g_prev = gamma[static_cast<std::size_t>(t - 1)];
  const double beta = 1.0 - alpha[static_cast<std::size_t>(t)];
  return beta * (1.0 - g_prev) / (1.0 - g_t);
}

void NoiseSchedule::posterior_mean_coeffs(int t, double& x0_coeff, double& xt_coeff) const {
  check_step(t, steps, "posterior_mean_coeffs");
  const double g_t = gamma[static_cast<std::size_t>(t)];
  const double g_prev = gamma[static_cast<std::size_t>(t - 1)];
  const double a_t = alpha[static_cast<std::size_t>(t)];
  const double beta = 1.0 - a_t;
  x0_coeff = std::sqrt(g_prev) * beta / (1.0 - g_t);
  xt_coeff = std::sqrt(a_t) * (1.0 - g_prev) / (1.0 - g_t);
}

num::Tensor forward_sample(const num::Tensor& x0, int t, const num::Tensor& eps, const NoiseSchedule& sched) {
  if (t < 0 || t > sched.steps) {
    throw std::invalid_argument("forward_sample: step " + std::to_string(t) + " outside [0, " +
                                std::to_string(sched.steps) + "]");
  }
  if (!x0.same_shape(eps)) {
    throw std::invalid_argument("forward_sample: shape mismatch " + x0.shape_str() + " vs " + eps.shape_str());
  }
  const double g = sched.gamma[static_cast<std::size_t>(t)];
  const double signal = std::sqrt(g);
  const double noise = std::sqrt(1.0 - g);
  num::Tensor out(x0.shape());
  for (std::int64_t i = 0; i < out.size(); ++i) out[i] = signal * x0[i] + noise * eps[i];
  return out;
}

num::Tensor x0_from_eps(const num::Tensor& xt, int t, const num::Tensor& eps_hat, const NoiseSchedule& sched) {
  check_step(t, sched.steps, "x0_from_eps");
  if (!xt.same_shape(eps_hat)) {
    throw std::invalid_argument("x0_from_eps: shape mismatch " + xt.shape_str() + " vs " + eps_hat.shape_str());
  }
  const double g = sched.gamma[static_cast<std::size_t>(t)];
  const double inv_signal = 1.0 / std::sqrt(g);
  const double noise = std::sqrt(1.0 - g);
  num::Tensor out(xt.shape());
  for (std::int64_t i = 0; i < out.size(); ++i) out[i] = (xt[i] - noise * eps_hat[i]) * inv_signal;
  return out;
}

num::Tensor reverse_step(const num::Tensor& xt, int t, const num::Tensor& eps_hat,
                         const NoiseSchedule& sched, Rng& rng, const num::Tensor* x0_override) {
  check_step(t, sched.steps, "reverse_step");
  num::Tensor x0_hat;
  if (x0_override != nullptr) {
    if (!x0_override->same_shape(xt)) {
      throw std::invalid_argument("reverse_step: override shape " + x0_override->shape_str() +
                                  " does not match " + xt.shape_str());
    }
    x0_hat = *x0_override;
  } else {
    x0_hat = x0_from_eps(xt, t, eps_hat, sched);
  }
  double c0 = 0.0, ct = 0.0;
  sched.posterior_mean_coeffs(t, c0, ct);
  const double sigma = t > 1 ? std::sqrt(sched.posterior_variance(t)) : 0.0;
  num::Tensor out(xt.shape());
  for (std::int64_t i = 0; i < out.size(); ++i) {
    const double z = t > 1 ? rng.normal() : 0.0;
    out[i] = c0 * x0_hat[i] + ct * xt[i] + sigma * z;
  }
  return out;
}

}  // namespace floordiff
