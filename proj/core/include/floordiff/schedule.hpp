#pragma once

#include <vector>

#include "floordiff/rng.hpp"
#include "floordiff/tensor.hpp"

namespace floordiff {

// Cumulative signal schedule gamma_0..gamma_T with gamma_0 = 1, plus the
// per-step ratios alpha_t = gamma_t / gamma_{t-1}. Built once per process
// configuration; never serialized.
struct NoiseSchedule {
  int steps = 0;                // T
  std::vector<double> gamma;    // size T+1
  std::vector<double> alpha;    // size T+1, alpha[0] unused (= 1)

  double posterior_variance(int t) const;
  // Coefficients (a, b) of the posterior mean a*x0 + b*x_t.
  void posterior_mean_coeffs(int t, double& x0_coeff, double& xt_coeff) const;
};

// Cosine schedule: gamma_t proportional to cos^2(((t/T + s)/(1+s)) * pi/2)
// with s = 0.008, accumulated from per-step ratios clamped to [0.001, 1] so
// the tail never collapses to zero.
NoiseSchedule cosine_schedule(int steps);

// x_t = sqrt(gamma_t) * x0 + sqrt(1 - gamma_t) * eps
num::Tensor forward_sample(const num::Tensor& x0, int t, const num::Tensor& eps, const NoiseSchedule& sched);

// x0 = (x_t - sqrt(1 - gamma_t) * eps_hat) / sqrt(gamma_t); requires t >= 1.
num::Tensor x0_from_eps(const num::Tensor& xt, int t, const num::Tensor& eps_hat, const NoiseSchedule& sched);

// One reverse step: the posterior mean of q(x_{t-1} | x_t, x0_hat) plus
// sigma_t * z, with z = 0 at t = 1. x0_hat comes from `x0_override` when
// provided, otherwise from eps_hat via x0_from_eps.
num::Tensor reverse_step(const num::Tensor& xt, int t, const num::Tensor& eps_hat,
                         const NoiseSchedule& sched, Rng& rng,
                         const num::Tensor* x0_override = nullptr);

}  // namespace floordiff
