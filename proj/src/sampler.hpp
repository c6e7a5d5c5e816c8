#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "diffusion.hpp"
#include "schedule.hpp"
#include "wavelet.hpp"

namespace wavedm {

// eps_theta(x_t^l, x~_0^h, x_d, t). Conditions are passed through untouched;
// `cond_high` has zero bands when no refinement module is in use.
using NoiseEstimator = std::function<BandStack(const BandStack& x_t_low, const BandStack& cond_high,
                                               const BandStack& cond_spectrum, int t)>;

struct SamplerTrace {
  struct Step {
    int t = 0;
    double mean_abs = 0.0;
    std::optional<BandStack> snapshot;
  };

  bool keep_snapshots = false;
  std::vector<Step> steps;
  int eval_count = 0;
};

// Ancestral step. z is ignored at t = 1.
BandStack ddpm_ancestral_step(const BandStack& x_t, const BandStack& eps_pred, int t, const BandStack& z,
                              const NoiseSchedule& sched);

// (x_t - sqrt(1 - abar_t) eps) / sqrt(abar_t)
BandStack predict_x0(const BandStack& x_t, const BandStack& eps_pred, int t, const NoiseSchedule& sched);

// Deterministic implicit step from t to t_prev (t_prev = 0 uses abar = 1).
BandStack ddim_step(const BandStack& x_t, const BandStack& eps_pred, int t, int t_prev, const NoiseSchedule& sched);

// Member of the non-Markovian family with explicit sigma_t:
// sqrt(abar_prev) x0_hat + sqrt(1 - abar_prev - sigma^2) eps + sigma z.
BandStack generalized_step(const BandStack& x_t, const BandStack& eps_pred, int t, int t_prev, double sigma,
                           const BandStack& z, const NoiseSchedule& sched);

struct SampleShape {
  int bands = 0;
  int height = 0;
  int width = 0;
};

BandStack ddim_sample(const NoiseEstimator& est, const BandStack& cond_high, const BandStack& cond_spectrum,
                      const SamplingPlan& plan, const NoiseSchedule& sched, SampleShape shape, Rng& rng,
                      SamplerTrace* trace = nullptr);

// DDIM steps along [T .. M + stride], then returns the x0 prediction at M.
BandStack ecs_sample(const NoiseEstimator& est, const BandStack& cond_high, const BandStack& cond_spectrum,
                     const SamplingPlan& plan, const NoiseSchedule& sched, SampleShape shape, Rng& rng,
                     SamplerTrace* trace = nullptr);

BandStack ddpm_sample(const NoiseEstimator& est, const BandStack& cond_high, const BandStack& cond_spectrum,
                      const SamplingPlan& plan, const NoiseSchedule& sched, SampleShape shape, Rng& rng,
                      SamplerTrace* trace = nullptr);

// Dispatch on plan.mode.
BandStack sample(const NoiseEstimator& est, const BandStack& cond_high, const BandStack& cond_spectrum,
                 const SamplingPlan& plan, const NoiseSchedule& sched, SampleShape shape, Rng& rng,
                 SamplerTrace* trace = nullptr);

}  // namespace wavedm
