#include "sampler.hpp"

#include <cmath>

#include "errors.hpp"

namespace wavedm {

namespace {

void check_step(int t, const NoiseSchedule& sched) {
  if (t < 1 || t > sched.steps()) {
    fail(Errc::invalid_argument,
         "sampling step " + std::to_string(t) + " outside [1, " + std::to_string(sched.steps()) + "]");
  }
}

void check_same(const BandStack& a, const BandStack& b, const char* what) {
  require(a.same_shape(b), Errc::shape_mismatch, std::string(what) + " shape does not match x_t");
}

double mean_abs(const BandStack& x) {
  double acc = 0.0;
  for (double v : x.data) acc += std::abs(v);
  return x.data.empty() ? 0.0 : acc / static_cast<double>(x.data.size());
}

BandStack call_estimator(const NoiseEstimator& est, const BandStack& x_t, const BandStack& cond_high,
                         const BandStack& cond_spectrum, int t, SamplerTrace* trace) {
  BandStack eps = est(x_t, cond_high, cond_spectrum, t);
  if (!eps.same_shape(x_t)) {
    fail(Errc::shape_mismatch, "estimator returned " + std::to_string(eps.bands) + "x" + std::to_string(eps.height) +
                                   "x" + std::to_string(eps.width) + " for an input of " + std::to_string(x_t.bands) +
                                   "x" + std::to_string(x_t.height) + "x" + std::to_string(x_t.width));
  }
  if (trace) ++trace->eval_count;
  return eps;
}

void record(SamplerTrace* trace, int t, const BandStack& x) {
  if (!trace) return;
  SamplerTrace::Step step;
  step.t = t;
  step.mean_abs = mean_abs(x);
  if (trace->keep_snapshots) step.snapshot = x;
  trace->steps.push_back(std::move(step));
}

void check_plan(const SamplingPlan& plan, SamplingMode mode, const NoiseSchedule& sched) {
  require(plan.mode == mode, Errc::invalid_argument,
          std::string("sampler expects a ") + mode_name(mode) + " plan, got " + mode_name(plan.mode));
  require(plan.steps == sched.steps(), Errc::invalid_argument,
          "plan T = " + std::to_string(plan.steps) + " does not match schedule T = " + std::to_string(sched.steps()));
  require(!plan.timestamps.empty() && plan.timestamps.front() == sched.steps(), Errc::invalid_argument,
          "plan must start at T");
}

}  // namespace

BandStack ddpm_ancestral_step(const BandStack& x_t, const BandStack& eps_pred, int t, const BandStack& z,
                              const NoiseSchedule& sched) {
  check_step(t, sched);
  check_same(x_t, eps_pred, "eps");
  const double inv_sqrt_alpha = 1.0 / std::sqrt(sched.alpha(t));
  const double eps_coef = sched.beta(t) / std::sqrt(1.0 - sched.alpha_bar(t));
  const double sigma = t > 1 ? std::sqrt(sched.posterior_sigma2(t)) : 0.0;
  if (sigma != 0.0) check_same(x_t, z, "z");
  BandStack out(x_t.bands, x_t.height, x_t.width);
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    out.data[i] = inv_sqrt_alpha * (x_t.data[i] - eps_coef * eps_pred.data[i]);
    if (sigma != 0.0) out.data[i] += sigma * z.data[i];
  }
  return out;
}

BandStack predict_x0(const BandStack& x_t, const BandStack& eps_pred, int t, const NoiseSchedule& sched) {
  check_step(t, sched);
  check_same(x_t, eps_pred, "eps");
  const double ab = sched.alpha_bar(t);
  const double noise = std::sqrt(1.0 - ab);
  const double inv_signal = 1.0 / std::sqrt(ab);
  BandStack out(x_t.bands, x_t.height, x_t.width);
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = (x_t.data[i] - noise * eps_pred.data[i]) * inv_signal;
  return out;
}

BandStack ddim_step(const BandStack& x_t, const BandStack& eps_pred, int t, int t_prev, const NoiseSchedule& sched) {
  check_step(t, sched);
  if (t_prev < 0 || t_prev >= t) {
    fail(Errc::invalid_argument,
         "ddim step needs 0 <= t_prev < t, got t = " + std::to_string(t) + ", t_prev = " + std::to_string(t_prev));
  }
  BandStack out = predict_x0(x_t, eps_pred, t, sched);
  const double ab_prev = sched.alpha_bar(t_prev);
  const double signal = std::sqrt(ab_prev);
  const double noise = std::sqrt(1.0 - ab_prev);
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = signal * out.data[i] + noise * eps_pred.data[i];
  return out;
}

BandStack generalized_step(const BandStack& x_t, const BandStack& eps_pred, int t, int t_prev, double sigma,
                           const BandStack& z, const NoiseSchedule& sched) {
  check_step(t, sched);
  require(t_prev >= 0 && t_prev < t, Errc::invalid_argument, "generalized step needs 0 <= t_prev < t");
  const double ab_prev = sched.alpha_bar(t_prev);
  const double dir2 = 1.0 - ab_prev - sigma * sigma;
  require(dir2 >= -1e-15, Errc::invalid_argument, "sigma too large for this step");
  const double dir = std::sqrt(std::max(0.0, dir2));
  BandStack out = predict_x0(x_t, eps_pred, t, sched);
  if (sigma != 0.0) check_same(x_t, z, "z");
  const double signal = std::sqrt(ab_prev);
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    out.data[i] = signal * out.data[i] + dir * eps_pred.data[i];
    if (sigma != 0.0) out.data[i] += sigma * z.data[i];
  }
  return out;
}

BandStack ddim_sample(const NoiseEstimator& est, const BandStack& cond_high, const BandStack& cond_spectrum,
                      const SamplingPlan& plan, const NoiseSchedule& sched, SampleShape shape, Rng& rng,
                      SamplerTrace* trace) {
  check_plan(plan, SamplingMode::ddim, sched);
  require(plan.timestamps.back() == 0, Errc::invalid_argument, "DDIM plan must end at 0");
  BandStack x = draw_noise(shape.bands, shape.height, shape.width, rng);
  record(trace, plan.timestamps.front(), x);
  for (std::size_t i = 0; i + 1 < plan.timestamps.size(); ++i) {
    const int t = plan.timestamps[i];
    const int t_prev = plan.timestamps[i + 1];
    BandStack eps = call_estimator(est, x, cond_high, cond_spectrum, t, trace);
    x = ddim_step(x, eps, t, t_prev, sched);
    record(trace, t_prev, x);
  }
  return x;
}

BandStack ecs_sample(const NoiseEstimator& est, const BandStack& cond_high, const BandStack& cond_spectrum,
                     const SamplingPlan& plan, const NoiseSchedule& sched, SampleShape shape, Rng& rng,
                     SamplerTrace* trace) {
  check_plan(plan, SamplingMode::ecs, sched);
  require(plan.timestamps.back() == plan.stop && plan.stop > 0, Errc::invalid_argument, "ECS plan must end at M > 0");
  BandStack x = draw_noise(shape.bands, shape.height, shape.width, rng);
  record(trace, plan.timestamps.front(), x);
  for (std::size_t i = 0; i + 1 < plan.timestamps.size(); ++i) {
    const int t = plan.timestamps[i];
    const int t_prev = plan.timestamps[i + 1];
    BandStack eps = call_estimator(est, x, cond_high, cond_spectrum, t, trace);
    x = ddim_step(x, eps, t, t_prev, sched);
    record(trace, t_prev, x);
  }
  // t = M: jump straight to the x0 prediction.
  BandStack eps = call_estimator(est, x, cond_high, cond_spectrum, plan.stop, trace);
  x = predict_x0(x, eps, plan.stop, sched);
  record(trace, 0, x);
  return x;
}

BandStack ddpm_sample(const NoiseEstimator& est, const BandStack& cond_high, const BandStack& cond_spectrum,
                      const SamplingPlan& plan, const NoiseSchedule& sched, SampleShape shape, Rng& rng,
                      SamplerTrace* trace) {
  check_plan(plan, SamplingMode::ddpm_full, sched);
  BandStack x = draw_noise(shape.bands, shape.height, shape.width, rng);
  record(trace, sched.steps(), x);
  for (int t = sched.steps(); t >= 1; --t) {
    BandStack eps = call_estimator(est, x, cond_high, cond_spectrum, t, trace);
    BandStack z = t > 1 ? draw_noise_like(x, rng) : BandStack{};
    x = ddpm_ancestral_step(x, eps, t, z, sched);
    record(trace, t - 1, x);
  }
  return x;
}

BandStack sample(const NoiseEstimator& est, const BandStack& cond_high, const BandStack& cond_spectrum,
                 const SamplingPlan& plan, const NoiseSchedule& sched, SampleShape shape, Rng& rng,
                 SamplerTrace* trace) {
  switch (plan.mode) {
    case SamplingMode::ddim: return ddim_sample(est, cond_high, cond_spectrum, plan, sched, shape, rng, trace);
    case SamplingMode::ecs: return ecs_sample(est, cond_high, cond_spectrum, plan, sched, shape, rng, trace);
    case SamplingMode::ddpm_full: return ddpm_sample(est, cond_high, cond_spectrum, plan, sched, shape, rng, trace);
  }
  fail(Errc::invalid_argument, "unknown sampling mode");
}

}  // namespace wavedm
