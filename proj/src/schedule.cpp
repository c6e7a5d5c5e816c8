#include "schedule.hpp"

#include <cmath>

#include "errors.hpp"

namespace wavedm {

void NoiseSchedule::check_index(int t) const {
  if (t < 0 || t > steps_) {
    fail(Errc::invalid_argument, "timestep " + std::to_string(t) + " outside [0, " + std::to_string(steps_) + "]");
  }
}

double NoiseSchedule::beta(int t) const {
  check_index(t);
  return beta_[t];
}

double NoiseSchedule::alpha(int t) const {
  check_index(t);
  return alpha_[t];
}

double NoiseSchedule::alpha_bar(int t) const {
  check_index(t);
  return alpha_bar_[t];
}

double NoiseSchedule::posterior_sigma2(int t) const {
  check_index(t);
  return posterior_sigma2_[t];
}

NoiseSchedule make_schedule_from_betas(const std::vector<double>& betas) {
  require(!betas.empty(), Errc::invalid_argument, "schedule needs T >= 1, got 0");
  NoiseSchedule s;
  const int steps = static_cast<int>(betas.size());
  s.steps_ = steps;
  s.beta_start_ = betas.front();
  s.beta_end_ = betas.back();
  s.beta_.assign(steps + 1, 0.0);
  s.alpha_.assign(steps + 1, 1.0);
  s.alpha_bar_.assign(steps + 1, 1.0);
  s.posterior_sigma2_.assign(steps + 1, 0.0);
  for (int t = 1; t <= steps; ++t) {
    const double b = betas[t - 1];
    require(b > 0.0 && b < 1.0, Errc::invalid_argument, "beta_" + std::to_string(t) + " must lie in (0, 1)");
    s.beta_[t] = b;
    s.alpha_[t] = 1.0 - b;
    s.alpha_bar_[t] = s.alpha_bar_[t - 1] * s.alpha_[t];
    s.posterior_sigma2_[t] = (1.0 - s.alpha_bar_[t - 1]) / (1.0 - s.alpha_bar_[t]) * b;
  }
  return s;
}

NoiseSchedule make_linear_schedule(int steps, double beta_start, double beta_end) {
  require(steps >= 1, Errc::invalid_argument, "schedule needs T >= 1, got " + std::to_string(steps));
  require(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0, Errc::invalid_argument,
          "schedule needs 0 < beta_start <= beta_end < 1");
  std::vector<double> betas(steps);
  for (int t = 1; t <= steps; ++t) {
    const double frac = steps == 1 ? 0.0 : static_cast<double>(t - 1) / (steps - 1);
    betas[t - 1] = beta_start + (beta_end - beta_start) * frac;
  }
  NoiseSchedule s = make_schedule_from_betas(betas);
  s.beta_start_ = beta_start;
  s.beta_end_ = beta_end;
  return s;
}

NoiseSchedule default_schedule() { return make_linear_schedule(1000, 1e-4, 0.02); }

const char* mode_name(SamplingMode m) {
  switch (m) {
    case SamplingMode::ddpm_full: return "ddpm";
    case SamplingMode::ddim: return "ddim";
    case SamplingMode::ecs: return "ecs";
  }
  return "?";
}

SamplingMode parse_mode(const std::string& s) {
  if (s == "ddpm") return SamplingMode::ddpm_full;
  if (s == "ddim") return SamplingMode::ddim;
  if (s == "ecs") return SamplingMode::ecs;
  fail(Errc::invalid_argument, "unknown sampling mode '" + s + "' (expected ddpm, ddim or ecs)");
}

std::vector<int> ddim_subsequence(int steps, int sub_steps) {
  require(steps >= 1 && sub_steps >= 1, Errc::invalid_argument, "T and S must be positive");
  if (steps % sub_steps != 0) {
    fail(Errc::invalid_argument,
         "S = " + std::to_string(sub_steps) + " does not divide T = " + std::to_string(steps));
  }
  const int stride = steps / sub_steps;
  std::vector<int> tau(sub_steps);
  for (int i = 1; i <= sub_steps; ++i) tau[i - 1] = (i - 1) * stride;
  return tau;
}

SamplingPlan make_ddim_plan(int steps, int sub_steps) {
  auto tau = ddim_subsequence(steps, sub_steps);
  SamplingPlan plan;
  plan.steps = steps;
  plan.stride = steps / sub_steps;
  plan.evals = sub_steps;
  plan.stop = 0;
  plan.mode = SamplingMode::ddim;
  plan.timestamps.push_back(steps);
  for (auto it = tau.rbegin(); it != tau.rend(); ++it) plan.timestamps.push_back(*it);
  return plan;
}

SamplingPlan make_ecs_plan(int steps, int stride, int evals) {
  require(steps >= 1 && stride >= 1, Errc::invalid_argument, "T and stride must be positive");
  if (steps % stride != 0) {
    fail(Errc::invalid_argument,
         "stride " + std::to_string(stride) + " does not divide T = " + std::to_string(steps));
  }
  require(evals >= 1, Errc::invalid_argument, "ECS needs at least one evaluation");
  const long long stop = static_cast<long long>(steps) - static_cast<long long>(evals - 1) * stride;
  if (stop <= 0) {
    fail(Errc::invalid_argument, "ECS plan with stride " + std::to_string(stride) + " and " + std::to_string(evals) +
                                     " evaluations would stop at M = " + std::to_string(stop) +
                                     " <= 0; use DDIM mode for a full trajectory");
  }
  SamplingPlan plan;
  plan.steps = steps;
  plan.stride = stride;
  plan.evals = evals;
  plan.stop = static_cast<int>(stop);
  plan.mode = SamplingMode::ecs;
  for (int i = 0; i < evals; ++i) plan.timestamps.push_back(steps - i * stride);
  return plan;
}

SamplingPlan make_ddpm_plan(int steps) {
  require(steps >= 1, Errc::invalid_argument, "T must be positive");
  SamplingPlan plan;
  plan.steps = steps;
  plan.stride = 1;
  plan.evals = steps;
  plan.stop = 0;
  plan.mode = SamplingMode::ddpm_full;
  for (int t = steps; t >= 0; --t) plan.timestamps.push_back(t);
  return plan;
}

}  // namespace wavedm
