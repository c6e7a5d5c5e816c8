#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace wavedm {

// Coefficient tables indexed by t = 0..T. Index 0 is the fully denoised state:
// beta(0) = 0, alpha_bar(0) = 1.
class NoiseSchedule {
 public:
  NoiseSchedule() = default;

  int steps() const { return steps_; }
  double beta_start() const { return beta_start_; }
  double beta_end() const { return beta_end_; }

  double beta(int t) const;
  double alpha(int t) const;
  double alpha_bar(int t) const;
  // Variance of the DDPM posterior q(x_{t-1} | x_t, x_0); 0 at t = 1.
  double posterior_sigma2(int t) const;

  bool operator==(const NoiseSchedule&) const = default;

  friend NoiseSchedule make_schedule_from_betas(const std::vector<double>& betas);
  friend NoiseSchedule make_linear_schedule(int steps, double beta_start, double beta_end);

 private:
  void check_index(int t) const;

  int steps_ = 0;
  double beta_start_ = 0.0;
  double beta_end_ = 0.0;
  std::vector<double> beta_;
  std::vector<double> alpha_;
  std::vector<double> alpha_bar_;
  std::vector<double> posterior_sigma2_;
};

// Tables from an explicit beta_1..beta_T; each must lie in (0, 1).
NoiseSchedule make_schedule_from_betas(const std::vector<double>& betas);
NoiseSchedule make_linear_schedule(int steps, double beta_start, double beta_end);
NoiseSchedule default_schedule();

enum class SamplingMode { ddpm_full, ddim, ecs };

const char* mode_name(SamplingMode m);
SamplingMode parse_mode(const std::string& s);

struct SamplingPlan {
  int steps = 0;    // T
  int stride = 0;   // T / S
  int evals = 0;    // estimator calls the sampler will make
  int stop = 0;     // M for ECS, 0 otherwise
  SamplingMode mode = SamplingMode::ddim;
  // Descending. DDIM and DDPM end with 0; ECS ends with M.
  std::vector<int> timestamps;
};

// Ascending {tau_1 .. tau_S}, tau_i = (i - 1) * T / S.
std::vector<int> ddim_subsequence(int steps, int sub_steps);

SamplingPlan make_ddim_plan(int steps, int sub_steps);
SamplingPlan make_ecs_plan(int steps, int stride, int evals);
SamplingPlan make_ddpm_plan(int steps);

}  // namespace wavedm
