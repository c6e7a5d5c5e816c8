#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "checkpoint.hpp"
#include "nn/networks.hpp"
#include "sampler.hpp"
#include "schedule.hpp"
#include "wavelet.hpp"

namespace wavedm {

// How an image maps into the diffusion domain.
struct SpectrumConfig {
  int levels = 2;
  int channels = 3;
  int n_low = 3;
  double gamma = 0.25;

  int total_bands() const { return channels << (2 * levels); }
  int high_bands() const { return total_bands() - n_low; }
  bool uses_refinement() const { return high_bands() > 0; }
  void validate() const;
};

// gamma = 2^-levels.
SpectrumConfig default_spectrum_config(int levels, int n_low, int channels = 3);

// How the estimator's raw output becomes an epsilon prediction.
//   direct:     eps = raw
//   residual_v: eps = sqrt(1 - ab) * (x_t - sqrt(ab) * prior) + sqrt(ab) * raw
// where prior is the degraded low bands and raw predicts the v-target of the
// residual x_0 - prior. The second keeps the implied x_0 bounded as ab -> 0.
enum class EpsParam { direct, residual_v };

const char* eps_param_name(EpsParam p);
EpsParam parse_eps_param(const std::string& s);

struct EpsCoeffs {
  double x_t;
  double prior;
  double raw;
};
EpsCoeffs eps_coeffs(EpsParam p, double alpha_bar);

struct ModelConfig {
  SpectrumConfig spectrum;
  EpsParam param = EpsParam::residual_v;
  int width = 32;
  int hfrm_width = 32;
  int hfrm_blocks = 5;
  int steps = 1000;
  double beta_start = 1e-4;
  double beta_end = 0.02;

  NoiseSchedule schedule() const { return make_linear_schedule(steps, beta_start, beta_end); }
  nn::EstimatorConfig estimator_config() const;
  nn::HfrmConfig hfrm_config() const;
};

struct TrainConfig {
  int iterations = 2000;
  int batch = 16;
  double lr = 2e-4;
  std::uint64_t seed = 0;
  // 0 draws t uniformly on [1, T]; otherwise every sample uses this t.
  int fixed_t = 0;
  double ema_decay = 0.0;
  // Per-sample weight on the epsilon error: 1, or 1 / alpha_bar_t (equal to
  // the v-error for residual_v).
  bool v_weighting = true;
  std::string dataset = "in-memory";
};

class HfrmModel {
 public:
  HfrmModel(const nn::HfrmConfig& cfg, std::vector<float> params);
  static HfrmModel from_checkpoint(const Checkpoint& ckpt);

  const nn::HfrmNet& net() const { return net_; }
  const std::vector<float>& params() const { return params_; }
  // Degraded spectrum (all bands) -> estimated clean high bands.
  BandStack forward(const BandStack& degraded_spectrum) const;

 private:
  nn::HfrmNet net_;
  std::vector<float> params_;
};

class EstimatorModel {
 public:
  EstimatorModel(const nn::EstimatorConfig& cfg, std::vector<float> params, EpsParam param = EpsParam::direct,
                 NoiseSchedule sched = default_schedule());
  static EstimatorModel from_checkpoint(const Checkpoint& ckpt);

  const nn::EstimatorNet& net() const { return net_; }
  const std::vector<float>& params() const { return params_; }
  EpsParam param() const { return param_; }
  // Epsilon prediction; the prior is the first n_low bands of cond_spectrum.
  BandStack forward(const BandStack& x_t_low, const BandStack& cond_high, const BandStack& cond_spectrum,
                    int t) const;
  NoiseEstimator as_estimator() const;

 private:
  nn::EstimatorNet net_;
  std::vector<float> params_;
  EpsParam param_;
  NoiseSchedule sched_;
};

SpectrumConfig spectrum_from_checkpoint(const Checkpoint& ckpt);
NoiseSchedule schedule_from_checkpoint(const Checkpoint& ckpt);

template <typename T>
nn::Tensor<T> to_tensor(std::span<const BandStack* const> parts);
BandStack to_bands(const nn::Tensor<float>& t, int item);

// Normalize [0, 1] -> [-1, 1], analyse, scale by gamma.
BandStack image_to_spectrum(const ImageGrid& image, const SpectrumConfig& cfg);

}  // namespace wavedm
