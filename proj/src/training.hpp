#pragma once

#include <functional>
#include <span>
#include <vector>

#include "checkpoint.hpp"
#include "models.hpp"

namespace wavedm {

// Gamma-scaled spectra of a degraded image and its ground truth.
struct TrainingPair {
  BandStack degraded;
  BandStack clean;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<double> losses;  // one entry per iteration
};

using ProgressFn = std::function<void(int iteration, double loss)>;

// Weighted L_simple over a batch of raw estimator outputs. Item b's epsilon
// prediction is coeffs[b] applied to (x_t = input channels [0, n_low),
// prior = input channels [prior_channel, prior_channel + n_low), raw). When
// `grad` is given it receives d loss / d raw.
template <typename T>
double estimator_batch_loss(const nn::Tensor<T>& raw, const nn::Tensor<T>& input, const nn::Tensor<T>& eps,
                            std::span<const EpsCoeffs> coeffs, std::span<const double> weights, int prior_channel,
                            nn::Tensor<T>* grad) {
  const std::size_t per_item = static_cast<std::size_t>(raw.c) * raw.h * raw.w;
  const double inv_count = 1.0 / static_cast<double>(raw.size());
  double loss = 0.0;
  for (int b = 0; b < raw.n; ++b) {
    const EpsCoeffs& c = coeffs[b];
    const T* out = raw.channel(b, 0);
    const T* x_t = input.channel(b, 0);
    const T* prior = input.channel(b, prior_channel);
    const T* target = eps.channel(b, 0);
    T* g = grad ? grad->channel(b, 0) : nullptr;
    for (std::size_t i = 0; i < per_item; ++i) {
      const double pred = c.x_t * x_t[i] + c.prior * prior[i] + c.raw * out[i];
      const double d = pred - target[i];
      loss += weights[b] * d * d;
      if (g) g[i] = static_cast<T>(2.0 * weights[b] * d * c.raw * inv_count);
    }
  }
  return loss * inv_count;
}

// L1 between predicted and true clean high bands.
TrainResult train_hfrm(const ModelConfig& model, const TrainConfig& cfg, std::span<const TrainingPair> data,
                       const ProgressFn& progress = {});

// L_simple on the low bands. The refinement checkpoint is only read; it is
// required unless every band is diffused.
TrainResult train_diffusion(const ModelConfig& model, const TrainConfig& cfg, const Checkpoint* hfrm,
                            std::span<const TrainingPair> data, const ProgressFn& progress = {});

Checkpoint make_hfrm_checkpoint(const ModelConfig& model, const TrainConfig& cfg, std::vector<float> params,
                                long long iteration);
Checkpoint make_estimator_checkpoint(const ModelConfig& model, const TrainConfig& cfg, std::vector<float> params,
                                     long long iteration, const std::string& hfrm_fingerprint);

ModelConfig model_config_from_checkpoint(const Checkpoint& ckpt);

}  // namespace wavedm
