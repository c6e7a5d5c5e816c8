#pragma once

#include <random>
#include <span>

#include "schedule.hpp"
#include "wavelet.hpp"

namespace wavedm {

using Rng = std::mt19937_64;

// I.i.d. standard normal values shaped (bands, height, width).
BandStack draw_noise(int bands, int height, int width, Rng& rng);
inline BandStack draw_noise_like(const BandStack& like, Rng& rng) {
  return draw_noise(like.bands, like.height, like.width, rng);
}

// Closed form q(x_t | x_0): sqrt(abar_t) x0 + sqrt(1 - abar_t) eps.
BandStack forward_sample(const BandStack& x0, int t, const BandStack& eps, const NoiseSchedule& sched);

// One Markov step q(x_t | x_{t-1}): sqrt(1 - beta_t) x_prev + sqrt(beta_t) z.
BandStack forward_chain_step(const BandStack& x_prev, int t, const BandStack& z, const NoiseSchedule& sched);

// Mean squared error over all elements.
double simple_loss(std::span<const double> predicted, std::span<const double> target);
// Mean absolute error over all elements.
double hfrm_loss(std::span<const double> predicted, std::span<const double> target);

}  // namespace wavedm
