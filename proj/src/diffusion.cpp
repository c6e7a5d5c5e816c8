#include "diffusion.hpp"

#include <cmath>

#include "errors.hpp"

namespace wavedm {

namespace {

void check_step(int t, const NoiseSchedule& sched) {
  if (t < 1 || t > sched.steps()) {
    fail(Errc::invalid_argument,
         "diffusion step " + std::to_string(t) + " outside [1, " + std::to_string(sched.steps()) + "]");
  }
}

void check_pair(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), Errc::shape_mismatch,
          "loss operands differ in size: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  require(!a.empty(), Errc::shape_mismatch, "loss operands are empty");
}

}  // namespace

BandStack draw_noise(int bands, int height, int width, Rng& rng) {
  BandStack out(bands, height, width);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : out.data) v = normal(rng);
  return out;
}

BandStack forward_sample(const BandStack& x0, int t, const BandStack& eps, const NoiseSchedule& sched) {
  check_step(t, sched);
  require(x0.same_shape(eps), Errc::shape_mismatch, "noise shape does not match x0");
  const double signal = std::sqrt(sched.alpha_bar(t));
  const double noise = std::sqrt(1.0 - sched.alpha_bar(t));
  BandStack out(x0.bands, x0.height, x0.width);
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = signal * x0.data[i] + noise * eps.data[i];
  return out;
}

BandStack forward_chain_step(const BandStack& x_prev, int t, const BandStack& z, const NoiseSchedule& sched) {
  check_step(t, sched);
  require(x_prev.same_shape(z), Errc::shape_mismatch, "noise shape does not match x_{t-1}");
  const double keep = std::sqrt(1.0 - sched.beta(t));
  const double noise = std::sqrt(sched.beta(t));
  BandStack out(x_prev.bands, x_prev.height, x_prev.width);
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = keep * x_prev.data[i] + noise * z.data[i];
  return out;
}

double simple_loss(std::span<const double> predicted, std::span<const double> target) {
  check_pair(predicted, target);
  double acc = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double d = predicted[i] - target[i];
    acc += d * d;
  }
  return acc / static_cast<double>(predicted.size());
}

double hfrm_loss(std::span<const double> predicted, std::span<const double> target) {
  check_pair(predicted, target);
  double acc = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) acc += std::abs(predicted[i] - target[i]);
  return acc / static_cast<double>(predicted.size());
}

}  // namespace wavedm
