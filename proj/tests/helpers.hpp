#pragma once

#include <cmath>
#include <random>

#include "sampler.hpp"
#include "wavelet.hpp"

namespace testutil {

inline wavedm::ImageGrid random_image(int h, int w, int c, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  wavedm::ImageGrid img(h, w, c, lo, hi);
  for (double& v : img.data) v = u(rng);
  return img;
}

inline wavedm::BandStack random_bands(int b, int h, int w, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  wavedm::BandStack s(b, h, w);
  for (double& v : s.data) v = u(rng);
  return s;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double rmse(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s / static_cast<double>(a.size()));
}

// Returns the noise that maps x0 onto the given x_t exactly.
inline wavedm::NoiseEstimator exact_eps_oracle(const wavedm::BandStack& x0, const wavedm::NoiseSchedule& sched,
                                               int* calls = nullptr) {
  return [x0, &sched, calls](const wavedm::BandStack& x_t, const wavedm::BandStack&, const wavedm::BandStack&, int t) {
    if (calls) ++*calls;
    const double ab = sched.alpha_bar(t);
    wavedm::BandStack eps(x_t.bands, x_t.height, x_t.width);
    for (std::size_t i = 0; i < eps.data.size(); ++i) {
      eps.data[i] = (x_t.data[i] - std::sqrt(ab) * x0.data[i]) / std::sqrt(1.0 - ab);
    }
    return eps;
  };
}

}  // namespace testutil
