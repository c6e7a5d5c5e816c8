#include <cmath>

#include "diffusion.hpp"
#include "doctest.h"
#include "errors.hpp"
#include "helpers.hpp"

using namespace wavedm;

namespace {

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  for (double x : v) m.var += (x - m.mean) * (x - m.mean);
  m.var /= static_cast<double>(v.size() - 1);
  return m;
}

}  // namespace

TEST_CASE("draw_noise is standard normal and seeded") {
  Rng a(5), b(5);
  const auto x = draw_noise(3, 40, 40, a);
  const auto y = draw_noise(3, 40, 40, b);
  CHECK(x.data == y.data);
  const auto m = moments(x.data);
  CHECK(std::abs(m.mean) < 0.05);
  CHECK(m.var == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("forward_sample with zero noise scales x0") {
  const auto sched = default_schedule();
  const auto x0 = testutil::random_bands(3, 4, 4, 1);
  const BandStack zero(3, 4, 4);
  const auto xt = forward_sample(x0, 250, zero, sched);
  for (std::size_t i = 0; i < x0.data.size(); ++i) CHECK(xt.data[i] == std::sqrt(sched.alpha_bar(250)) * x0.data[i]);
}

TEST_CASE("forward_sample at T is pure noise up to 0.7% of x0") {
  const auto sched = default_schedule();
  const auto x0 = testutil::random_bands(3, 8, 8, 2);
  Rng rng(3);
  const auto eps = draw_noise_like(x0, rng);
  const auto xt = forward_sample(x0, 1000, eps, sched);
  for (std::size_t i = 0; i < x0.data.size(); ++i) CHECK(std::abs(xt.data[i] - eps.data[i]) <= 0.007);
}

TEST_CASE("forward_sample Monte-Carlo moments at t=100") {
  const auto sched = default_schedule();
  BandStack x0(1, 1, 1);
  x0.data[0] = 0.8;
  Rng rng(4);
  std::vector<double> draws(20000);
  for (double& d : draws) d = forward_sample(x0, 100, draw_noise(1, 1, 1, rng), sched).data[0];
  const auto m = moments(draws);
  const double mean = std::sqrt(sched.alpha_bar(100)) * 0.8;
  const double sd = std::sqrt(1.0 - sched.alpha_bar(100));
  CHECK(std::abs(m.mean - mean) / mean < 0.02);
  CHECK(std::abs(std::sqrt(m.var) - sd) / sd < 0.02);
}

TEST_CASE("forward_chain_step") {
  const auto sched = default_schedule();
  const auto x0 = testutil::random_bands(2, 3, 3, 5);
  const BandStack zero(2, 3, 3);
  const auto x1 = forward_chain_step(x0, 1, zero, sched);
  for (std::size_t i = 0; i < x0.data.size(); ++i) CHECK(x1.data[i] == std::sqrt(1.0 - sched.beta(1)) * x0.data[i]);
  // A vanishing beta leaves x unchanged.
  const auto flat = make_linear_schedule(4, 1e-300, 1e-300);
  Rng rng(6);
  const auto id = forward_chain_step(x0, 2, draw_noise_like(x0, rng), flat);
  CHECK(testutil::max_abs_diff(id.data, x0.data) < 1e-100);
}

TEST_CASE("chained steps reproduce the closed-form variance at t=100") {
  const auto sched = default_schedule();
  BandStack x(1, 1, 20000);
  for (double& v : x.data) v = 0.5;
  Rng rng(7);
  for (int t = 1; t <= 100; ++t) x = forward_chain_step(x, t, draw_noise_like(x, rng), sched);
  const auto m = moments(x.data);
  CHECK(std::abs(m.var - (1.0 - sched.alpha_bar(100))) / (1.0 - sched.alpha_bar(100)) < 0.02);
  CHECK(std::abs(m.mean - std::sqrt(sched.alpha_bar(100)) * 0.5) / (std::sqrt(sched.alpha_bar(100)) * 0.5) < 0.02);
}

TEST_CASE("forward operations validate inputs") {
  const auto sched = default_schedule();
  const auto x0 = testutil::random_bands(3, 4, 4, 8);
  CHECK_THROWS_AS(forward_sample(x0, 0, x0, sched), Error);
  CHECK_THROWS_AS(forward_sample(x0, 1001, x0, sched), Error);
  CHECK_THROWS_AS(forward_sample(x0, 10, BandStack(3, 4, 5), sched), Error);
  CHECK_THROWS_AS(forward_chain_step(x0, 10, BandStack(2, 4, 4), sched), Error);
}

TEST_CASE("simple_loss") {
  const auto a = testutil::random_bands(3, 5, 5, 9);
  CHECK(simple_loss(a.data, a.data) == 0.0);
  auto b = a;
  for (double& v : b.data) v += 1.0;
  CHECK(simple_loss(b.data, a.data) == doctest::Approx(1.0).epsilon(1e-14));
  const auto c = testutil::random_bands(3, 5, 5, 10);
  double expected = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) expected += std::pow(a.data[i] - c.data[i], 2);
  expected /= static_cast<double>(a.data.size());
  CHECK(std::abs(simple_loss(a.data, c.data) - expected) < 1e-10);
  CHECK(simple_loss(a.data, c.data) > 0.0);
  CHECK_THROWS_AS(simple_loss(a.data, std::span<const double>(c.data).subspan(1)), Error);
}

TEST_CASE("hfrm_loss") {
  const auto a = testutil::random_bands(45, 4, 4, 11);
  CHECK(hfrm_loss(a.data, a.data) == 0.0);
  auto b = a;
  for (double& v : b.data) v += 0.5;
  CHECK(hfrm_loss(b.data, a.data) == doctest::Approx(0.5).epsilon(1e-14));
  const auto c = testutil::random_bands(45, 4, 4, 12);
  double expected = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) expected += std::abs(a.data[i] - c.data[i]);
  CHECK(std::abs(hfrm_loss(a.data, c.data) - expected / static_cast<double>(a.data.size())) < 1e-12);
  CHECK_THROWS_AS(hfrm_loss(a.data, std::span<const double>(c.data).subspan(2)), Error);
}
