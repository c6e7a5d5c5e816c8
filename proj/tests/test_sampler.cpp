#include <cmath>

#include "doctest.h"
#include "errors.hpp"
#include "helpers.hpp"
#include "sampler.hpp"

using namespace wavedm;
using testutil::exact_eps_oracle;
using testutil::rmse;

namespace {

BandStack scalar(double v) {
  BandStack s(1, 1, 1);
  s.data[0] = v;
  return s;
}

const BandStack kNoCond;

}  // namespace

TEST_CASE("ancestral step with zero eps and zero z") {
  const auto sched = default_schedule();
  const auto x = testutil::random_bands(3, 4, 4, 1);
  const BandStack zero(3, 4, 4);
  const auto y = ddpm_ancestral_step(x, zero, 500, zero, sched);
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    CHECK(y.data[i] == doctest::Approx(x.data[i] / std::sqrt(sched.alpha(500))).epsilon(1e-14));
  }
}

TEST_CASE("ancestral step scalar value") {
  // alpha_2 = 0.99 with alpha_bar_2 = 0.5.
  const auto sched = make_schedule_from_betas({1.0 - 0.5 / 0.99, 0.01});
  REQUIRE(sched.alpha_bar(2) == doctest::Approx(0.5).epsilon(1e-15));
  const auto y = ddpm_ancestral_step(scalar(1.0), scalar(0.5), 2, scalar(0.0), sched);
  // Independently evaluated to 40 digits.
  CHECK(std::abs(y.data[0] - 0.997931124714025) < 1e-12);
}

TEST_CASE("ancestral step ignores z at t = 1") {
  const auto sched = default_schedule();
  const auto a = ddpm_ancestral_step(scalar(0.3), scalar(0.1), 1, scalar(5.0), sched);
  const auto b = ddpm_ancestral_step(scalar(0.3), scalar(0.1), 1, scalar(-5.0), sched);
  CHECK(a.data == b.data);
  CHECK_THROWS_AS(ddpm_ancestral_step(scalar(0.3), scalar(0.1), 0, scalar(0.0), sched), Error);
}

TEST_CASE("full ancestral run with the exact oracle returns x0") {
  const auto sched = default_schedule();
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto x0 = scalar(0.42);
    Rng rng(seed);
    const auto out = ddpm_sample(exact_eps_oracle(x0, sched), kNoCond, kNoCond, make_ddpm_plan(1000), sched,
                                 {1, 1, 1}, rng);
    CHECK(std::abs(out.data[0] - 0.42) < 0.05);
  }
}

TEST_CASE("predict_x0") {
  const auto sched = default_schedule();
  const auto x0 = testutil::random_bands(3, 4, 4, 2);
  Rng rng(3);
  const auto eps = draw_noise_like(x0, rng);
  for (int t : {1, 37, 500, 1000}) {
    const auto xt = forward_sample(x0, t, eps, sched);
    CHECK(testutil::max_abs_diff(predict_x0(xt, eps, t, sched).data, x0.data) < 1e-10);
  }
  const BandStack zero(3, 4, 4);
  const auto p = predict_x0(x0, zero, 200, sched);
  CHECK(p.data[0] == doctest::Approx(x0.data[0] / std::sqrt(sched.alpha_bar(200))).epsilon(1e-14));

  const auto quarter = make_schedule_from_betas({0.75});
  const auto v = predict_x0(scalar(1.0), scalar(0.5), 1, quarter);
  CHECK(std::abs(v.data[0] - 1.1339745962155614) < 1e-12);
  CHECK_THROWS_AS(predict_x0(x0, zero, 0, sched), Error);
}

TEST_CASE("ddim step stays on the closed-form line") {
  const auto sched = default_schedule();
  const auto x0 = testutil::random_bands(3, 4, 4, 4);
  Rng rng(5);
  const auto eps = draw_noise_like(x0, rng);
  const auto xt = forward_sample(x0, 800, eps, sched);
  const auto next = ddim_step(xt, eps, 800, 760, sched);
  CHECK(testutil::max_abs_diff(next.data, forward_sample(x0, 760, eps, sched).data) < 1e-10);
  const auto last = ddim_step(xt, eps, 800, 0, sched);
  CHECK(testutil::max_abs_diff(last.data, x0.data) < 1e-10);
  CHECK_THROWS_AS(ddim_step(xt, eps, 800, 800, sched), Error);
  CHECK_THROWS_AS(ddim_step(xt, eps, 800, -1, sched), Error);
}

TEST_CASE("ddim step is a fixed point when alpha_bar does not change") {
  const auto sched = make_schedule_from_betas({0.3, 1e-300});
  REQUIRE(sched.alpha_bar(2) == sched.alpha_bar(1));
  const auto x = testutil::random_bands(2, 3, 3, 6);
  const auto e = testutil::random_bands(2, 3, 3, 7);
  CHECK(testutil::max_abs_diff(ddim_step(x, e, 2, 1, sched).data, x.data) < 1e-12);
}

TEST_CASE("variance bridge: ancestral step equals the generalized family at the posterior sigma") {
  const auto sched = default_schedule();
  for (int t : {2, 10, 333, 1000}) {
    for (double xv : {-0.7, 0.1, 1.3}) {
      const auto x = scalar(xv);
      const auto e = scalar(0.37 - xv);
      const auto z = scalar(0.81);
      const auto a = ddpm_ancestral_step(x, e, t, z, sched);
      const auto b = generalized_step(x, e, t, t - 1, std::sqrt(sched.posterior_sigma2(t)), z, sched);
      CHECK(std::abs(a.data[0] - b.data[0]) < 1e-12);
    }
  }
  // sigma = 0 recovers the deterministic step.
  const auto x = scalar(0.2);
  const auto e = scalar(-0.4);
  CHECK(std::abs(generalized_step(x, e, 900, 500, 0.0, BandStack{}, sched).data[0] -
                 ddim_step(x, e, 900, 500, sched).data[0]) < 1e-14);
}

TEST_CASE("ddim and ecs with the exact oracle recover x0") {
  const auto sched = default_schedule();
  const auto x0 = testutil::random_bands(3, 8, 8, 8, 0.9);
  const SampleShape shape{3, 8, 8};
  {
    int calls = 0;
    Rng rng(9);
    SamplerTrace trace;
    const auto out = ddim_sample(exact_eps_oracle(x0, sched, &calls), kNoCond, kNoCond, make_ddim_plan(1000, 25),
                                 sched, shape, rng, &trace);
    CHECK(rmse(out.data, x0.data) < 1e-4);
    CHECK(calls == 25);
    CHECK(trace.eval_count == 25);
    CHECK(trace.steps.size() == 26);
  }
  for (int stride : {40, 100}) {
    for (int k = 1; 1000 - (k - 1) * stride >= 1; ++k) {
      const auto plan = make_ecs_plan(1000, stride, k);
      int calls = 0;
      Rng rng(10 + k);
      SamplerTrace trace;
      const auto out = ecs_sample(exact_eps_oracle(x0, sched, &calls), kNoCond, kNoCond, plan, sched, shape, rng, &trace);
      CHECK(rmse(out.data, x0.data) < 1e-4);
      CHECK(calls == k);
      CHECK(trace.eval_count == plan.evals);
    }
  }
}

TEST_CASE("samplers are deterministic under a fixed seed") {
  const auto sched = default_schedule();
  // A deliberately imperfect estimator so the output depends on the draw.
  NoiseEstimator est = [](const BandStack& x, const BandStack&, const BandStack&, int t) {
    BandStack e = x;
    for (double& v : e.data) v = std::tanh(v) * (0.5 + t * 1e-4);
    return e;
  };
  for (const auto& plan : {make_ddim_plan(1000, 25), make_ecs_plan(1000, 100, 4)}) {
    Rng a(77), b(77), c(78);
    const auto x = sample(est, kNoCond, kNoCond, plan, sched, {3, 4, 4}, a);
    const auto y = sample(est, kNoCond, kNoCond, plan, sched, {3, 4, 4}, b);
    const auto z = sample(est, kNoCond, kNoCond, plan, sched, {3, 4, 4}, c);
    CHECK(x.data == y.data);
    CHECK(x.data != z.data);
  }
}

TEST_CASE("samplers pass conditions through and reject bad estimator output") {
  const auto sched = default_schedule();
  const auto high = testutil::random_bands(45, 4, 4, 11);
  const auto spectrum = testutil::random_bands(48, 4, 4, 12);
  int seen = 0;
  NoiseEstimator check = [&](const BandStack& x, const BandStack& h, const BandStack& s, int) {
    CHECK(h.data == high.data);
    CHECK(s.data == spectrum.data);
    ++seen;
    return BandStack(x.bands, x.height, x.width);
  };
  Rng rng(13);
  sample(check, high, spectrum, make_ecs_plan(1000, 100, 4), sched, {3, 4, 4}, rng);
  CHECK(seen == 4);

  NoiseEstimator wrong = [](const BandStack& x, const BandStack&, const BandStack&, int) {
    return BandStack(x.bands + 1, x.height, x.width);
  };
  try {
    sample(wrong, high, spectrum, make_ddim_plan(1000, 10), sched, {3, 4, 4}, rng);
    FAIL("expected a shape error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::shape_mismatch);
  }
  CHECK_THROWS_AS(ecs_sample(check, high, spectrum, make_ddim_plan(1000, 10), sched, {3, 4, 4}, rng), Error);
  CHECK_THROWS_AS(ddim_sample(check, high, spectrum, make_ddim_plan(500, 10), sched, {3, 4, 4}, rng), Error);
}

TEST_CASE("trace snapshots") {
  const auto sched = default_schedule();
  const auto x0 = testutil::random_bands(3, 4, 4, 14);
  Rng rng(15);
  SamplerTrace trace;
  trace.keep_snapshots = true;
  const auto out = ecs_sample(exact_eps_oracle(x0, sched), kNoCond, kNoCond, make_ecs_plan(1000, 100, 8), sched,
                              {3, 4, 4}, rng, &trace);
  REQUIRE(trace.steps.size() == 9);
  CHECK(trace.steps.front().t == 1000);
  CHECK(trace.steps[7].t == 300);
  CHECK(trace.steps.back().t == 0);
  REQUIRE(trace.steps.back().snapshot.has_value());
  CHECK(trace.steps.back().snapshot->data == out.data);
}
