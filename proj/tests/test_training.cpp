#include <cmath>
#include <random>

#include "dataset.hpp"
#include "diffusion.hpp"
#include "doctest.h"
#include "errors.hpp"
#include "image.hpp"
#include "models.hpp"
#include "training.hpp"

using namespace wavedm;

namespace {

std::vector<TrainingPair> make_pairs(int count, int size, std::uint64_t seed) {
  const SpectrumConfig spec;
  std::vector<TrainingPair> pairs;
  Rng rng(seed);
  for (int i = 0; i < count; ++i) {
    const auto clean = procedural_texture(size, rng);
    const auto noisy = degrade(clean, DegradationSpec{}, rng);
    pairs.push_back({image_to_spectrum(noisy, spec), image_to_spectrum(clean, spec)});
  }
  return pairs;
}

ModelConfig tiny_model() {
  ModelConfig m;
  m.width = 16;
  m.hfrm_width = 16;
  return m;
}

}  // namespace

TEST_CASE("hfrm overfits a single pair") {
  const auto pairs = make_pairs(1, 32, 1);
  TrainConfig cfg;
  cfg.iterations = 2000;
  cfg.batch = 1;
  cfg.lr = 1e-3;
  const auto result = train_hfrm(tiny_model(), cfg, pairs);
  REQUIRE(result.losses.size() == 2000);
  CHECK(result.losses.back() < 0.1 * result.losses.front());
}

TEST_CASE("hfrm loss at iteration 0 equals the untrained output's L1") {
  const auto pairs = make_pairs(1, 32, 2);
  TrainConfig cfg;
  cfg.iterations = 1;
  cfg.batch = 1;
  const auto model = tiny_model();
  const auto result = train_hfrm(model, cfg, pairs);
  // Re-create the untrained network from the same seed.
  TrainConfig zero = cfg;
  zero.iterations = 0;
  const auto untrained = HfrmModel::from_checkpoint(train_hfrm(model, zero, pairs).checkpoint);
  const auto out = untrained.forward(pairs[0].degraded);
  const auto target = slice_bands(pairs[0].clean, 3, 45);
  CHECK(result.losses[0] == doctest::Approx(hfrm_loss(out.data, target.data)).epsilon(1e-5));
}

TEST_CASE("training is deterministic under a fixed seed") {
  const auto pairs = make_pairs(3, 32, 3);
  TrainConfig cfg;
  cfg.iterations = 20;
  cfg.batch = 2;
  cfg.seed = 5;
  const auto a = train_hfrm(tiny_model(), cfg, pairs);
  const auto b = train_hfrm(tiny_model(), cfg, pairs);
  CHECK(a.losses == b.losses);
  CHECK(a.checkpoint.params == b.checkpoint.params);
  const auto da = train_diffusion(tiny_model(), cfg, &a.checkpoint, pairs);
  const auto db = train_diffusion(tiny_model(), cfg, &a.checkpoint, pairs);
  CHECK(da.losses == db.losses);
  cfg.seed = 6;
  CHECK(train_hfrm(tiny_model(), cfg, pairs).losses != a.losses);
}

TEST_CASE("untrained raw-epsilon estimator: L_simple at iteration 0 is finite and above 0.5") {
  const auto pairs = make_pairs(2, 32, 4);
  TrainConfig cfg;
  cfg.iterations = 1;
  cfg.batch = 4;
  cfg.v_weighting = false;
  ModelConfig model = tiny_model();
  model.param = EpsParam::direct;
  const auto h = train_hfrm(model, cfg, pairs);
  const auto d = train_diffusion(model, cfg, &h.checkpoint, pairs);
  CHECK(std::isfinite(d.losses[0]));
  CHECK(d.losses[0] > 0.5);
}

TEST_CASE("default parameterization starts from a finite, positive loss") {
  const auto pairs = make_pairs(2, 32, 4);
  TrainConfig cfg;
  cfg.iterations = 1;
  cfg.batch = 4;
  const auto h = train_hfrm(tiny_model(), cfg, pairs);
  const auto d = train_diffusion(tiny_model(), cfg, &h.checkpoint, pairs);
  CHECK(std::isfinite(d.losses[0]));
  CHECK(d.losses[0] > 0.0);
}

TEST_CASE("residual_v maps the exact v-target to the exact noise") {
  const auto sched = default_schedule();
  std::mt19937_64 gen(9);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int t : {1, 250, 700, 1000}) {
    const double ab = sched.alpha_bar(t);
    const double x0 = n(gen), prior = n(gen), eps = n(gen);
    const double x_t = std::sqrt(ab) * x0 + std::sqrt(1.0 - ab) * eps;
    const double v = std::sqrt(ab) * eps - std::sqrt(1.0 - ab) * (x0 - prior);
    const EpsCoeffs c = eps_coeffs(EpsParam::residual_v, ab);
    CHECK(c.x_t * x_t + c.prior * prior + c.raw * v == doctest::Approx(eps).epsilon(1e-9));
    const EpsCoeffs d = eps_coeffs(EpsParam::direct, ab);
    CHECK(d.x_t * x_t + d.prior * prior + d.raw * eps == eps);
  }
}

TEST_CASE("diffusion overfits one image at fixed t") {
  const auto pairs = make_pairs(1, 32, 5);
  TrainConfig cfg;
  cfg.batch = 1;
  cfg.iterations = 1;
  const auto h = train_hfrm(tiny_model(), cfg, pairs);
  cfg.iterations = 10000;
  cfg.fixed_t = 500;
  cfg.batch = 4;
  cfg.lr = 1e-3;
  const auto d = train_diffusion(tiny_model(), cfg, &h.checkpoint, pairs);
  double tail = 0.0;
  for (int i = 9900; i < 10000; ++i) tail += d.losses[i] / 100.0;
  CHECK(tail < 0.1);
}

TEST_CASE("diffusion training leaves the refinement checkpoint untouched") {
  const auto pairs = make_pairs(2, 32, 6);
  TrainConfig cfg;
  cfg.iterations = 5;
  cfg.batch = 2;
  const auto h = train_hfrm(tiny_model(), cfg, pairs);
  const auto before = fingerprint(h.checkpoint.params);
  const auto d = train_diffusion(tiny_model(), cfg, &h.checkpoint, pairs);
  CHECK(fingerprint(h.checkpoint.params) == before);
  CHECK(d.checkpoint.get("hfrm.fingerprint") == fingerprint_hex(h.checkpoint.params));
}

TEST_CASE("diffusion training rejects a schedule mismatch") {
  const auto pairs = make_pairs(1, 32, 7);
  TrainConfig cfg;
  cfg.iterations = 1;
  cfg.batch = 1;
  const auto h = train_hfrm(tiny_model(), cfg, pairs);
  auto model = tiny_model();
  model.beta_end = 0.03;
  try {
    train_diffusion(model, cfg, &h.checkpoint, pairs);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("schedule") != std::string::npos);
  }
  CHECK_THROWS_AS(train_diffusion(tiny_model(), cfg, nullptr, pairs), Error);
}

TEST_CASE("all-bands variant trains without a refinement module") {
  auto model = tiny_model();
  model.spectrum = default_spectrum_config(2, 48);
  CHECK(model.estimator_config().in_channels == 96);
  CHECK(model.estimator_config().out_channels == 48);
  CHECK_THROWS_AS(model.hfrm_config(), Error);
  const auto pairs = make_pairs(1, 32, 8);
  TrainConfig cfg;
  cfg.iterations = 2;
  cfg.batch = 1;
  const auto d = train_diffusion(model, cfg, nullptr, pairs);
  CHECK(d.checkpoint.get("hfrm.fingerprint") == "none");
}

TEST_CASE("training config validation") {
  const auto pairs = make_pairs(1, 32, 9);
  TrainConfig cfg;
  cfg.ema_decay = 0.999;
  CHECK_THROWS_AS(train_hfrm(tiny_model(), cfg, pairs), Error);
  cfg = {};
  cfg.batch = 0;
  CHECK_THROWS_AS(train_hfrm(tiny_model(), cfg, pairs), Error);
  CHECK_THROWS_AS(train_hfrm(tiny_model(), TrainConfig{}, std::span<const TrainingPair>{}), Error);
}
