#include <filesystem>
#include <fstream>

#include "dataset.hpp"
#include "doctest.h"
#include "errors.hpp"
#include "helpers.hpp"
#include "image.hpp"
#include "metrics.hpp"
#include "pipeline.hpp"
#include "training.hpp"

using namespace wavedm;
namespace fs = std::filesystem;

namespace {

struct Oracle {
  SpectrumConfig spec;
  NoiseSchedule sched = default_schedule();
  BandStack clean_low;
  BandStack clean_high;
  int refine_calls = 0;
  int est_calls = 0;

  explicit Oracle(const ImageGrid& truth) {
    const BandStack s = image_to_spectrum(truth, spec);
    clean_low = slice_bands(s, 0, spec.n_low);
    clean_high = slice_bands(s, spec.n_low, spec.high_bands());
  }
  HighBandEstimator refine() {
    return [this](const BandStack&) {
      ++refine_calls;
      return clean_high;
    };
  }
  NoiseEstimator estimator() { return testutil::exact_eps_oracle(clean_low, sched, &est_calls); }
};

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "wavedm_test_pipeline" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("oracle estimator and oracle high bands restore the ground truth") {
  Rng rng(1);
  const auto truth = procedural_texture(64, rng);
  const auto degraded = degrade(truth, DegradationSpec{}, rng);
  for (const auto& plan : {make_ddim_plan(1000, 25), make_ecs_plan(1000, 100, 4), make_ecs_plan(1000, 40, 25)}) {
    Oracle oracle(truth);
    Rng sample_rng(2);
    const auto r =
        restore(degraded, oracle.refine(), oracle.estimator(), plan, oracle.sched, oracle.spec, sample_rng, &truth);
    CHECK(r.restored.height == 64);
    CHECK(r.restored.width == 64);
    CHECK(r.restored.channels == 3);
    CHECK(testutil::max_abs_diff(r.restored.data, truth.data) < 1e-3);
    CHECK(oracle.refine_calls == 1);
    CHECK(r.refine_calls == 1);
    CHECK(r.eval_count == plan.evals);
    CHECK(oracle.est_calls == plan.evals);
    REQUIRE(r.psnr.has_value());
    CHECK(*r.psnr > 60.0);
    CHECK(r.wall_time > 0.0);
  }
}

TEST_CASE("metrics are absent without ground truth; bad inputs are rejected") {
  Rng rng(3);
  const auto img = procedural_texture(32, rng);
  Oracle oracle(img);
  Rng sample_rng(4);
  const auto r = restore(img, oracle.refine(), oracle.estimator(), make_ecs_plan(1000, 100, 4), oracle.sched,
                         oracle.spec, sample_rng);
  CHECK_FALSE(r.psnr.has_value());
  CHECK_FALSE(r.ssim.has_value());
  CHECK_THROWS_AS(restore(crop(img, 30, 32), oracle.refine(), oracle.estimator(), make_ecs_plan(1000, 100, 4),
                          oracle.sched, oracle.spec, sample_rng),
                  Error);
  CHECK_THROWS_AS(restore(img, HighBandEstimator{}, oracle.estimator(), make_ecs_plan(1000, 100, 4), oracle.sched,
                          oracle.spec, sample_rng),
                  Error);
  CHECK_THROWS_AS(restore(img, oracle.refine(), oracle.estimator(), make_ecs_plan(500, 100, 4), oracle.sched,
                          oracle.spec, sample_rng),
                  Error);
}

TEST_CASE("non-finite estimator output aborts with a numeric error") {
  Rng rng(5);
  const auto img = procedural_texture(32, rng);
  Oracle oracle(img);
  NoiseEstimator bad = [](const BandStack& x, const BandStack&, const BandStack&, int) {
    BandStack e = x;
    for (double& v : e.data) v = std::nan("");
    return e;
  };
  try {
    restore(img, oracle.refine(), bad, make_ecs_plan(1000, 100, 2), oracle.sched, oracle.spec, rng);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::numeric);
  }
}

TEST_CASE("trained models: shape contract, determinism and wiring") {
  const auto dir = scratch("models");
  generate_procedural_corpus((dir / "clean").string(), 6, 32, 1);
  DegradationSpec spec;
  const auto manifest = read_manifest(synthesize_pairs((dir / "clean").string(), spec, (dir / "pairs").string(), 2));
  ModelConfig model;
  model.width = 8;
  model.hfrm_width = 8;
  const auto pairs = load_training_pairs(select_split(manifest, "train"), model.spectrum);
  TrainConfig cfg;
  cfg.iterations = 3;
  cfg.batch = 2;
  const auto h = train_hfrm(model, cfg, pairs);
  const auto d = train_diffusion(model, cfg, &h.checkpoint, pairs);
  save_checkpoint(h.checkpoint, (dir / "h.ckpt").string());
  save_checkpoint(d.checkpoint, (dir / "d.ckpt").string());

  const auto rm = RestorationModel::load((dir / "h.ckpt").string(), (dir / "d.ckpt").string());
  CHECK(rm.estimator().net().config().in_channels == 96);
  CHECK(rm.hfrm()->net().config().in_channels == 48);
  CHECK(rm.hfrm()->net().config().out_channels == 45);

  // Odd-sized input is padded and cropped back.
  Rng rng(6);
  const auto odd = crop(procedural_texture(40, rng), 37, 29);
  const auto a = rm.run(odd, make_ecs_plan(1000, 100, 4), 9);
  const auto b = rm.run(odd, make_ecs_plan(1000, 100, 4), 9);
  CHECK(a.restored.height == 37);
  CHECK(a.restored.width == 29);
  CHECK(a.eval_count == 4);
  CHECK(a.restored.data == b.restored.data);

  const auto report = evaluate(select_split(manifest, "test"), rm, make_ecs_plan(1000, 100, 4), 3);
  CHECK(report.rows.size() == 2);
  CHECK(report.mean.psnr == doctest::Approx((report.rows[0].psnr + report.rows[1].psnr) / 2).epsilon(1e-12));
  CHECK(report.mean.evals == 4);
  write_report_csv(report, (dir / "report.csv").string());
  std::ifstream csv(dir / "report.csv");
  int lines = 0;
  std::string line, last;
  while (std::getline(csv, line)) ++lines, last = line;
  CHECK(lines == 1 + 2 + 1);
  CHECK(last.rfind("mean,", 0) == 0);

  // A refinement module other than the one the estimator was trained with is refused.
  cfg.seed = 77;
  save_checkpoint(train_hfrm(model, cfg, pairs).checkpoint, (dir / "other.ckpt").string());
  CHECK_THROWS_AS(RestorationModel::load((dir / "other.ckpt").string(), (dir / "d.ckpt").string()), Error);
  CHECK_THROWS_AS(RestorationModel::load("", (dir / "d.ckpt").string()), Error);
  try {
    RestorationModel::load((dir / "h.ckpt").string(), (dir / "missing.ckpt").string());
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::not_found);
  }
}

TEST_CASE("all-bands variant has no refinement module") {
  Rng rng(7);
  std::vector<TrainingPair> pairs;
  ModelConfig model;
  model.width = 8;
  model.spectrum = default_spectrum_config(2, 48);
  const auto clean = procedural_texture(32, rng);
  pairs.push_back({image_to_spectrum(degrade(clean, DegradationSpec{}, rng), model.spectrum),
                   image_to_spectrum(clean, model.spectrum)});
  TrainConfig cfg;
  cfg.iterations = 1;
  cfg.batch = 1;
  const auto d = train_diffusion(model, cfg, nullptr, pairs);
  const auto dir = scratch("all_bands");
  save_checkpoint(d.checkpoint, (dir / "d.ckpt").string());
  const auto rm = RestorationModel::load("", (dir / "d.ckpt").string());
  CHECK_FALSE(rm.hfrm().has_value());
  CHECK(rm.estimator().net().config().in_channels == 96);
  CHECK(rm.estimator().net().config().out_channels == 48);
  const auto r = rm.run(clean, make_ecs_plan(1000, 100, 2), 1);
  CHECK(r.refine_calls == 0);
  CHECK(r.eval_count == 2);
}

TEST_CASE("ECS-4 is more than 4x faster than DDIM-25 on the same model") {
  ModelConfig model;
  model.width = 16;
  model.hfrm_width = 16;
  const EstimatorModel est(model.estimator_config(),
                           nn::init_params<float>(nn::EstimatorNet(model.estimator_config()).layout(), 1));
  const HfrmModel hfrm(model.hfrm_config(), nn::init_params<float>(nn::HfrmNet(model.hfrm_config()).layout(), 2));
  const RestorationModel rm(hfrm, est, model.spectrum, model.schedule());
  Rng rng(8);
  const auto img = procedural_texture(64, rng);
  auto best = [&](const SamplingPlan& plan) {
    double t = 1e9;
    for (int i = 0; i < 3; ++i) t = std::min(t, rm.run(img, plan, 1).wall_time);
    return t;
  };
  const double ddim = best(make_ddim_plan(1000, 25));
  const double ecs = best(make_ecs_plan(1000, 100, 4));
  CHECK(ddim / ecs > 4.0);
}
