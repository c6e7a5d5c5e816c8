#include "pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "errors.hpp"
#include "image.hpp"
#include "metrics.hpp"
#include "training.hpp"

namespace wavedm {

namespace {

void check_finite(const ImageGrid& img) {
  for (double v : img.data) {
    if (!std::isfinite(v)) fail(Errc::numeric, "restoration produced non-finite values");
  }
}

std::uint64_t item_seed(std::uint64_t seed, std::size_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

ImageGrid spectrum_to_image(const BandStack& low, const BandStack& high, const SpectrumConfig& spec) {
  SpectrumSplit split;
  split.layout = BandLayout::make(spec.levels, spec.channels);
  split.scale_applied = spec.gamma;
  split.n_low = spec.n_low;
  split.low = low;
  split.high = high;
  return clamp(denormalize(idwt2(merge_spectrum(split))));
}

RestorationResult restore(const ImageGrid& degraded, const HighBandEstimator& refine, const NoiseEstimator& est,
                          const SamplingPlan& plan, const NoiseSchedule& sched, const SpectrumConfig& spec, Rng& rng,
                          const ImageGrid* truth, SamplerTrace* trace) {
  spec.validate();
  require(plan.steps == sched.steps(), Errc::invalid_argument,
          "sampling plan has T=" + std::to_string(plan.steps) + " but the schedule has T=" +
              std::to_string(sched.steps()));
  const auto start = std::chrono::steady_clock::now();

  const BandStack cond = image_to_spectrum(degraded, spec);
  RestorationResult result;

  BandStack high;
  if (spec.uses_refinement()) {
    require(static_cast<bool>(refine), Errc::invalid_argument, "a refinement module is required when n_low < total");
    high = refine(cond);
    result.refine_calls = 1;
    require(high.bands == spec.high_bands() && high.height == cond.height && high.width == cond.width,
            Errc::shape_mismatch, "refinement output has the wrong shape");
  }

  SamplerTrace local;
  SamplerTrace* tr = trace ? trace : &local;
  const int evals_before = tr->eval_count;
  const BandStack low =
      sample(est, high, cond, plan, sched, SampleShape{spec.n_low, cond.height, cond.width}, rng, tr);
  result.eval_count = tr->eval_count - evals_before;

  result.restored = spectrum_to_image(low, high, spec);
  result.high = std::move(high);
  result.restored.lo = degraded.lo;
  result.restored.hi = degraded.hi;
  check_finite(result.restored);
  result.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (truth) {
    result.psnr = psnr(result.restored, *truth);
    result.ssim = ssim(result.restored, *truth);
  }
  return result;
}

RestorationModel::RestorationModel(std::optional<HfrmModel> hfrm, EstimatorModel estimator, SpectrumConfig spec,
                                   NoiseSchedule sched)
    : hfrm_(std::move(hfrm)), estimator_(std::move(estimator)), spec_(spec), sched_(std::move(sched)) {
  spec_.validate();
  require(hfrm_.has_value() == spec_.uses_refinement(), Errc::invalid_argument,
          spec_.uses_refinement() ? "this estimator needs a refinement checkpoint"
                                  : "this estimator diffuses every band and takes no refinement checkpoint");
}

RestorationModel RestorationModel::load(const std::string& hfrm_path, const std::string& estimator_path) {
  const Checkpoint est_ckpt = load_checkpoint(estimator_path);
  EstimatorModel est = EstimatorModel::from_checkpoint(est_ckpt);
  const SpectrumConfig spec = spectrum_from_checkpoint(est_ckpt);
  NoiseSchedule sched = schedule_from_checkpoint(est_ckpt);

  std::optional<HfrmModel> hfrm;
  if (spec.uses_refinement()) {
    require(!hfrm_path.empty(), Errc::invalid_argument, "this estimator needs a refinement checkpoint");
    const Checkpoint h_ckpt = load_checkpoint(hfrm_path);
    hfrm = HfrmModel::from_checkpoint(h_ckpt);
    const SpectrumConfig hspec = spectrum_from_checkpoint(h_ckpt);
    require(hspec.levels == spec.levels && hspec.n_low == spec.n_low && hspec.channels == spec.channels,
            Errc::format, "refinement and estimator checkpoints disagree on the band split");
    const std::string expected = est_ckpt.get("hfrm.fingerprint");
    const std::string got = fingerprint_hex(hfrm->params());
    require(expected == got, Errc::format,
            "refinement checkpoint fingerprint " + got + " does not match the one the estimator was trained with (" +
                expected + ")");
  }
  return RestorationModel(std::move(hfrm), std::move(est), spec, std::move(sched));
}

RestorationResult RestorationModel::run(const ImageGrid& degraded, const SamplingPlan& plan, std::uint64_t seed,
                                        const ImageGrid* truth, SamplerTrace* trace) const {
  const ImageGrid padded = pad_reflect(degraded, pad_multiple());
  HighBandEstimator refine;
  if (hfrm_) refine = [this](const BandStack& s) { return hfrm_->forward(s); };
  Rng rng(seed);
  RestorationResult r = restore(padded, refine, estimator_.as_estimator(), plan, sched_, spec_, rng, nullptr, trace);
  r.restored = crop(r.restored, degraded.height, degraded.width);
  if (truth) {
    r.psnr = psnr(r.restored, *truth);
    r.ssim = ssim(r.restored, *truth);
  }
  return r;
}

EvalReport evaluate(const std::vector<ManifestEntry>& entries, const Restorer& restorer, std::uint64_t seed) {
  require(!entries.empty(), Errc::invalid_argument, "no images to evaluate");
  EvalReport report;
  report.mean.id = "mean";
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const ImageGrid clean = load_png(entries[i].clean);
    const ImageGrid degraded = load_png(entries[i].degraded);
    require(clean.height == degraded.height && clean.width == degraded.width && clean.channels == degraded.channels,
            Errc::shape_mismatch, "clean and degraded images differ in shape for '" + entries[i].id + "'");
    const RestorationResult r = restorer(degraded, clean, item_seed(seed, i));
    EvalRow row;
    row.id = entries[i].id;
    row.psnr = psnr(r.restored, clean);
    row.ssim = ssim(r.restored, clean);
    row.psnr_degraded = psnr(degraded, clean);
    row.ssim_degraded = ssim(degraded, clean);
    row.time = r.wall_time;
    row.evals = r.eval_count;
    report.rows.push_back(row);
  }
  const double n = static_cast<double>(report.rows.size());
  double evals = 0.0;
  for (const auto& row : report.rows) {
    report.mean.psnr += row.psnr / n;
    report.mean.ssim += row.ssim / n;
    report.mean.psnr_degraded += row.psnr_degraded / n;
    report.mean.ssim_degraded += row.ssim_degraded / n;
    report.mean.time += row.time / n;
    evals += row.evals / n;
  }
  report.mean.evals = static_cast<int>(std::lround(evals));
  return report;
}

EvalReport evaluate(const std::vector<ManifestEntry>& entries, const RestorationModel& model, const SamplingPlan& plan,
                    std::uint64_t seed) {
  return evaluate(
      entries,
      [&](const ImageGrid& degraded, const ImageGrid&, std::uint64_t s) { return model.run(degraded, plan, s); },
      seed);
}

void write_report_csv(const EvalReport& report, const std::string& path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), Errc::io, "cannot write '" + path + "'");
  out << "id,psnr,ssim,psnr_degraded,ssim_degraded,time_s,evals\n";
  auto line = [&](const EvalRow& r) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s,%.4f,%.5f,%.4f,%.5f,%.4f,%d\n", r.id.c_str(), r.psnr, r.ssim, r.psnr_degraded,
                  r.ssim_degraded, r.time, r.evals);
    out << buf;
  };
  for (const auto& r : report.rows) line(r);
  line(report.mean);
  require(static_cast<bool>(out), Errc::io, "failed writing '" + path + "'");
}

std::vector<TrainingPair> load_training_pairs(const std::vector<ManifestEntry>& entries, const SpectrumConfig& spec) {
  std::vector<TrainingPair> pairs;
  pairs.reserve(entries.size());
  const int multiple = 4 << spec.levels;
  for (const auto& e : entries) {
    const ImageGrid clean = pad_reflect(load_png(e.clean), multiple);
    const ImageGrid degraded = pad_reflect(load_png(e.degraded), multiple);
    require(clean.height == degraded.height && clean.width == degraded.width, Errc::shape_mismatch,
            "clean and degraded images differ in shape for '" + e.id + "'");
    pairs.push_back({image_to_spectrum(degraded, spec), image_to_spectrum(clean, spec)});
  }
  return pairs;
}

}  // namespace wavedm
