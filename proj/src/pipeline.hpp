#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "models.hpp"
#include "sampler.hpp"
#include "training.hpp"

namespace wavedm {

// Degraded spectrum (all bands, gamma-scaled) -> estimated clean high bands.
using HighBandEstimator = std::function<BandStack(const BandStack& degraded_spectrum)>;

struct RestorationResult {
  ImageGrid restored;
  std::optional<double> psnr;
  std::optional<double> ssim;
  double wall_time = 0.0;
  int eval_count = 0;
  int refine_calls = 0;
  BandStack high;  // refined high bands, in the (padded) geometry that was sampled
};

// normalize -> dwt2 -> scale -> refine high bands -> sample low bands ->
// merge -> unscale -> idwt2 -> denormalize. Image dims must be divisible by
// 2^levels; `refine` may be empty only when every band is diffused.
RestorationResult restore(const ImageGrid& degraded, const HighBandEstimator& refine, const NoiseEstimator& est,
                          const SamplingPlan& plan, const NoiseSchedule& sched, const SpectrumConfig& spec, Rng& rng,
                          const ImageGrid* truth = nullptr, SamplerTrace* trace = nullptr);

// Low bands plus high bands back to a [0, 1] image (used for trace dumps).
ImageGrid spectrum_to_image(const BandStack& low, const BandStack& high, const SpectrumConfig& spec);

// A refinement module and estimator loaded from checkpoints.
class RestorationModel {
 public:
  // `hfrm_path` may be empty when the estimator diffuses every band.
  static RestorationModel load(const std::string& hfrm_path, const std::string& estimator_path);
  RestorationModel(std::optional<HfrmModel> hfrm, EstimatorModel estimator, SpectrumConfig spec,
                   NoiseSchedule sched);

  const SpectrumConfig& spectrum() const { return spec_; }
  const NoiseSchedule& schedule() const { return sched_; }
  const std::optional<HfrmModel>& hfrm() const { return hfrm_; }
  const EstimatorModel& estimator() const { return estimator_; }
  // Pad multiple applied before restoration: the wavelet block times the
  // estimator's two halvings.
  int pad_multiple() const { return 4 << spec_.levels; }

  // Reflect-pads to pad_multiple(), restores, crops back.
  RestorationResult run(const ImageGrid& degraded, const SamplingPlan& plan, std::uint64_t seed,
                        const ImageGrid* truth = nullptr, SamplerTrace* trace = nullptr) const;

 private:
  std::optional<HfrmModel> hfrm_;
  EstimatorModel estimator_;
  SpectrumConfig spec_;
  NoiseSchedule sched_;
};

struct EvalRow {
  std::string id;
  double psnr = 0.0;
  double ssim = 0.0;
  double psnr_degraded = 0.0;
  double ssim_degraded = 0.0;
  double time = 0.0;
  int evals = 0;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  EvalRow mean;  // id "mean"
};

using Restorer = std::function<RestorationResult(const ImageGrid& degraded, const ImageGrid& truth, std::uint64_t seed)>;

EvalReport evaluate(const std::vector<ManifestEntry>& entries, const Restorer& restorer, std::uint64_t seed);
EvalReport evaluate(const std::vector<ManifestEntry>& entries, const RestorationModel& model, const SamplingPlan& plan,
                    std::uint64_t seed);

// Header: id,psnr,ssim,psnr_degraded,ssim_degraded,time_s,evals; last row "mean".
void write_report_csv(const EvalReport& report, const std::string& path);

std::vector<TrainingPair> load_training_pairs(const std::vector<ManifestEntry>& entries,
                                                     const SpectrumConfig& spec);

}  // namespace wavedm
