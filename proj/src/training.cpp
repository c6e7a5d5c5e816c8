#include "training.hpp"

#include <cmath>

#include "diffusion.hpp"
#include "errors.hpp"
#include "nn/adam.hpp"

namespace wavedm {

namespace {

constexpr std::uint64_t kInitSalt = 0x9E3779B97F4A7C15ull;

void write_common_meta(Checkpoint& ckpt, const ModelConfig& model, const TrainConfig& cfg, long long iteration) {
  ckpt.set("format.loss_reduction", std::string("mean"));
  ckpt.set("model.levels", static_cast<long long>(model.spectrum.levels));
  ckpt.set("model.channels", static_cast<long long>(model.spectrum.channels));
  ckpt.set("model.n_low", static_cast<long long>(model.spectrum.n_low));
  ckpt.set("model.gamma", model.spectrum.gamma);
  ckpt.set("model.width", static_cast<long long>(model.width));
  ckpt.set("model.hfrm_width", static_cast<long long>(model.hfrm_width));
  ckpt.set("model.hfrm_blocks", static_cast<long long>(model.hfrm_blocks));
  ckpt.set("schedule.kind", std::string("linear"));
  ckpt.set("schedule.T", static_cast<long long>(model.steps));
  ckpt.set("schedule.beta_start", model.beta_start);
  ckpt.set("schedule.beta_end", model.beta_end);
  ckpt.set("train.optimizer", std::string("adam"));
  ckpt.set("train.iterations", static_cast<long long>(cfg.iterations));
  ckpt.set("train.batch", static_cast<long long>(cfg.batch));
  ckpt.set("train.lr", cfg.lr);
  ckpt.set("train.seed", static_cast<long long>(cfg.seed));
  ckpt.set("train.fixed_t", static_cast<long long>(cfg.fixed_t));
  ckpt.set("train.ema_decay", cfg.ema_decay);
  ckpt.set("train.v_weighting", static_cast<long long>(cfg.v_weighting ? 1 : 0));
  ckpt.set("train.dataset", cfg.dataset.empty() ? std::string("in-memory") : cfg.dataset);
  ckpt.set("train.iteration", iteration);
}

void check_train_config(const TrainConfig& cfg) {
  require(cfg.iterations >= 0, Errc::invalid_argument, "iterations must be >= 0");
  require(cfg.batch >= 1, Errc::invalid_argument, "batch size must be >= 1");
  require(cfg.lr > 0.0, Errc::invalid_argument, "learning rate must be > 0");
  require(cfg.ema_decay == 0.0, Errc::invalid_argument, "EMA is not supported at desk scale; set ema_decay = 0");
}

void check_data(std::span<const TrainingPair> data, const SpectrumConfig& spec) {
  require(!data.empty(), Errc::invalid_argument, "training dataset is empty");
  const BandStack& first = data.front().degraded;
  for (const auto& pair : data) {
    require(pair.degraded.bands == spec.total_bands() && pair.clean.bands == spec.total_bands(), Errc::shape_mismatch,
            "training spectra must have " + std::to_string(spec.total_bands()) + " bands");
    require(pair.degraded.same_shape(first) && pair.clean.same_shape(first), Errc::shape_mismatch,
            "all training spectra must share one shape");
  }
}

// Copies bands [first, first + count) of `src` into item `item` of `dst`
// starting at channel `channel`.
void put_bands(nn::Tensor<float>& dst, int item, int channel, const BandStack& src, int first, int count) {
  const std::size_t plane = src.plane_size();
  const double* from = src.data.data() + first * plane;
  float* to = dst.channel(item, channel);
  for (std::size_t i = 0; i < count * plane; ++i) to[i] = static_cast<float>(from[i]);
}

void check_finite(double loss, int iteration) {
  if (!std::isfinite(loss)) {
    fail(Errc::numeric, "training loss became non-finite (" + std::to_string(loss) + ") at iteration " +
                            std::to_string(iteration));
  }
}

}  // namespace

Checkpoint make_hfrm_checkpoint(const ModelConfig& model, const TrainConfig& cfg, std::vector<float> params,
                                long long iteration) {
  const nn::HfrmConfig arch = model.hfrm_config();
  Checkpoint ckpt;
  ckpt.kind = "hfrm";
  ckpt.set("arch.in_channels", static_cast<long long>(arch.in_channels));
  ckpt.set("arch.out_channels", static_cast<long long>(arch.out_channels));
  ckpt.set("arch.width", static_cast<long long>(arch.width));
  ckpt.set("arch.blocks", static_cast<long long>(arch.blocks));
  ckpt.set("arch.skip_offset", static_cast<long long>(arch.skip_offset));
  write_common_meta(ckpt, model, cfg, iteration);
  ckpt.layout = nn::HfrmNet(arch).layout();
  ckpt.params = std::move(params);
  require(ckpt.params.size() == ckpt.layout.total, Errc::shape_mismatch, "refinement parameter count mismatch");
  return ckpt;
}

Checkpoint make_estimator_checkpoint(const ModelConfig& model, const TrainConfig& cfg, std::vector<float> params,
                                     long long iteration, const std::string& hfrm_fingerprint) {
  const nn::EstimatorConfig arch = model.estimator_config();
  Checkpoint ckpt;
  ckpt.kind = "estimator";
  ckpt.set("arch.in_channels", static_cast<long long>(arch.in_channels));
  ckpt.set("arch.out_channels", static_cast<long long>(arch.out_channels));
  ckpt.set("arch.width", static_cast<long long>(arch.width));
  ckpt.set("arch.param", std::string(eps_param_name(model.param)));
  write_common_meta(ckpt, model, cfg, iteration);
  ckpt.set("hfrm.fingerprint", hfrm_fingerprint.empty() ? std::string("none") : hfrm_fingerprint);
  ckpt.layout = nn::EstimatorNet(arch).layout();
  ckpt.params = std::move(params);
  require(ckpt.params.size() == ckpt.layout.total, Errc::shape_mismatch, "estimator parameter count mismatch");
  return ckpt;
}

ModelConfig model_config_from_checkpoint(const Checkpoint& ckpt) {
  ModelConfig m;
  m.spectrum = spectrum_from_checkpoint(ckpt);
  m.width = static_cast<int>(ckpt.get_int("model.width"));
  if (ckpt.has("arch.param")) m.param = parse_eps_param(ckpt.get("arch.param"));
  m.hfrm_width = static_cast<int>(ckpt.get_int("model.hfrm_width"));
  m.hfrm_blocks = static_cast<int>(ckpt.get_int("model.hfrm_blocks"));
  m.steps = static_cast<int>(ckpt.get_int("schedule.T"));
  m.beta_start = ckpt.get_double("schedule.beta_start");
  m.beta_end = ckpt.get_double("schedule.beta_end");
  return m;
}

TrainResult train_hfrm(const ModelConfig& model, const TrainConfig& cfg, std::span<const TrainingPair> data,
                       const ProgressFn& progress) {
  model.spectrum.validate();
  check_train_config(cfg);
  check_data(data, model.spectrum);
  const nn::HfrmNet net(model.hfrm_config());
  std::vector<float> params = nn::init_params<float>(net.layout(), cfg.seed * kInitSalt + 1);
  std::vector<float> grads(params.size());
  nn::Adam adam(params.size(), {.lr = cfg.lr});
  Rng rng(cfg.seed);
  std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);

  const SpectrumConfig& spec = model.spectrum;
  const int h = data.front().degraded.height;
  const int w = data.front().degraded.width;
  TrainResult result;
  result.losses.reserve(cfg.iterations);
  nn::HfrmState<float> state;
  for (int it = 0; it < cfg.iterations; ++it) {
    nn::Tensor<float> input(cfg.batch, spec.total_bands(), h, w);
    nn::Tensor<float> target(cfg.batch, spec.high_bands(), h, w);
    for (int b = 0; b < cfg.batch; ++b) {
      const TrainingPair& pair = data[pick(rng)];
      put_bands(input, b, 0, pair.degraded, 0, spec.total_bands());
      put_bands(target, b, 0, pair.clean, spec.n_low, spec.high_bands());
    }
    const nn::Tensor<float> out = net.forward<float>(params, input, &state);
    nn::Tensor<float> dout(out.n, out.c, out.h, out.w);
    const double inv_count = 1.0 / static_cast<double>(out.size());
    double loss = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double d = static_cast<double>(out.data[i]) - target.data[i];
      loss += std::abs(d);
      dout.data[i] = static_cast<float>((d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0)) * inv_count);
    }
    loss *= inv_count;
    check_finite(loss, it);
    result.losses.push_back(loss);
    if (progress) progress(it, loss);
    std::fill(grads.begin(), grads.end(), 0.0f);
    net.backward<float>(params, state, dout, grads);
    adam.update<float>(params, grads);
  }
  result.checkpoint = make_hfrm_checkpoint(model, cfg, std::move(params), cfg.iterations);
  return result;
}

TrainResult train_diffusion(const ModelConfig& model, const TrainConfig& cfg, const Checkpoint* hfrm,
                            std::span<const TrainingPair> data, const ProgressFn& progress) {
  model.spectrum.validate();
  check_train_config(cfg);
  check_data(data, model.spectrum);
  const SpectrumConfig& spec = model.spectrum;
  const NoiseSchedule sched = model.schedule();
  require(cfg.fixed_t >= 0 && cfg.fixed_t <= sched.steps(), Errc::invalid_argument, "fixed_t outside [0, T]");

  // Frozen refinement outputs, computed once per training pair.
  std::vector<BandStack> cond_high(data.size());
  std::string hfrm_print;
  if (spec.uses_refinement()) {
    require(hfrm != nullptr, Errc::invalid_argument, "a refinement checkpoint is required when n_low < total bands");
    const ModelConfig frozen = model_config_from_checkpoint(*hfrm);
    require(frozen.spectrum.levels == spec.levels && frozen.spectrum.n_low == spec.n_low &&
                frozen.spectrum.gamma == spec.gamma && frozen.spectrum.channels == spec.channels,
            Errc::invalid_argument, "refinement checkpoint was trained for a different band split");
    require(frozen.schedule() == sched, Errc::invalid_argument,
            "schedule mismatch between refinement checkpoint and diffusion config");
    const HfrmModel refine = HfrmModel::from_checkpoint(*hfrm);
    for (std::size_t i = 0; i < data.size(); ++i) cond_high[i] = refine.forward(data[i].degraded);
    hfrm_print = fingerprint_hex(hfrm->params);
  }

  const nn::EstimatorNet net(model.estimator_config());
  std::vector<float> params = nn::init_params<float>(net.layout(), cfg.seed * kInitSalt + 2);
  std::vector<float> grads(params.size());
  nn::Adam adam(params.size(), {.lr = cfg.lr});
  Rng rng(cfg.seed);
  std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
  std::uniform_int_distribution<int> pick_t(1, sched.steps());
  std::normal_distribution<double> normal(0.0, 1.0);

  const int h = data.front().degraded.height;
  const int w = data.front().degraded.width;
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  const int high = spec.uses_refinement() ? spec.high_bands() : 0;
  TrainResult result;
  result.losses.reserve(cfg.iterations);
  nn::EstimatorState<float> state;
  std::vector<int> steps(cfg.batch);
  std::vector<EpsCoeffs> coeffs(cfg.batch);
  std::vector<double> weights(cfg.batch);
  for (int it = 0; it < cfg.iterations; ++it) {
    nn::Tensor<float> input(cfg.batch, spec.n_low + high + spec.total_bands(), h, w);
    nn::Tensor<float> target(cfg.batch, spec.n_low, h, w);
    for (int b = 0; b < cfg.batch; ++b) {
      const std::size_t idx = pick(rng);
      const int t = cfg.fixed_t > 0 ? cfg.fixed_t : pick_t(rng);
      steps[b] = t;
      coeffs[b] = eps_coeffs(model.param, sched.alpha_bar(t));
      weights[b] = cfg.v_weighting ? 1.0 / sched.alpha_bar(t) : 1.0;
      const double signal = std::sqrt(sched.alpha_bar(t));
      const double noise = std::sqrt(1.0 - sched.alpha_bar(t));
      const BandStack& clean = data[idx].clean;
      float* x_t = input.channel(b, 0);
      float* eps = target.channel(b, 0);
      for (std::size_t i = 0; i < spec.n_low * plane; ++i) {
        const double e = normal(rng);
        eps[i] = static_cast<float>(e);
        x_t[i] = static_cast<float>(signal * clean.data[i] + noise * e);
      }
      if (high > 0) put_bands(input, b, spec.n_low, cond_high[idx], 0, high);
      put_bands(input, b, spec.n_low + high, data[idx].degraded, 0, spec.total_bands());
    }
    const nn::Tensor<float> out = net.forward<float>(params, input, steps, &state);
    nn::Tensor<float> dout(out.n, out.c, out.h, out.w);
    const double loss = estimator_batch_loss<float>(out, input, target, coeffs, weights, spec.n_low + high, &dout);
    check_finite(loss, it);
    result.losses.push_back(loss);
    if (progress) progress(it, loss);
    std::fill(grads.begin(), grads.end(), 0.0f);
    net.backward<float>(params, state, dout, grads);
    adam.update<float>(params, grads);
  }
  result.checkpoint = make_estimator_checkpoint(model, cfg, std::move(params), cfg.iterations, hfrm_print);
  return result;
}

}  // namespace wavedm
