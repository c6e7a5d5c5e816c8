#include "models.hpp"

#include <cmath>

#include "errors.hpp"
#include "image.hpp"

namespace wavedm {

namespace {

void check_layout(const nn::ParamLayout& expected, const nn::ParamLayout& got, const std::string& kind) {
  bool ok = expected.total == got.total && expected.entries.size() == got.entries.size();
  for (std::size_t i = 0; ok && i < expected.entries.size(); ++i) {
    const auto& a = expected.entries[i];
    const auto& b = got.entries[i];
    ok = a.name == b.name && a.shape == b.shape && a.offset == b.offset;
  }
  if (!ok) fail(Errc::format, kind + " checkpoint manifest does not match the declared architecture");
}

}  // namespace

void SpectrumConfig::validate() const {
  require(levels >= 1 && levels <= 4, Errc::invalid_argument, "wavelet levels must be in [1, 4]");
  require(channels >= 1, Errc::invalid_argument, "channel count must be >= 1");
  require(n_low >= 1 && n_low <= total_bands(), Errc::invalid_argument,
          "diffused band count must be in [1, " + std::to_string(total_bands()) + "], got " + std::to_string(n_low));
  require(gamma != 0.0 && std::isfinite(gamma), Errc::invalid_argument, "gamma must be finite and non-zero");
}

const char* eps_param_name(EpsParam p) {
  return p == EpsParam::direct ? "direct" : "residual_v";
}

EpsParam parse_eps_param(const std::string& s) {
  if (s == "direct") return EpsParam::direct;
  if (s == "residual_v") return EpsParam::residual_v;
  fail(Errc::invalid_argument, "unknown estimator parameterization '" + s + "' (expected direct or residual_v)");
}

EpsCoeffs eps_coeffs(EpsParam p, double alpha_bar) {
  if (p == EpsParam::direct) return {0.0, 0.0, 1.0};
  const double signal = std::sqrt(alpha_bar);
  const double noise = std::sqrt(1.0 - alpha_bar);
  return {noise, -noise * signal, signal};
}

SpectrumConfig default_spectrum_config(int levels, int n_low, int channels) {
  SpectrumConfig cfg;
  cfg.levels = levels;
  cfg.channels = channels;
  cfg.n_low = n_low;
  cfg.gamma = std::ldexp(1.0, -levels);
  cfg.validate();
  return cfg;
}

nn::EstimatorConfig ModelConfig::estimator_config() const {
  nn::EstimatorConfig cfg;
  cfg.in_channels = spectrum.n_low + (spectrum.uses_refinement() ? spectrum.high_bands() : 0) + spectrum.total_bands();
  cfg.out_channels = spectrum.n_low;
  cfg.width = width;
  return cfg;
}

nn::HfrmConfig ModelConfig::hfrm_config() const {
  require(spectrum.uses_refinement(), Errc::invalid_argument, "all bands are diffused; no refinement module");
  nn::HfrmConfig cfg;
  cfg.in_channels = spectrum.total_bands();
  cfg.out_channels = spectrum.high_bands();
  cfg.width = hfrm_width;
  cfg.blocks = hfrm_blocks;
  cfg.skip_offset = spectrum.n_low;
  return cfg;
}

template <typename T>
nn::Tensor<T> to_tensor(std::span<const BandStack* const> parts) {
  const BandStack joined = concat_bands(parts);
  nn::Tensor<T> t(1, joined.bands, joined.height, joined.width);
  for (std::size_t i = 0; i < joined.data.size(); ++i) t.data[i] = static_cast<T>(joined.data[i]);
  return t;
}

template nn::Tensor<float> to_tensor<float>(std::span<const BandStack* const>);
template nn::Tensor<double> to_tensor<double>(std::span<const BandStack* const>);

BandStack to_bands(const nn::Tensor<float>& t, int item) {
  BandStack out(t.c, t.h, t.w);
  const float* src = t.item(item);
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = src[i];
  return out;
}

HfrmModel::HfrmModel(const nn::HfrmConfig& cfg, std::vector<float> params) : net_(cfg), params_(std::move(params)) {
  require(params_.size() == net_.layout().total, Errc::shape_mismatch, "refinement parameter count mismatch");
}

HfrmModel HfrmModel::from_checkpoint(const Checkpoint& ckpt) {
  require(ckpt.kind == "hfrm", Errc::format, "expected an hfrm checkpoint, got '" + ckpt.kind + "'");
  nn::HfrmConfig cfg;
  cfg.in_channels = static_cast<int>(ckpt.get_int("arch.in_channels"));
  cfg.out_channels = static_cast<int>(ckpt.get_int("arch.out_channels"));
  cfg.width = static_cast<int>(ckpt.get_int("arch.width"));
  cfg.blocks = static_cast<int>(ckpt.get_int("arch.blocks"));
  cfg.skip_offset = static_cast<int>(ckpt.get_int("arch.skip_offset"));
  HfrmModel model(cfg, ckpt.params);
  check_layout(model.net_.layout(), ckpt.layout, "hfrm");
  return model;
}

BandStack HfrmModel::forward(const BandStack& degraded_spectrum) const {
  const BandStack* parts[] = {&degraded_spectrum};
  const auto x = to_tensor<float>(parts);
  return to_bands(net_.forward<float>(params_, x), 0);
}

EstimatorModel::EstimatorModel(const nn::EstimatorConfig& cfg, std::vector<float> params, EpsParam param,
                               NoiseSchedule sched)
    : net_(cfg), params_(std::move(params)), param_(param), sched_(std::move(sched)) {
  require(params_.size() == net_.layout().total, Errc::shape_mismatch, "estimator parameter count mismatch");
}

EstimatorModel EstimatorModel::from_checkpoint(const Checkpoint& ckpt) {
  require(ckpt.kind == "estimator", Errc::format, "expected an estimator checkpoint, got '" + ckpt.kind + "'");
  nn::EstimatorConfig cfg;
  cfg.in_channels = static_cast<int>(ckpt.get_int("arch.in_channels"));
  cfg.out_channels = static_cast<int>(ckpt.get_int("arch.out_channels"));
  cfg.width = static_cast<int>(ckpt.get_int("arch.width"));
  const EpsParam param = ckpt.has("arch.param") ? parse_eps_param(ckpt.get("arch.param")) : EpsParam::direct;
  EstimatorModel model(cfg, ckpt.params, param, schedule_from_checkpoint(ckpt));
  check_layout(model.net_.layout(), ckpt.layout, "estimator");
  return model;
}

BandStack EstimatorModel::forward(const BandStack& x_t_low, const BandStack& cond_high,
                                  const BandStack& cond_spectrum, int t) const {
  const BandStack* parts[] = {&x_t_low, &cond_high, &cond_spectrum};
  const auto x = to_tensor<float>(parts);
  const int steps[] = {t};
  BandStack out = to_bands(net_.forward<float>(params_, x, steps), 0);
  if (param_ == EpsParam::direct) return out;
  require(x_t_low.same_shape(out) && cond_spectrum.bands >= out.bands, Errc::shape_mismatch,
          "estimator inputs do not match its output shape");
  const EpsCoeffs c = eps_coeffs(param_, sched_.alpha_bar(t));
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    out.data[i] = c.x_t * x_t_low.data[i] + c.prior * cond_spectrum.data[i] + c.raw * out.data[i];
  }
  return out;
}

NoiseEstimator EstimatorModel::as_estimator() const {
  return [this](const BandStack& x_t, const BandStack& high, const BandStack& spectrum, int t) {
    return forward(x_t, high, spectrum, t);
  };
}

SpectrumConfig spectrum_from_checkpoint(const Checkpoint& ckpt) {
  SpectrumConfig cfg;
  cfg.levels = static_cast<int>(ckpt.get_int("model.levels"));
  cfg.channels = static_cast<int>(ckpt.get_int("model.channels"));
  cfg.n_low = static_cast<int>(ckpt.get_int("model.n_low"));
  cfg.gamma = ckpt.get_double("model.gamma");
  cfg.validate();
  return cfg;
}

NoiseSchedule schedule_from_checkpoint(const Checkpoint& ckpt) {
  require(ckpt.get("schedule.kind") == "linear", Errc::format, "unsupported schedule kind");
  return make_linear_schedule(static_cast<int>(ckpt.get_int("schedule.T")), ckpt.get_double("schedule.beta_start"),
                              ckpt.get_double("schedule.beta_end"));
}

BandStack image_to_spectrum(const ImageGrid& image, const SpectrumConfig& cfg) {
  require(image.channels == cfg.channels, Errc::shape_mismatch,
          "image has " + std::to_string(image.channels) + " channels, model expects " + std::to_string(cfg.channels));
  return apply_scale(dwt2(normalize(image), cfg.levels), cfg.gamma).bands;
}

}  // namespace wavedm
