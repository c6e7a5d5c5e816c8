#include "wavedm/wavedm.h"

#include <cmath>
#include <exception>
#include <memory>
#include <optional>
#include <new>
#include <string>

#include "dataset.hpp"
#include "diffusion.hpp"
#include "errors.hpp"
#include "image.hpp"
#include "metrics.hpp"
#include "pipeline.hpp"
#include "spectrum_io.hpp"
#include "training.hpp"

using namespace wavedm;

struct wdm_image {
  ImageGrid grid;
};
struct wdm_spectrum {
  WaveletSpectrum spectrum;
};
struct wdm_schedule {
  NoiseSchedule schedule;
};
struct wdm_plan {
  SamplingPlan plan;
};
struct wdm_model {
  RestorationModel model;
};

namespace {

thread_local std::string g_last_error;

wdm_status to_status(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return WDM_ERR_INVALID_ARGUMENT;
    case Errc::shape_mismatch: return WDM_ERR_SHAPE;
    case Errc::not_found: return WDM_ERR_NOT_FOUND;
    case Errc::io: return WDM_ERR_IO;
    case Errc::format: return WDM_ERR_FORMAT;
    case Errc::numeric: return WDM_ERR_NUMERIC;
  }
  return WDM_ERR_INTERNAL;
}

template <typename F>
wdm_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return WDM_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return WDM_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return WDM_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  require(p != nullptr, Errc::invalid_argument, std::string(what) + " must not be NULL");
}

std::string str_or(const char* s, const char* fallback) { return s && *s ? std::string(s) : std::string(fallback); }

ModelConfig to_model_config(const wdm_model_config* c) {
  need(c, "model config");
  ModelConfig m;
  m.spectrum.levels = c->levels;
  m.spectrum.channels = c->channels;
  m.spectrum.n_low = c->n_low;
  m.spectrum.gamma = c->gamma == 0.0 ? std::ldexp(1.0, -c->levels) : c->gamma;
  m.spectrum.validate();
  m.width = c->width;
  m.hfrm_width = c->hfrm_width;
  m.hfrm_blocks = c->hfrm_blocks;
  m.steps = c->steps;
  m.beta_start = c->beta_start;
  m.beta_end = c->beta_end;
  m.param = c->residual_v ? EpsParam::residual_v : EpsParam::direct;
  require(m.width >= 1 && m.hfrm_width >= 1 && m.hfrm_blocks >= 0, Errc::invalid_argument,
          "network widths must be positive");
  return m;
}

TrainConfig to_train_config(const wdm_train_config* c, const std::string& manifest) {
  need(c, "train config");
  TrainConfig t;
  t.iterations = c->iterations;
  t.batch = c->batch;
  t.lr = c->lr;
  t.seed = c->seed;
  t.fixed_t = c->fixed_t;
  t.ema_decay = c->ema_decay;
  t.v_weighting = c->v_weighting != 0;
  t.dataset = manifest;
  return t;
}

std::vector<TrainingPair> load_split_pairs(const std::string& manifest, const std::string& split,
                                           const SpectrumConfig& spec) {
  const auto entries = select_split(read_manifest(manifest), split);
  require(!entries.empty(), Errc::not_found, "manifest '" + manifest + "' has no '" + split + "' entries");
  return load_training_pairs(entries, spec);
}

ProgressFn wrap_progress(wdm_progress_fn fn, void* user) {
  if (!fn) return {};
  return [fn, user](int it, double loss) { fn(it, loss, user); };
}

}  // namespace

extern "C" {

const char* wdm_version(void) { return "0.1.0"; }
const char* wdm_last_error(void) { return g_last_error.c_str(); }

const char* wdm_status_name(wdm_status status) {
  switch (status) {
    case WDM_OK: return "ok";
    case WDM_ERR_INVALID_ARGUMENT: return "invalid argument";
    case WDM_ERR_SHAPE: return "shape mismatch";
    case WDM_ERR_NOT_FOUND: return "not found";
    case WDM_ERR_IO: return "i/o error";
    case WDM_ERR_FORMAT: return "format error";
    case WDM_ERR_NUMERIC: return "numeric failure";
    case WDM_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

wdm_status wdm_image_create(int height, int width, int channels, const double* planar, wdm_image** out) {
  return guarded([&] {
    need(out, "out");
    require(height >= 1 && width >= 1 && channels >= 1, Errc::invalid_argument, "image dims must be positive");
    auto img = std::make_unique<wdm_image>();
    img->grid = ImageGrid(height, width, channels);
    if (planar) std::copy(planar, planar + img->grid.data.size(), img->grid.data.begin());
    for (double v : img->grid.data) require(std::isfinite(v), Errc::numeric, "image data must be finite");
    *out = img.release();
  });
}

wdm_status wdm_image_load_png(const char* path, wdm_image** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new wdm_image{load_png(path)};
  });
}

wdm_status wdm_image_save_png(const wdm_image* image, const char* path) {
  return guarded([&] {
    need(image, "image");
    need(path, "path");
    save_png(image->grid, path);
  });
}

void wdm_image_free(wdm_image* image) { delete image; }
int wdm_image_height(const wdm_image* image) { return image ? image->grid.height : 0; }
int wdm_image_width(const wdm_image* image) { return image ? image->grid.width : 0; }
int wdm_image_channels(const wdm_image* image) { return image ? image->grid.channels : 0; }
const double* wdm_image_data(const wdm_image* image) { return image ? image->grid.data.data() : nullptr; }

wdm_status wdm_image_pad(const wdm_image* image, int multiple, wdm_image** out) {
  return guarded([&] {
    need(image, "image");
    need(out, "out");
    require(multiple >= 1, Errc::invalid_argument, "pad multiple must be >= 1");
    *out = new wdm_image{pad_reflect(image->grid, multiple)};
  });
}

wdm_status wdm_image_crop(const wdm_image* image, int height, int width, wdm_image** out) {
  return guarded([&] {
    need(image, "image");
    need(out, "out");
    *out = new wdm_image{crop(image->grid, height, width)};
  });
}

wdm_status wdm_psnr(const wdm_image* a, const wdm_image* b, double* out_db) {
  return guarded([&] {
    need(a, "a");
    need(b, "b");
    need(out_db, "out");
    *out_db = psnr(a->grid, b->grid);
  });
}

wdm_status wdm_ssim(const wdm_image* a, const wdm_image* b, double* out) {
  return guarded([&] {
    need(a, "a");
    need(b, "b");
    need(out, "out");
    *out = ssim(a->grid, b->grid);
  });
}

wdm_status wdm_dwt2(const wdm_image* image, int levels, wdm_spectrum** out) {
  return guarded([&] {
    need(image, "image");
    need(out, "out");
    *out = new wdm_spectrum{dwt2(image->grid, levels)};
  });
}

wdm_status wdm_idwt2(const wdm_spectrum* spectrum, wdm_image** out) {
  return guarded([&] {
    need(spectrum, "spectrum");
    need(out, "out");
    *out = new wdm_image{idwt2(spectrum->spectrum)};
  });
}

wdm_status wdm_spectrum_scale(const wdm_spectrum* spectrum, double gamma, wdm_spectrum** out) {
  return guarded([&] {
    need(spectrum, "spectrum");
    need(out, "out");
    *out = new wdm_spectrum{apply_scale(spectrum->spectrum, gamma)};
  });
}

void wdm_spectrum_free(wdm_spectrum* spectrum) { delete spectrum; }
int wdm_spectrum_bands(const wdm_spectrum* s) { return s ? s->spectrum.band_count() : 0; }
int wdm_spectrum_height(const wdm_spectrum* s) { return s ? s->spectrum.bands_height() : 0; }
int wdm_spectrum_width(const wdm_spectrum* s) { return s ? s->spectrum.bands_width() : 0; }
int wdm_spectrum_levels(const wdm_spectrum* s) { return s ? s->spectrum.layout.levels : 0; }
double wdm_spectrum_scale_applied(const wdm_spectrum* s) { return s ? s->spectrum.scale_applied : 0.0; }
const double* wdm_spectrum_data(const wdm_spectrum* s) { return s ? s->spectrum.bands.data.data() : nullptr; }

wdm_status wdm_spectrum_band_info(const wdm_spectrum* spectrum, int band, int* level, int* subband, int* channel,
                                  int* phase) {
  return guarded([&] {
    need(spectrum, "spectrum");
    require(band >= 0 && band < spectrum->spectrum.band_count(), Errc::invalid_argument, "band index out of range");
    const BandInfo& info = spectrum->spectrum.layout.ordering[band];
    if (level) *level = info.level;
    if (subband) *subband = static_cast<int>(info.subband);
    if (channel) *channel = info.channel;
    if (phase) *phase = info.phase;
  });
}

wdm_status wdm_spectrum_save(const wdm_spectrum* spectrum, const char* path) {
  return guarded([&] {
    need(spectrum, "spectrum");
    need(path, "path");
    save_spectrum(spectrum->spectrum, path);
  });
}

wdm_status wdm_spectrum_load(const char* path, wdm_spectrum** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new wdm_spectrum{load_spectrum(path)};
  });
}

wdm_status wdm_spectrum_save_band_images(const wdm_spectrum* spectrum, const char* dir) {
  return guarded([&] {
    need(spectrum, "spectrum");
    need(dir, "dir");
    save_band_images(spectrum->spectrum, dir);
  });
}

wdm_status wdm_schedule_linear(int steps, double beta_start, double beta_end, wdm_schedule** out) {
  return guarded([&] {
    need(out, "out");
    *out = new wdm_schedule{make_linear_schedule(steps, beta_start, beta_end)};
  });
}

void wdm_schedule_free(wdm_schedule* schedule) { delete schedule; }

wdm_status wdm_schedule_alpha_bar(const wdm_schedule* schedule, int t, double* out) {
  return guarded([&] {
    need(schedule, "schedule");
    need(out, "out");
    *out = schedule->schedule.alpha_bar(t);
  });
}

wdm_status wdm_schedule_posterior_sigma2(const wdm_schedule* schedule, int t, double* out) {
  return guarded([&] {
    need(schedule, "schedule");
    need(out, "out");
    *out = schedule->schedule.posterior_sigma2(t);
  });
}

wdm_status wdm_plan_ddim(int steps, int sub_steps, wdm_plan** out) {
  return guarded([&] {
    need(out, "out");
    *out = new wdm_plan{make_ddim_plan(steps, sub_steps)};
  });
}

wdm_status wdm_plan_ecs(int steps, int stride, int evals, wdm_plan** out) {
  return guarded([&] {
    need(out, "out");
    *out = new wdm_plan{make_ecs_plan(steps, stride, evals)};
  });
}

wdm_status wdm_plan_ddpm(int steps, wdm_plan** out) {
  return guarded([&] {
    need(out, "out");
    *out = new wdm_plan{make_ddpm_plan(steps)};
  });
}

void wdm_plan_free(wdm_plan* plan) { delete plan; }

wdm_mode wdm_plan_mode(const wdm_plan* plan) {
  if (!plan) return WDM_MODE_DDIM;
  switch (plan->plan.mode) {
    case SamplingMode::ddpm_full: return WDM_MODE_DDPM;
    case SamplingMode::ddim: return WDM_MODE_DDIM;
    case SamplingMode::ecs: return WDM_MODE_ECS;
  }
  return WDM_MODE_DDIM;
}

int wdm_plan_steps(const wdm_plan* plan) { return plan ? plan->plan.steps : 0; }
int wdm_plan_stride(const wdm_plan* plan) { return plan ? plan->plan.stride : 0; }
int wdm_plan_evals(const wdm_plan* plan) { return plan ? plan->plan.evals : 0; }
int wdm_plan_stop(const wdm_plan* plan) { return plan ? plan->plan.stop : 0; }
int wdm_plan_timestamp_count(const wdm_plan* plan) {
  return plan ? static_cast<int>(plan->plan.timestamps.size()) : 0;
}
const int* wdm_plan_timestamps(const wdm_plan* plan) { return plan ? plan->plan.timestamps.data() : nullptr; }

wdm_status wdm_generate_corpus(const char* dir, int count, int size, uint64_t seed) {
  return guarded([&] {
    need(dir, "dir");
    generate_procedural_corpus(dir, count, size, seed);
  });
}

wdm_status wdm_synthesize_pairs(const char* clean_dir, const char* degradation, const char* out_dir, int holdout) {
  return guarded([&] {
    need(clean_dir, "clean_dir");
    need(out_dir, "out_dir");
    synthesize_pairs(clean_dir, parse_degradation(str_or(degradation, "gaussian_noise")), out_dir, holdout);
  });
}

wdm_status wdm_manifest_count(const char* manifest, const char* split, int* out) {
  return guarded([&] {
    need(manifest, "manifest");
    need(out, "out");
    *out = static_cast<int>(select_split(read_manifest(manifest), str_or(split, "all")).size());
  });
}

void wdm_model_config_default(wdm_model_config* cfg) {
  if (!cfg) return;
  const ModelConfig m;
  cfg->levels = m.spectrum.levels;
  cfg->n_low = m.spectrum.n_low;
  cfg->channels = m.spectrum.channels;
  cfg->gamma = 0.0;
  cfg->width = m.width;
  cfg->hfrm_width = m.hfrm_width;
  cfg->hfrm_blocks = m.hfrm_blocks;
  cfg->steps = m.steps;
  cfg->beta_start = m.beta_start;
  cfg->beta_end = m.beta_end;
  cfg->residual_v = m.param == EpsParam::residual_v ? 1 : 0;
}

void wdm_train_config_default(wdm_train_config* cfg) {
  if (!cfg) return;
  const TrainConfig t;
  cfg->iterations = t.iterations;
  cfg->batch = t.batch;
  cfg->lr = t.lr;
  cfg->seed = t.seed;
  cfg->fixed_t = t.fixed_t;
  cfg->ema_decay = t.ema_decay;
  cfg->v_weighting = t.v_weighting ? 1 : 0;
  cfg->split = nullptr;
}

wdm_status wdm_train_hfrm(const char* manifest, const wdm_model_config* model, const wdm_train_config* train,
                          const char* out_checkpoint, wdm_progress_fn progress, void* user) {
  return guarded([&] {
    need(manifest, "manifest");
    need(out_checkpoint, "out_checkpoint");
    const ModelConfig m = to_model_config(model);
    const TrainConfig t = to_train_config(train, manifest);
    const auto pairs = load_split_pairs(manifest, str_or(train->split, "train"), m.spectrum);
    const auto result = train_hfrm(m, t, pairs, wrap_progress(progress, user));
    save_checkpoint(result.checkpoint, out_checkpoint);
  });
}

wdm_status wdm_train_diffusion(const char* manifest, const char* hfrm_checkpoint, const wdm_model_config* model,
                               const wdm_train_config* train, const char* out_checkpoint, wdm_progress_fn progress,
                               void* user) {
  return guarded([&] {
    need(manifest, "manifest");
    need(out_checkpoint, "out_checkpoint");
    const ModelConfig m = to_model_config(model);
    const TrainConfig t = to_train_config(train, manifest);
    std::optional<Checkpoint> hfrm;
    if (hfrm_checkpoint && *hfrm_checkpoint) hfrm = load_checkpoint(hfrm_checkpoint);
    const auto pairs = load_split_pairs(manifest, str_or(train->split, "train"), m.spectrum);
    const auto result = train_diffusion(m, t, hfrm ? &*hfrm : nullptr, pairs, wrap_progress(progress, user));
    save_checkpoint(result.checkpoint, out_checkpoint);
  });
}

wdm_status wdm_model_load(const char* hfrm_checkpoint, const char* estimator_checkpoint, wdm_model** out) {
  return guarded([&] {
    need(estimator_checkpoint, "estimator_checkpoint");
    need(out, "out");
    *out = new wdm_model{RestorationModel::load(str_or(hfrm_checkpoint, ""), estimator_checkpoint)};
  });
}

void wdm_model_free(wdm_model* model) { delete model; }

wdm_status wdm_model_get_info(const wdm_model* model, wdm_model_info* out) {
  return guarded([&] {
    need(model, "model");
    need(out, "out");
    const RestorationModel& m = model->model;
    const SpectrumConfig& s = m.spectrum();
    out->levels = s.levels;
    out->channels = s.channels;
    out->n_low = s.n_low;
    out->total_bands = s.total_bands();
    out->has_hfrm = m.hfrm().has_value() ? 1 : 0;
    out->hfrm_in_channels = m.hfrm() ? m.hfrm()->net().config().in_channels : 0;
    out->hfrm_out_channels = m.hfrm() ? m.hfrm()->net().config().out_channels : 0;
    out->estimator_in_channels = m.estimator().net().config().in_channels;
    out->estimator_out_channels = m.estimator().net().config().out_channels;
    out->width = m.estimator().net().config().width;
    out->steps = m.schedule().steps();
    out->pad_multiple = m.pad_multiple();
  });
}

wdm_status wdm_restore(const wdm_model* model, const wdm_image* degraded, const wdm_plan* plan, uint64_t seed,
                       const wdm_image* truth, const char* trace_dir, wdm_image** out, wdm_restore_stats* stats) {
  return guarded([&] {
    need(model, "model");
    need(degraded, "degraded");
    need(plan, "plan");
    need(out, "out");
    SamplerTrace trace;
    trace.keep_snapshots = trace_dir != nullptr;
    const RestorationResult r = model->model.run(degraded->grid, plan->plan, seed, truth ? &truth->grid : nullptr,
                                                 trace_dir ? &trace : nullptr);
    if (trace_dir) save_trace(trace, r.high, model->model.spectrum(), trace_dir);
    if (stats) {
      stats->has_metrics = r.psnr.has_value() ? 1 : 0;
      stats->psnr = r.psnr.value_or(0.0);
      stats->ssim = r.ssim.value_or(0.0);
      stats->wall_time = r.wall_time;
      stats->eval_count = r.eval_count;
      stats->refine_calls = r.refine_calls;
    }
    *out = new wdm_image{r.restored};
  });
}

wdm_status wdm_evaluate(const wdm_model* model, const char* manifest, const char* split, const wdm_plan* plan,
                        uint64_t seed, const char* csv_path, wdm_eval_summary* out) {
  return guarded([&] {
    need(model, "model");
    need(manifest, "manifest");
    need(plan, "plan");
    const std::string which = str_or(split, "test");
    const auto entries = select_split(read_manifest(manifest), which);
    require(!entries.empty(), Errc::not_found, "manifest '" + std::string(manifest) + "' has no '" + which + "' entries");
    const EvalReport report = evaluate(entries, model->model, plan->plan, seed);
    if (csv_path) write_report_csv(report, csv_path);
    if (out) {
      out->images = static_cast<int>(report.rows.size());
      out->psnr = report.mean.psnr;
      out->ssim = report.mean.ssim;
      out->psnr_degraded = report.mean.psnr_degraded;
      out->ssim_degraded = report.mean.ssim_degraded;
      out->time = report.mean.time;
      out->evals = report.mean.evals;
    }
  });
}

wdm_status wdm_hfrm_l1(const wdm_model* model, const char* manifest, const char* split, double* refined_l1,
                       double* copy_l1) {
  return guarded([&] {
    need(model, "model");
    need(manifest, "manifest");
    const RestorationModel& m = model->model;
    require(m.hfrm().has_value(), Errc::invalid_argument, "model has no refinement module");
    const SpectrumConfig& s = m.spectrum();
    const auto pairs = load_split_pairs(manifest, str_or(split, "test"), s);
    double refined = 0.0, copied = 0.0;
    for (const auto& p : pairs) {
      const BandStack target = slice_bands(p.clean, s.n_low, s.high_bands());
      refined += hfrm_loss(m.hfrm()->forward(p.degraded).data, target.data);
      copied += hfrm_loss(slice_bands(p.degraded, s.n_low, s.high_bands()).data, target.data);
    }
    if (refined_l1) *refined_l1 = refined / static_cast<double>(pairs.size());
    if (copy_l1) *copy_l1 = copied / static_cast<double>(pairs.size());
  });
}

}  // extern "C"
