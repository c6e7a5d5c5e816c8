#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "run_config.hpp"
#include "wavedm/wavedm.h"

namespace fs = std::filesystem;
using wavedm::cli::RunConfig;
using wavedm::cli::UsageError;

namespace {

enum Exit { kOk = 0, kUsage = 1, kMissing = 2, kNumeric = 3 };

struct ApiError : std::runtime_error {
  wdm_status status;
  ApiError(wdm_status s, const std::string& msg) : std::runtime_error(msg), status(s) {}
};

void check(wdm_status s, const std::string& what) {
  if (s != WDM_OK) throw ApiError(s, what + ": " + wdm_last_error());
}

int exit_code(wdm_status s) {
  switch (s) {
    case WDM_OK: return kOk;
    case WDM_ERR_INVALID_ARGUMENT:
    case WDM_ERR_SHAPE: return kUsage;
    case WDM_ERR_NOT_FOUND:
    case WDM_ERR_IO:
    case WDM_ERR_FORMAT: return kMissing;
    case WDM_ERR_NUMERIC:
    case WDM_ERR_INTERNAL: return kNumeric;
  }
  return kNumeric;
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Image = std::unique_ptr<wdm_image, Deleter<wdm_image, wdm_image_free>>;
using Spectrum = std::unique_ptr<wdm_spectrum, Deleter<wdm_spectrum, wdm_spectrum_free>>;
using Plan = std::unique_ptr<wdm_plan, Deleter<wdm_plan, wdm_plan_free>>;
using Model = std::unique_ptr<wdm_model, Deleter<wdm_model, wdm_model_free>>;

Image load_image(const std::string& path) {
  wdm_image* raw = nullptr;
  check(wdm_image_load_png(path.c_str(), &raw), "loading image");
  return Image(raw);
}

Model load_model(const RunConfig& cfg) {
  if (cfg.str("estimator").empty()) throw UsageError("no estimator checkpoint given (--estimator)");
  wdm_model* raw = nullptr;
  check(wdm_model_load(cfg.str("hfrm").c_str(), cfg.str("estimator").c_str(), &raw), "loading model");
  return Model(raw);
}

Plan make_plan(const RunConfig& cfg, int steps) {
  wdm_plan* raw = nullptr;
  const std::string& mode = cfg.str("mode");
  if (mode == "ecs") {
    check(wdm_plan_ecs(steps, cfg.integer("stride"), cfg.integer("evals"), &raw), "building ECS plan");
  } else if (mode == "ddim") {
    check(wdm_plan_ddim(steps, cfg.integer("sub_steps"), &raw), "building DDIM plan");
  } else if (mode == "ddpm") {
    check(wdm_plan_ddpm(steps, &raw), "building DDPM plan");
  } else {
    throw UsageError("unknown mode '" + mode + "' (expected ecs, ddim or ddpm)");
  }
  return Plan(raw);
}

int model_steps(const wdm_model* model) {
  wdm_model_info info{};
  check(wdm_model_get_info(model, &info), "reading model info");
  return info.steps;
}

wdm_model_config model_config(const RunConfig& cfg) {
  wdm_model_config m;
  wdm_model_config_default(&m);
  m.levels = cfg.integer("levels");
  m.n_low = cfg.integer("n_low");
  m.channels = cfg.integer("channels");
  m.gamma = cfg.real("gamma");
  m.width = cfg.integer("width");
  m.hfrm_width = cfg.integer("hfrm_width");
  m.hfrm_blocks = cfg.integer("hfrm_blocks");
  m.steps = cfg.integer("steps");
  m.beta_start = cfg.real("beta_start");
  m.beta_end = cfg.real("beta_end");
  m.residual_v = cfg.integer("residual_v");
  return m;
}

wdm_train_config train_config(const RunConfig& cfg, const char* iterations_key) {
  wdm_train_config t;
  wdm_train_config_default(&t);
  t.iterations = cfg.integer(iterations_key);
  t.batch = cfg.integer("batch");
  t.lr = cfg.real("lr");
  t.seed = cfg.u64("seed");
  t.fixed_t = cfg.integer("fixed_t");
  t.ema_decay = cfg.real("ema_decay");
  t.v_weighting = cfg.integer("v_weighting");
  t.split = cfg.str("split").c_str();
  return t;
}

struct Progress {
  const char* label;
  int every;
};

void report_progress(int iteration, double loss, void* user) {
  const auto* p = static_cast<const Progress*>(user);
  if (iteration % p->every == 0) std::fprintf(stderr, "[%s] iteration %d loss %.5f\n", p->label, iteration, loss);
}

std::string require_manifest(const RunConfig& cfg) {
  if (cfg.str("manifest").empty()) throw UsageError("no manifest given (--manifest)");
  return cfg.str("manifest");
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
  return (fs::path(cfg.str("out")) / name).string();
}

std::string train_hfrm(const RunConfig& cfg, const std::string& out_dir) {
  const auto m = model_config(cfg);
  const auto t = train_config(cfg, "hfrm_iterations");
  Progress p{"hfrm", std::max(1, t.iterations / 10)};
  const std::string path = (fs::path(out_dir) / "hfrm.ckpt").string();
  fs::create_directories(out_dir);
  check(wdm_train_hfrm(require_manifest(cfg).c_str(), &m, &t, path.c_str(), report_progress, &p), "training HFRM");
  return path;
}

std::string train_estimator(const RunConfig& cfg, const std::string& hfrm, const std::string& out_dir) {
  const auto m = model_config(cfg);
  const auto t = train_config(cfg, "iterations");
  Progress p{"diffusion", std::max(1, t.iterations / 10)};
  const std::string path = (fs::path(out_dir) / "estimator.ckpt").string();
  fs::create_directories(out_dir);
  check(wdm_train_diffusion(require_manifest(cfg).c_str(), hfrm.empty() ? nullptr : hfrm.c_str(), &m, &t,
                            path.c_str(), report_progress, &p),
        "training noise estimator");
  return path;
}

wdm_eval_summary evaluate(const wdm_model* model, const wdm_plan* plan, const RunConfig& cfg,
                          const std::string& csv) {
  wdm_eval_summary s{};
  check(wdm_evaluate(model, require_manifest(cfg).c_str(), cfg.str("eval_split").c_str(), plan, cfg.u64("seed"),
                     csv.empty() ? nullptr : csv.c_str(), &s),
        "evaluating");
  return s;
}

int total_bands(const RunConfig& cfg) {
  int bands = cfg.integer("channels");
  for (int l = 0; l < cfg.integer("levels"); ++l) bands *= 4;
  return bands;
}

// Per-subcommand flag plumbing: --config, repeated --set, and named flags
// that map onto config keys. Precedence: defaults < file < --set < flags.
class Command {
 public:
  Command(CLI::App& app, const std::string& name, const std::string& help) : sub_(app.add_subcommand(name, help)) {
    sub_->add_option("--config", config_file_, "key = value run config file");
    sub_->add_option("--set", overrides_, "override a config key (key=value), repeatable");
  }

  Command& flag(const std::string& name, const std::string& key, const std::string& help) {
    sub_->add_option_function<std::string>(
        name, [this, key](const std::string& v) { given_[key] = v; }, help);
    return *this;
  }

  CLI::App* app() { return sub_; }

  RunConfig resolve() const {
    RunConfig cfg = RunConfig::defaults();
    if (!config_file_.empty()) cfg.load_file(config_file_);
    for (const auto& kv : overrides_) cfg.set(kv);
    for (const auto& [k, v] : given_) cfg.set(k, v);
    return cfg;
  }

 private:
  CLI::App* sub_;
  std::string config_file_;
  std::vector<std::string> overrides_;
  std::map<std::string, std::string> given_;
};

int cmd_dwt(const RunConfig& cfg, const std::string& input) {
  const int levels = cfg.integer("levels");
  if (levels < 1 || levels > 16) throw UsageError("levels must lie in [1, 16]");
  Image original = load_image(input);
  wdm_image* padded_raw = nullptr;
  check(wdm_image_pad(original.get(), 1 << levels, &padded_raw), "padding image");
  Image padded(padded_raw);
  if (wdm_image_height(padded.get()) != wdm_image_height(original.get()) ||
      wdm_image_width(padded.get()) != wdm_image_width(original.get())) {
    std::printf("reflect-padded %dx%d to %dx%d\n", wdm_image_height(original.get()), wdm_image_width(original.get()),
                wdm_image_height(padded.get()), wdm_image_width(padded.get()));
  }

  wdm_spectrum* spec_raw = nullptr;
  check(wdm_dwt2(padded.get(), levels, &spec_raw), "forward transform");
  Spectrum spectrum(spec_raw);
  wdm_image* back_raw = nullptr;
  check(wdm_idwt2(spectrum.get(), &back_raw), "inverse transform");
  Image back(back_raw);

  const std::size_t pixels = static_cast<std::size_t>(wdm_image_height(padded.get())) *
                             wdm_image_width(padded.get()) * wdm_image_channels(padded.get());
  const double* a = wdm_image_data(padded.get());
  const double* b = wdm_image_data(back.get());
  double max_err = 0.0, energy_image = 0.0, energy_bands = 0.0;
  for (std::size_t i = 0; i < pixels; ++i) {
    max_err = std::max(max_err, std::abs(a[i] - b[i]));
    energy_image += a[i] * a[i];
  }
  const int bands = wdm_spectrum_bands(spectrum.get());
  const int bh = wdm_spectrum_height(spectrum.get());
  const int bw = wdm_spectrum_width(spectrum.get());
  const double* s = wdm_spectrum_data(spectrum.get());
  for (std::size_t i = 0; i < static_cast<std::size_t>(bands) * bh * bw; ++i) energy_bands += s[i] * s[i];
  const double parseval = energy_image > 0.0 ? std::abs(energy_bands - energy_image) / energy_image : 0.0;

  cfg.write_to(cfg.str("out"));
  check(wdm_spectrum_save_band_images(spectrum.get(), out_path(cfg, "bands").c_str()), "writing band images");
  check(wdm_spectrum_save(spectrum.get(), out_path(cfg, "spectrum.wdms").c_str()), "writing spectrum");
  std::ofstream report(out_path(cfg, "roundtrip.txt"));
  report << "input = " << input << "\nlevels = " << levels << "\nbands = " << bands << "\nband_height = " << bh
         << "\nband_width = " << bw << "\nmax_abs_error = " << max_err << "\nparseval_relative = " << parseval << "\n";
  std::printf("%d bands of %dx%d\n", bands, bh, bw);
  std::printf("round-trip max error %.3e, Parseval deviation %.3e\n", max_err, parseval);
  return kOk;
}

int cmd_idwt(const RunConfig& cfg, const std::string& input) {
  wdm_spectrum* raw = nullptr;
  check(wdm_spectrum_load(input.c_str(), &raw), "loading spectrum");
  Spectrum spectrum(raw);
  wdm_image* img_raw = nullptr;
  check(wdm_idwt2(spectrum.get(), &img_raw), "inverse transform");
  Image img(img_raw);
  cfg.write_to(cfg.str("out"));
  const std::string path = out_path(cfg, "image.png");
  check(wdm_image_save_png(img.get(), path.c_str()), "writing image");
  std::printf("wrote %s (%dx%d, %d channels)\n", path.c_str(), wdm_image_height(img.get()), wdm_image_width(img.get()),
              wdm_image_channels(img.get()));
  return kOk;
}

int cmd_synth(const RunConfig& cfg) {
  std::string clean = cfg.str("clean_dir");
  const int generate = cfg.integer("generate");
  cfg.write_to(cfg.str("out"));
  if (generate > 0) {
    if (!clean.empty()) throw UsageError("give either --clean or --generate, not both");
    clean = out_path(cfg, "clean");
    check(wdm_generate_corpus(clean.c_str(), generate, cfg.integer("size"), cfg.u64("seed")), "generating corpus");
    std::printf("generated %d procedural images in %s\n", generate, clean.c_str());
  }
  if (clean.empty()) throw UsageError("no clean images given (--clean DIR or --generate N)");
  const std::string degraded = out_path(cfg, "pairs");
  check(wdm_synthesize_pairs(clean.c_str(), cfg.str("degradation").c_str(), degraded.c_str(), cfg.integer("holdout")),
        "synthesizing pairs");
  const std::string manifest = (fs::path(degraded) / "manifest.csv").string();
  int train = 0, test = 0;
  check(wdm_manifest_count(manifest.c_str(), "train", &train), "reading manifest");
  check(wdm_manifest_count(manifest.c_str(), "test", &test), "reading manifest");
  std::printf("manifest %s: %d train, %d test\n", manifest.c_str(), train, test);
  return kOk;
}

int cmd_train_hfrm(const RunConfig& cfg) {
  cfg.write_to(cfg.str("out"));
  const std::string path = train_hfrm(cfg, cfg.str("out"));
  std::printf("wrote %s\n", path.c_str());
  return kOk;
}

int cmd_train_diffusion(const RunConfig& cfg) {
  cfg.write_to(cfg.str("out"));
  const std::string path = train_estimator(cfg, cfg.str("hfrm"), cfg.str("out"));
  std::printf("wrote %s\n", path.c_str());
  return kOk;
}

int cmd_restore(const RunConfig& cfg, const std::string& input, const std::string& truth_path,
                const std::string& trace_dir) {
  Model model = load_model(cfg);
  Plan plan = make_plan(cfg, model_steps(model.get()));
  Image degraded = load_image(input);
  Image truth;
  if (!truth_path.empty()) truth = load_image(truth_path);

  cfg.write_to(cfg.str("out"));
  wdm_image* out_raw = nullptr;
  wdm_restore_stats stats{};
  check(wdm_restore(model.get(), degraded.get(), plan.get(), cfg.u64("seed"), truth.get(),
                    trace_dir.empty() ? nullptr : trace_dir.c_str(), &out_raw, &stats),
        "restoring");
  Image restored(out_raw);
  const std::string path = out_path(cfg, "restored.png");
  check(wdm_image_save_png(restored.get(), path.c_str()), "writing restored image");

  std::printf("%d network evaluations\n", stats.eval_count);
  std::printf("wall time %.3f s\n", stats.wall_time);
  if (stats.has_metrics) std::printf("PSNR %.3f dB, SSIM %.4f\n", stats.psnr, stats.ssim);
  std::printf("wrote %s\n", path.c_str());
  return kOk;
}

int cmd_eval(const RunConfig& cfg) {
  Model model = load_model(cfg);
  Plan plan = make_plan(cfg, model_steps(model.get()));
  cfg.write_to(cfg.str("out"));
  const std::string csv = out_path(cfg, "eval.csv");
  const auto s = evaluate(model.get(), plan.get(), cfg, csv);
  std::printf("%d images: PSNR %.3f dB (degraded %.3f), SSIM %.4f (degraded %.4f), %.3f s/image, %d evaluations\n",
              s.images, s.psnr, s.psnr_degraded, s.ssim, s.ssim_degraded, s.time, s.evals);
  std::printf("wrote %s\n", csv.c_str());
  return kOk;
}

int cmd_ablate_bands(const RunConfig& base) {
  const int total = total_bands(base);
  const auto n_list = base.int_list("n_list");
  for (int n : n_list) {
    if (n < 1 || n > total) {
      throw UsageError("n = " + std::to_string(n) + " outside [1, " + std::to_string(total) + "]");
    }
  }
  base.write_to(base.str("out"));
  const std::string csv_path = out_path(base, "ablate_bands.csv");
  std::ofstream csv(csv_path);
  csv << "n,psnr,ssim\n";
  for (int n : n_list) {
    RunConfig cfg = base;
    cfg.set("n_low", std::to_string(n));
    const std::string dir = out_path(base, "n_" + std::to_string(n));
    cfg.set("out", dir);
    cfg.write_to(dir);
    const std::string hfrm = n < total ? train_hfrm(cfg, dir) : std::string();
    const std::string est = train_estimator(cfg, hfrm, dir);
    cfg.set("hfrm", hfrm);
    cfg.set("estimator", est);
    Model model = load_model(cfg);
    Plan plan = make_plan(cfg, model_steps(model.get()));
    const auto s = evaluate(model.get(), plan.get(), cfg, (fs::path(dir) / "eval.csv").string());
    csv << n << "," << s.psnr << "," << s.ssim << "\n" << std::flush;
    std::printf("n=%d: PSNR %.3f dB, SSIM %.4f\n", n, s.psnr, s.ssim);
  }
  std::printf("wrote %s\n", csv_path.c_str());
  return kOk;
}

std::string csv_safe(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '"') c = ' ';
  }
  return s;
}

int cmd_ablate_ecs(const RunConfig& base) {
  Model model = load_model(base);
  const int steps = model_steps(model.get());
  const int repeats = base.integer("repeats");
  if (repeats < 1) throw UsageError("repeats must be >= 1");
  base.write_to(base.str("out"));
  const std::string csv_path = out_path(base, "ablate_ecs.csv");
  std::ofstream csv(csv_path);
  csv << "stride,evals,M,psnr,ssim,time_s,status\n";
  for (int stride : base.int_list("stride_list")) {
    for (int evals : base.int_list("evals_list")) {
      const long long m = static_cast<long long>(steps) - static_cast<long long>(evals - 1) * stride;
      wdm_plan* raw = nullptr;
      if (wdm_plan_ecs(steps, stride, evals, &raw) != WDM_OK) {
        const std::string why = wdm_last_error();
        csv << stride << "," << evals << "," << m << ",,,,invalid: " << csv_safe(why) << "\n" << std::flush;
        std::printf("stride=%d evals=%d: skipped (%s)\n", stride, evals, why.c_str());
        continue;
      }
      Plan plan(raw);
      wdm_eval_summary s{};
      double time = 0.0;
      for (int r = 0; r < repeats; ++r) {
        s = evaluate(model.get(), plan.get(), base, "");
        time += s.time;
      }
      time /= repeats;
      csv << stride << "," << evals << "," << wdm_plan_stop(plan.get()) << "," << s.psnr << "," << s.ssim << "," << time
          << ",ok\n"
          << std::flush;
      std::printf("stride=%d evals=%d M=%d: PSNR %.3f dB, SSIM %.4f, %.4f s/image\n", stride, evals,
                  wdm_plan_stop(plan.get()), s.psnr, s.ssim, time);
    }
  }
  std::printf("wrote %s\n", csv_path.c_str());
  return kOk;
}

int cmd_ablate_levels(const RunConfig& base) {
  const auto levels_list = base.int_list("levels_list");
  for (int l : levels_list) {
    if (l < 1 || l > 3) throw UsageError("levels must lie in [1, 3], got " + std::to_string(l));
  }
  base.write_to(base.str("out"));
  const std::string csv_path = out_path(base, "ablate_levels.csv");
  std::ofstream csv(csv_path);
  csv << "levels,bands,n_low,psnr,ssim\n";
  for (int l : levels_list) {
    RunConfig cfg = base;
    cfg.set("levels", std::to_string(l));
    const int total = total_bands(cfg);
    const int n_low = cfg.integer("n_low");
    if (n_low < 1 || n_low > total) {
      throw UsageError("n_low = " + std::to_string(n_low) + " exceeds the " + std::to_string(total) +
                       " bands at levels = " + std::to_string(l));
    }
    const std::string dir = out_path(base, "levels_" + std::to_string(l));
    cfg.set("out", dir);
    cfg.write_to(dir);
    const std::string hfrm = n_low < total ? train_hfrm(cfg, dir) : std::string();
    const std::string est = train_estimator(cfg, hfrm, dir);
    cfg.set("hfrm", hfrm);
    cfg.set("estimator", est);
    Model model = load_model(cfg);
    Plan plan = make_plan(cfg, model_steps(model.get()));
    const auto s = evaluate(model.get(), plan.get(), cfg, (fs::path(dir) / "eval.csv").string());
    csv << l << "," << total << "," << n_low << "," << s.psnr << "," << s.ssim << "\n" << std::flush;
    std::printf("levels=%d (%d bands): PSNR %.3f dB, SSIM %.4f\n", l, total, s.psnr, s.ssim);
  }
  std::printf("wrote %s\n", csv_path.c_str());
  return kOk;
}

void add_model_flags(Command& c) {
  c.flag("--levels", "levels", "wavelet levels")
      .flag("--n-low", "n_low", "number of diffused low-frequency bands")
      .flag("--width", "width", "estimator base width")
      .flag("--hfrm-width", "hfrm_width", "refinement module width")
      .flag("--steps", "steps", "diffusion steps T");
}

void add_train_flags(Command& c) {
  c.flag("--manifest", "manifest", "training manifest CSV")
      .flag("--split", "split", "manifest split to train on")
      .flag("--iterations", "iterations", "noise-estimator training iterations")
      .flag("--hfrm-iterations", "hfrm_iterations", "refinement training iterations")
      .flag("--batch", "batch", "batch size")
      .flag("--lr", "lr", "Adam learning rate");
}

void add_plan_flags(Command& c) {
  c.flag("--mode", "mode", "sampling mode: ecs, ddim or ddpm")
      .flag("--stride", "stride", "ECS sampling stride")
      .flag("--evals", "evals", "ECS network evaluations")
      .flag("--sub-steps", "sub_steps", "DDIM sub-sequence length");
}

void add_checkpoint_flags(Command& c) {
  c.flag("--hfrm", "hfrm", "refinement checkpoint").flag("--estimator", "estimator", "noise-estimator checkpoint");
}

void add_common_flags(Command& c) {
  c.flag("--out", "out", "output directory").flag("--seed", "seed", "random seed (default: $WAVEDM_SEED or 0)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wavelet-domain conditional diffusion for image restoration"};
  app.require_subcommand(1);
  app.set_version_flag("--version", wdm_version());

  std::string input, truth, trace;

  Command dwt(app, "dwt", "Haar-decompose an image into band images and a spectrum file");
  add_common_flags(dwt);
  dwt.flag("--levels", "levels", "wavelet levels");
  dwt.app()->add_option("image", input, "input PNG")->required();

  Command idwt(app, "idwt", "Reconstruct an image from a spectrum file");
  add_common_flags(idwt);
  idwt.app()->add_option("spectrum", input, "spectrum file written by dwt")->required();

  Command synth(app, "synth-data", "Build degraded/clean training pairs and a manifest");
  add_common_flags(synth);
  synth.flag("--clean", "clean_dir", "directory of clean PNGs")
      .flag("--generate", "generate", "generate N procedural clean images instead")
      .flag("--size", "size", "procedural image size")
      .flag("--degradation", "degradation", "degradation spec, e.g. gaussian_noise:sigma=0.1")
      .flag("--holdout", "holdout", "images reserved for the test split");

  Command thfrm(app, "train-hfrm", "Train the high-frequency refinement module");
  add_common_flags(thfrm);
  add_model_flags(thfrm);
  add_train_flags(thfrm);

  Command tdiff(app, "train-diffusion", "Train the conditional noise estimator");
  add_common_flags(tdiff);
  add_model_flags(tdiff);
  add_train_flags(tdiff);
  tdiff.flag("--hfrm", "hfrm", "frozen refinement checkpoint (omit when every band is diffused)");

  Command restore(app, "restore", "Restore one degraded image");
  add_common_flags(restore);
  add_checkpoint_flags(restore);
  add_plan_flags(restore);
  restore.app()->add_option("image", input, "degraded PNG")->required();
  restore.app()->add_option("--truth", truth, "clean reference PNG for PSNR/SSIM");
  restore.app()->add_option("--trace", trace, "directory for per-step snapshots");

  Command eval(app, "eval", "Evaluate a model on a manifest split and write a CSV report");
  add_common_flags(eval);
  add_checkpoint_flags(eval);
  add_plan_flags(eval);
  eval.flag("--manifest", "manifest", "manifest CSV").flag("--split", "eval_split", "split to evaluate");

  Command abands(app, "ablate-bands", "Train and evaluate variants with different diffused band counts");
  add_common_flags(abands);
  add_model_flags(abands);
  add_train_flags(abands);
  add_plan_flags(abands);
  abands.flag("--n-list", "n_list", "comma-separated band counts");

  Command aecs(app, "ablate-ecs", "Sweep ECS stride and evaluation count on a fixed model");
  add_common_flags(aecs);
  add_checkpoint_flags(aecs);
  aecs.flag("--manifest", "manifest", "manifest CSV")
      .flag("--split", "eval_split", "split to evaluate")
      .flag("--stride-list", "stride_list", "comma-separated strides")
      .flag("--evals-list", "evals_list", "comma-separated evaluation counts")
      .flag("--repeats", "repeats", "timing repeats per grid point");

  Command alevels(app, "ablate-levels", "Train and evaluate variants with 1 to 3 wavelet levels");
  add_common_flags(alevels);
  add_model_flags(alevels);
  add_train_flags(alevels);
  add_plan_flags(alevels);
  alevels.flag("--levels-list", "levels_list", "comma-separated level counts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (dwt.app()->parsed()) return cmd_dwt(dwt.resolve(), input);
    if (idwt.app()->parsed()) return cmd_idwt(idwt.resolve(), input);
    if (synth.app()->parsed()) return cmd_synth(synth.resolve());
    if (thfrm.app()->parsed()) return cmd_train_hfrm(thfrm.resolve());
    if (tdiff.app()->parsed()) return cmd_train_diffusion(tdiff.resolve());
    if (restore.app()->parsed()) return cmd_restore(restore.resolve(), input, truth, trace);
    if (eval.app()->parsed()) return cmd_eval(eval.resolve());
    if (abands.app()->parsed()) return cmd_ablate_bands(abands.resolve());
    if (aecs.app()->parsed()) return cmd_ablate_ecs(aecs.resolve());
    if (alevels.app()->parsed()) return cmd_ablate_levels(alevels.resolve());
  } catch (const UsageError& e) {
    std::fprintf(stderr, "wavedm: usage error: %s\n", e.what());
    return kUsage;
  } catch (const ApiError& e) {
    std::fprintf(stderr, "wavedm: %s error: %s\n", wdm_status_name(e.status), e.what());
    return exit_code(e.status);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "wavedm: error: %s\n", e.what());
    return kNumeric;
  }
  return kUsage;
}
