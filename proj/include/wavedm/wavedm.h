/* Wavelet-domain conditional diffusion for image restoration: C interface.
 *
 * Every fallible call returns a wdm_status. On failure, wdm_last_error()
 * describes the problem; the message is per-thread and valid until the next
 * call on that thread. Objects are opaque and released with their _free
 * function; passing NULL to a _free function is allowed.
 */
#ifndef WAVEDM_WAVEDM_H
#define WAVEDM_WAVEDM_H

#include <stddef.h>
#include <stdint.h>

#if defined(WAVEDM_BUILDING)
#define WDM_API __attribute__((visibility("default")))
#else
#define WDM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum wdm_status {
  WDM_OK = 0,
  WDM_ERR_INVALID_ARGUMENT = 1,
  WDM_ERR_SHAPE = 2,
  WDM_ERR_NOT_FOUND = 3,
  WDM_ERR_IO = 4,
  WDM_ERR_FORMAT = 5,
  WDM_ERR_NUMERIC = 6,
  WDM_ERR_INTERNAL = 7
} wdm_status;

typedef enum wdm_mode { WDM_MODE_DDPM = 0, WDM_MODE_DDIM = 1, WDM_MODE_ECS = 2 } wdm_mode;

typedef struct wdm_image wdm_image;
typedef struct wdm_spectrum wdm_spectrum;
typedef struct wdm_schedule wdm_schedule;
typedef struct wdm_plan wdm_plan;
typedef struct wdm_model wdm_model;

WDM_API const char* wdm_version(void);
WDM_API const char* wdm_last_error(void);
WDM_API const char* wdm_status_name(wdm_status status);

/* ---- images: H x W x C, channel-planar doubles in [0, 1] ---- */

WDM_API wdm_status wdm_image_create(int height, int width, int channels, const double* planar, wdm_image** out);
WDM_API wdm_status wdm_image_load_png(const char* path, wdm_image** out);
WDM_API wdm_status wdm_image_save_png(const wdm_image* image, const char* path);
WDM_API void wdm_image_free(wdm_image* image);
WDM_API int wdm_image_height(const wdm_image* image);
WDM_API int wdm_image_width(const wdm_image* image);
WDM_API int wdm_image_channels(const wdm_image* image);
/* data[(c * height + y) * width + x] */
WDM_API const double* wdm_image_data(const wdm_image* image);
/* Reflect-pads bottom/right to a multiple of `multiple`. */
WDM_API wdm_status wdm_image_pad(const wdm_image* image, int multiple, wdm_image** out);
WDM_API wdm_status wdm_image_crop(const wdm_image* image, int height, int width, wdm_image** out);
WDM_API wdm_status wdm_psnr(const wdm_image* a, const wdm_image* b, double* out_db);
WDM_API wdm_status wdm_ssim(const wdm_image* a, const wdm_image* b, double* out);

/* ---- Haar spectra ---- */

WDM_API wdm_status wdm_dwt2(const wdm_image* image, int levels, wdm_spectrum** out);
WDM_API wdm_status wdm_idwt2(const wdm_spectrum* spectrum, wdm_image** out);
WDM_API wdm_status wdm_spectrum_scale(const wdm_spectrum* spectrum, double gamma, wdm_spectrum** out);
WDM_API void wdm_spectrum_free(wdm_spectrum* spectrum);
WDM_API int wdm_spectrum_bands(const wdm_spectrum* spectrum);
WDM_API int wdm_spectrum_height(const wdm_spectrum* spectrum);
WDM_API int wdm_spectrum_width(const wdm_spectrum* spectrum);
WDM_API int wdm_spectrum_levels(const wdm_spectrum* spectrum);
WDM_API double wdm_spectrum_scale_applied(const wdm_spectrum* spectrum);
/* data[(band * height + y) * width + x] */
WDM_API const double* wdm_spectrum_data(const wdm_spectrum* spectrum);
/* subband: 0 LL, 1 LH, 2 HL, 3 HH. */
WDM_API wdm_status wdm_spectrum_band_info(const wdm_spectrum* spectrum, int band, int* level, int* subband,
                                          int* channel, int* phase);
WDM_API wdm_status wdm_spectrum_save(const wdm_spectrum* spectrum, const char* path);
WDM_API wdm_status wdm_spectrum_load(const char* path, wdm_spectrum** out);
WDM_API wdm_status wdm_spectrum_save_band_images(const wdm_spectrum* spectrum, const char* dir);

/* ---- schedules and sampling plans ---- */

WDM_API wdm_status wdm_schedule_linear(int steps, double beta_start, double beta_end, wdm_schedule** out);
WDM_API void wdm_schedule_free(wdm_schedule* schedule);
WDM_API wdm_status wdm_schedule_alpha_bar(const wdm_schedule* schedule, int t, double* out);
WDM_API wdm_status wdm_schedule_posterior_sigma2(const wdm_schedule* schedule, int t, double* out);

WDM_API wdm_status wdm_plan_ddim(int steps, int sub_steps, wdm_plan** out);
WDM_API wdm_status wdm_plan_ecs(int steps, int stride, int evals, wdm_plan** out);
WDM_API wdm_status wdm_plan_ddpm(int steps, wdm_plan** out);
WDM_API void wdm_plan_free(wdm_plan* plan);
WDM_API wdm_mode wdm_plan_mode(const wdm_plan* plan);
WDM_API int wdm_plan_steps(const wdm_plan* plan);
WDM_API int wdm_plan_stride(const wdm_plan* plan);
WDM_API int wdm_plan_evals(const wdm_plan* plan);
WDM_API int wdm_plan_stop(const wdm_plan* plan);
WDM_API int wdm_plan_timestamp_count(const wdm_plan* plan);
WDM_API const int* wdm_plan_timestamps(const wdm_plan* plan);

/* ---- datasets ---- */

/* Writes `count` procedural size x size RGB textures named tex0000.png ... */
WDM_API wdm_status wdm_generate_corpus(const char* dir, int count, int size, uint64_t seed);
/* `degradation` is e.g. "gaussian_noise:sigma255=25,seed=7", "box_blur:radius=1"
 * or "occlusion_drops:drops=6,drop_radius=3,opacity=0.6". Writes
 * out_dir/manifest.csv; the last `holdout` images form the test split. */
WDM_API wdm_status wdm_synthesize_pairs(const char* clean_dir, const char* degradation, const char* out_dir,
                                        int holdout);
/* Number of manifest entries in `split` ("train", "test" or "all"). */
WDM_API wdm_status wdm_manifest_count(const char* manifest, const char* split, int* out);

/* ---- training ---- */

typedef struct wdm_model_config {
  int levels;      /* wavelet levels (default 2) */
  int n_low;       /* diffused bands (default 3) */
  int channels;    /* image channels (default 3) */
  double gamma;    /* diffusion-domain scale; 0 selects 2^-levels */
  int width;       /* estimator base width (default 32) */
  int hfrm_width;  /* refinement width (default 32) */
  int hfrm_blocks; /* refinement residual blocks (default 5) */
  int steps;       /* T (default 1000) */
  double beta_start;
  double beta_end;
  int residual_v;  /* 1: epsilon built from a v-prediction of x_0 - x_d (default); 0: raw epsilon */
} wdm_model_config;

typedef struct wdm_train_config {
  int iterations;
  int batch;
  double lr;
  uint64_t seed;
  int fixed_t;       /* 0: t uniform on [1, T] */
  double ema_decay;  /* must be 0 */
  int v_weighting;   /* 1: weight each sample's epsilon error by 1 / alpha_bar_t (default) */
  const char* split; /* manifest split to train on; NULL means "train" */
} wdm_train_config;

typedef void (*wdm_progress_fn)(int iteration, double loss, void* user);

WDM_API void wdm_model_config_default(wdm_model_config* cfg);
WDM_API void wdm_train_config_default(wdm_train_config* cfg);

WDM_API wdm_status wdm_train_hfrm(const char* manifest, const wdm_model_config* model, const wdm_train_config* train,
                                  const char* out_checkpoint, wdm_progress_fn progress, void* user);
/* `hfrm_checkpoint` may be NULL only when n_low equals the total band count. */
WDM_API wdm_status wdm_train_diffusion(const char* manifest, const char* hfrm_checkpoint,
                                       const wdm_model_config* model, const wdm_train_config* train,
                                       const char* out_checkpoint, wdm_progress_fn progress, void* user);

/* ---- restoration ---- */

typedef struct wdm_model_info {
  int levels;
  int channels;
  int n_low;
  int total_bands;
  int has_hfrm;
  int hfrm_in_channels;
  int hfrm_out_channels;
  int estimator_in_channels;
  int estimator_out_channels;
  int width;
  int steps;
  int pad_multiple;
} wdm_model_info;

typedef struct wdm_restore_stats {
  int has_metrics;
  double psnr;
  double ssim;
  double wall_time;
  int eval_count;
  int refine_calls;
} wdm_restore_stats;

typedef struct wdm_eval_summary {
  int images;
  double psnr;
  double ssim;
  double psnr_degraded;
  double ssim_degraded;
  double time;
  int evals;
} wdm_eval_summary;

/* `hfrm_checkpoint` may be NULL or "" when every band is diffused. */
WDM_API wdm_status wdm_model_load(const char* hfrm_checkpoint, const char* estimator_checkpoint, wdm_model** out);
WDM_API void wdm_model_free(wdm_model* model);
WDM_API wdm_status wdm_model_get_info(const wdm_model* model, wdm_model_info* out);

/* Restores one image (any size; padded internally). `truth` may be NULL.
 * `trace_dir`, when non-NULL, receives trace.csv and per-step PNGs. */
WDM_API wdm_status wdm_restore(const wdm_model* model, const wdm_image* degraded, const wdm_plan* plan, uint64_t seed,
                               const wdm_image* truth, const char* trace_dir, wdm_image** out,
                               wdm_restore_stats* stats);

/* Restores every pair of `split` and writes a CSV with header
 * id,psnr,ssim,psnr_degraded,ssim_degraded,time_s,evals and a final "mean" row.
 * `csv_path` may be NULL. */
WDM_API wdm_status wdm_evaluate(const wdm_model* model, const char* manifest, const char* split, const wdm_plan* plan,
                                uint64_t seed, const char* csv_path, wdm_eval_summary* out);

/* Mean L1 between refined and clean high bands over `split`, and the same for
 * the degraded high bands copied through unchanged. */
WDM_API wdm_status wdm_hfrm_l1(const wdm_model* model, const char* manifest, const char* split, double* refined_l1,
                               double* copy_l1);

#ifdef __cplusplus
}
#endif

#endif /* WAVEDM_WAVEDM_H */
