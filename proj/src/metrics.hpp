#pragma once

#include "wavelet.hpp"

namespace wavedm {

inline constexpr double kPsnrCap = 100.0;

// 10 log10(peak^2 / MSE), capped at kPsnrCap.
double psnr(const ImageGrid& a, const ImageGrid& b, double peak = 1.0);

// Gaussian-window SSIM (11x11, sigma 1.5, K1 = 0.01, K2 = 0.03) over the
// fully-contained windows of each channel, averaged over channels.
double ssim(const ImageGrid& a, const ImageGrid& b, double data_range = 1.0);

}  // namespace wavedm
