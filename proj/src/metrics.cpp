#include "metrics.hpp"

#include <array>
#include <cmath>

#include "errors.hpp"

namespace wavedm {

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;

void check_pair(const ImageGrid& a, const ImageGrid& b) {
  require(a.height == b.height && a.width == b.width && a.channels == b.channels, Errc::shape_mismatch,
          "metric operands differ in size: " + std::to_string(a.height) + "x" + std::to_string(a.width) + "x" +
              std::to_string(a.channels) + " vs " + std::to_string(b.height) + "x" + std::to_string(b.width) + "x" +
              std::to_string(b.channels));
}

std::array<double, kWindow> gaussian_taps() {
  std::array<double, kWindow> taps{};
  double sum = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - kWindow / 2;
    taps[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
    sum += taps[i];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

// Separable valid-mode filtering of an h x w plane.
std::vector<double> filter_valid(std::span<const double> src, int h, int w, const std::array<double, kWindow>& taps) {
  const int oh = h - kWindow + 1;
  const int ow = w - kWindow + 1;
  std::vector<double> rows(static_cast<std::size_t>(h) * ow, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += taps[k] * src[static_cast<std::size_t>(y) * w + x + k];
      rows[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(oh) * ow, 0.0);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += taps[k] * rows[static_cast<std::size_t>(y + k) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  }
  return out;
}

}  // namespace

double psnr(const ImageGrid& a, const ImageGrid& b, double peak) {
  check_pair(a, b);
  require(peak > 0.0, Errc::invalid_argument, "PSNR peak must be positive");
  double mse = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    mse += d * d;
  }
  mse /= static_cast<double>(a.data.size());
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / mse));
}

double ssim(const ImageGrid& a, const ImageGrid& b, double data_range) {
  check_pair(a, b);
  require(a.height >= kWindow && a.width >= kWindow, Errc::invalid_argument,
          "SSIM needs images of at least 11x11, got " + std::to_string(a.height) + "x" + std::to_string(a.width));
  const double c1 = (0.01 * data_range) * (0.01 * data_range);
  const double c2 = (0.03 * data_range) * (0.03 * data_range);
  const auto taps = gaussian_taps();
  const std::size_t n = a.plane_size();
  double total = 0.0;
  for (int c = 0; c < a.channels; ++c) {
    auto pa = a.plane(c);
    auto pb = b.plane(c);
    std::vector<double> aa(n), bb(n), ab(n);
    for (std::size_t i = 0; i < n; ++i) {
      aa[i] = pa[i] * pa[i];
      bb[i] = pb[i] * pb[i];
      ab[i] = pa[i] * pb[i];
    }
    const auto mu_a = filter_valid(pa, a.height, a.width, taps);
    const auto mu_b = filter_valid(pb, a.height, a.width, taps);
    const auto e_aa = filter_valid(aa, a.height, a.width, taps);
    const auto e_bb = filter_valid(bb, a.height, a.width, taps);
    const auto e_ab = filter_valid(ab, a.height, a.width, taps);
    double acc = 0.0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
      const double va = e_aa[i] - mu_a[i] * mu_a[i];
      const double vb = e_bb[i] - mu_b[i] * mu_b[i];
      const double cov = e_ab[i] - mu_a[i] * mu_b[i];
      acc += ((2.0 * mu_a[i] * mu_b[i] + c1) * (2.0 * cov + c2)) /
             ((mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (va + vb + c2));
    }
    total += acc / static_cast<double>(mu_a.size());
  }
  return total / a.channels;
}

}  // namespace wavedm
