#include "wavelet.hpp"

#include <array>
#include <cmath>
#include <string>

#include "errors.hpp"

namespace wavedm {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

struct Plane {
  int h = 0;
  int w = 0;
  std::vector<double> v;

  Plane() = default;
  Plane(int h_, int w_) : h(h_), w(w_), v(static_cast<std::size_t>(h_) * w_, 0.0) {}
  double& operator()(int y, int x) { return v[static_cast<std::size_t>(y) * w + x]; }
  double operator()(int y, int x) const { return v[static_cast<std::size_t>(y) * w + x]; }
};

// Details of one level, indexed LH=0, HL=1, HH=2.
using Details = std::array<Plane, 3>;

int detail_index(Subband s) { return static_cast<int>(s) - 1; }

// One level of separable Haar: rows first (horizontal pairs), then columns.
void haar_forward(const Plane& in, Plane& ll, Details& d) {
  const int h = in.h / 2;
  const int w = in.w / 2;
  ll = Plane(h, w);
  for (auto& p : d) p = Plane(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double a = in(2 * y, 2 * x);
      const double b = in(2 * y, 2 * x + 1);
      const double c = in(2 * y + 1, 2 * x);
      const double e = in(2 * y + 1, 2 * x + 1);
      // row pass
      const double lo0 = (a + b) * kInvSqrt2;
      const double hi0 = (a - b) * kInvSqrt2;
      const double lo1 = (c + e) * kInvSqrt2;
      const double hi1 = (c - e) * kInvSqrt2;
      // column pass
      ll(y, x) = (lo0 + lo1) * kInvSqrt2;
      d[0](y, x) = (hi0 + hi1) * kInvSqrt2;  // LH: high along rows
      d[1](y, x) = (lo0 - lo1) * kInvSqrt2;  // HL: high along columns
      d[2](y, x) = (hi0 - hi1) * kInvSqrt2;
    }
  }
}

Plane haar_inverse(const Plane& ll, const Details& d) {
  Plane out(ll.h * 2, ll.w * 2);
  for (int y = 0; y < ll.h; ++y) {
    for (int x = 0; x < ll.w; ++x) {
      const double lo0 = (ll(y, x) + d[1](y, x)) * kInvSqrt2;
      const double lo1 = (ll(y, x) - d[1](y, x)) * kInvSqrt2;
      const double hi0 = (d[0](y, x) + d[2](y, x)) * kInvSqrt2;
      const double hi1 = (d[0](y, x) - d[2](y, x)) * kInvSqrt2;
      out(2 * y, 2 * x) = (lo0 + hi0) * kInvSqrt2;
      out(2 * y, 2 * x + 1) = (lo0 - hi0) * kInvSqrt2;
      out(2 * y + 1, 2 * x) = (lo1 + hi1) * kInvSqrt2;
      out(2 * y + 1, 2 * x + 1) = (lo1 - hi1) * kInvSqrt2;
    }
  }
  return out;
}

}  // namespace

ImageGrid::ImageGrid(int h, int w, int c, double lo_, double hi_)
    : height(h), width(w), channels(c), lo(lo_), hi(hi_),
      data(static_cast<std::size_t>(h) * w * c, 0.0) {}

const char* subband_name(Subband s) {
  switch (s) {
    case Subband::LL: return "LL";
    case Subband::LH: return "LH";
    case Subband::HL: return "HL";
    case Subband::HH: return "HH";
  }
  return "?";
}

BandLayout BandLayout::make(int levels, int source_channels) {
  require(levels >= 1, Errc::invalid_argument, "wavelet levels must be >= 1, got " + std::to_string(levels));
  require(source_channels >= 1, Errc::invalid_argument, "source channel count must be >= 1");
  BandLayout layout;
  layout.levels = levels;
  layout.source_channels = source_channels;
  for (int c = 0; c < source_channels; ++c) layout.ordering.push_back({levels, Subband::LL, c, 0});
  for (int level = levels; level >= 1; --level) {
    const int stride = 1 << (levels - level);
    for (Subband s : {Subband::LH, Subband::HL, Subband::HH}) {
      for (int c = 0; c < source_channels; ++c) {
        for (int p = 0; p < stride * stride; ++p) layout.ordering.push_back({level, s, c, p});
      }
    }
  }
  return layout;
}

WaveletSpectrum dwt2(const ImageGrid& image, int levels) {
  require(levels >= 1, Errc::invalid_argument, "wavelet levels must be >= 1, got " + std::to_string(levels));
  require(image.channels >= 1, Errc::invalid_argument, "image has no channels");
  require(image.data.size() == image.plane_size() * image.channels, Errc::shape_mismatch,
          "image data length does not match height*width*channels");
  const int block = 1 << levels;
  if (image.height % block != 0 || image.height == 0) {
    fail(Errc::invalid_argument, "image height " + std::to_string(image.height) + " is not divisible by 2^" +
                                     std::to_string(levels) + " = " + std::to_string(block));
  }
  if (image.width % block != 0 || image.width == 0) {
    fail(Errc::invalid_argument, "image width " + std::to_string(image.width) + " is not divisible by 2^" +
                                     std::to_string(levels) + " = " + std::to_string(block));
  }

  WaveletSpectrum out;
  out.layout = BandLayout::make(levels, image.channels);
  const int bh = image.height / block;
  const int bw = image.width / block;
  out.bands = BandStack(out.layout.band_count(), bh, bw);

  std::vector<Plane> deepest_ll(image.channels);
  // details[c][level - 1]
  std::vector<std::vector<Details>> details(image.channels, std::vector<Details>(levels));
  for (int c = 0; c < image.channels; ++c) {
    Plane cur(image.height, image.width);
    auto src = image.plane(c);
    std::copy(src.begin(), src.end(), cur.v.begin());
    for (int level = 1; level <= levels; ++level) {
      Plane ll;
      haar_forward(cur, ll, details[c][level - 1]);
      cur = std::move(ll);
    }
    deepest_ll[c] = std::move(cur);
  }

  for (int b = 0; b < out.layout.band_count(); ++b) {
    const BandInfo& info = out.layout.ordering[b];
    auto dst = out.bands.band(b);
    const Plane& src = info.subband == Subband::LL ? deepest_ll[info.channel]
                                                   : details[info.channel][info.level - 1][detail_index(info.subband)];
    const int stride = 1 << (levels - info.level);
    const int py = info.phase / stride;
    const int px = info.phase % stride;
    for (int y = 0; y < bh; ++y) {
      for (int x = 0; x < bw; ++x) dst[static_cast<std::size_t>(y) * bw + x] = src(y * stride + py, x * stride + px);
    }
  }
  return out;
}

ImageGrid idwt2(const WaveletSpectrum& spectrum) {
  const BandLayout& layout = spectrum.layout;
  require(layout.levels >= 1 && layout.source_channels >= 1, Errc::invalid_argument, "invalid band layout");
  require(layout == BandLayout::make(layout.levels, layout.source_channels), Errc::invalid_argument,
          "band layout is not the canonical packing");
  require(spectrum.bands.bands == layout.band_count(), Errc::shape_mismatch,
          "spectrum has " + std::to_string(spectrum.bands.bands) + " bands but layout expects " +
              std::to_string(layout.band_count()));
  require(spectrum.bands.data.size() == spectrum.bands.plane_size() * spectrum.bands.bands, Errc::shape_mismatch,
          "spectrum data length does not match its shape");
  require(spectrum.scale_applied != 0.0, Errc::invalid_argument, "spectrum scale is zero");

  const int levels = layout.levels;
  const int channels = layout.source_channels;
  const int bh = spectrum.bands.height;
  const int bw = spectrum.bands.width;
  const double unscale = 1.0 / spectrum.scale_applied;

  std::vector<Plane> ll(channels, Plane(bh, bw));
  std::vector<std::vector<Details>> details(channels, std::vector<Details>(levels));
  for (int c = 0; c < channels; ++c) {
    for (int level = 1; level <= levels; ++level) {
      const int size_h = bh << (levels - level);
      const int size_w = bw << (levels - level);
      for (auto& p : details[c][level - 1]) p = Plane(size_h, size_w);
    }
  }
  for (int b = 0; b < layout.band_count(); ++b) {
    const BandInfo& info = layout.ordering[b];
    auto src = spectrum.bands.band(b);
    Plane& dst = info.subband == Subband::LL ? ll[info.channel]
                                             : details[info.channel][info.level - 1][detail_index(info.subband)];
    const int stride = 1 << (levels - info.level);
    const int py = info.phase / stride;
    const int px = info.phase % stride;
    for (int y = 0; y < bh; ++y) {
      for (int x = 0; x < bw; ++x) dst(y * stride + py, x * stride + px) = src[static_cast<std::size_t>(y) * bw + x] * unscale;
    }
  }

  ImageGrid out(bh << levels, bw << levels, channels);
  for (int c = 0; c < channels; ++c) {
    Plane cur = std::move(ll[c]);
    for (int level = levels; level >= 1; --level) cur = haar_inverse(cur, details[c][level - 1]);
    auto dst = out.plane(c);
    std::copy(cur.v.begin(), cur.v.end(), dst.begin());
  }
  return out;
}

SpectrumSplit split_spectrum(const WaveletSpectrum& spectrum, int n_low) {
  const int total = spectrum.bands.bands;
  require(n_low >= 1 && n_low <= total, Errc::invalid_argument,
          "n_low must be in [1, " + std::to_string(total) + "], got " + std::to_string(n_low));
  SpectrumSplit split;
  split.layout = spectrum.layout;
  split.scale_applied = spectrum.scale_applied;
  split.n_low = n_low;
  split.low = slice_bands(spectrum.bands, 0, n_low);
  split.high = slice_bands(spectrum.bands, n_low, total - n_low);
  return split;
}

WaveletSpectrum merge_spectrum(const SpectrumSplit& split) {
  const int total = split.layout.band_count();
  require(split.low.bands == split.n_low, Errc::shape_mismatch,
          "low part has " + std::to_string(split.low.bands) + " bands, expected " + std::to_string(split.n_low));
  require(split.low.bands + split.high.bands == total, Errc::shape_mismatch,
          "low + high bands = " + std::to_string(split.low.bands + split.high.bands) + ", layout expects " +
              std::to_string(total));
  if (split.high.bands > 0) {
    require(split.low.height == split.high.height && split.low.width == split.high.width, Errc::shape_mismatch,
            "low and high band planes differ in size");
  }
  WaveletSpectrum out;
  out.layout = split.layout;
  out.scale_applied = split.scale_applied;
  const BandStack* parts[] = {&split.low, &split.high};
  out.bands = concat_bands(parts);
  return out;
}

WaveletSpectrum apply_scale(const WaveletSpectrum& spectrum, double gamma) {
  require(gamma != 0.0 && std::isfinite(gamma), Errc::invalid_argument, "scale factor must be finite and non-zero");
  WaveletSpectrum out = spectrum;
  for (double& v : out.bands.data) v *= gamma;
  out.scale_applied *= gamma;
  return out;
}

double energy(std::span<const double> values) {
  double e = 0.0;
  for (double v : values) e += v * v;
  return e;
}

BandStack concat_bands(std::span<const BandStack* const> parts) {
  int bands = 0;
  int h = -1;
  int w = -1;
  for (const BandStack* p : parts) {
    if (p->bands == 0) continue;
    if (h < 0) {
      h = p->height;
      w = p->width;
    }
    require(p->height == h && p->width == w, Errc::shape_mismatch, "cannot concatenate bands of different plane sizes");
    bands += p->bands;
  }
  if (h < 0) return {};
  BandStack out;
  out.bands = bands;
  out.height = h;
  out.width = w;
  out.data.reserve(static_cast<std::size_t>(bands) * h * w);
  for (const BandStack* p : parts) out.data.insert(out.data.end(), p->data.begin(), p->data.end());
  return out;
}

BandStack slice_bands(const BandStack& s, int first, int count) {
  require(first >= 0 && count >= 0 && first + count <= s.bands, Errc::invalid_argument, "band slice out of range");
  BandStack out(count, s.height, s.width);
  const auto begin = s.data.begin() + static_cast<std::ptrdiff_t>(first * s.plane_size());
  std::copy(begin, begin + static_cast<std::ptrdiff_t>(count * s.plane_size()), out.data.begin());
  return out;
}

}  // namespace wavedm
