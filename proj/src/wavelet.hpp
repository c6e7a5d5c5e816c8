#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace wavedm {

// H x W x C raster stored channel-planar: data[(c * height + y) * width + x].
struct ImageGrid {
  int height = 0;
  int width = 0;
  int channels = 0;
  double lo = 0.0;
  double hi = 1.0;
  std::vector<double> data;

  ImageGrid() = default;
  ImageGrid(int h, int w, int c, double lo_ = 0.0, double hi_ = 1.0);

  std::size_t plane_size() const { return static_cast<std::size_t>(height) * width; }
  double& at(int c, int y, int x) { return data[(static_cast<std::size_t>(c) * height + y) * width + x]; }
  double at(int c, int y, int x) const { return data[(static_cast<std::size_t>(c) * height + y) * width + x]; }
  std::span<double> plane(int c) { return {data.data() + c * plane_size(), plane_size()}; }
  std::span<const double> plane(int c) const { return {data.data() + c * plane_size(), plane_size()}; }
};

// A stack of equally sized 2D planes; the array type shared by the wavelet,
// diffusion and sampling code. data[(b * height + y) * width + x].
struct BandStack {
  int bands = 0;
  int height = 0;
  int width = 0;
  std::vector<double> data;

  BandStack() = default;
  BandStack(int b, int h, int w) : bands(b), height(h), width(w), data(static_cast<std::size_t>(b) * h * w, 0.0) {}

  std::size_t plane_size() const { return static_cast<std::size_t>(height) * width; }
  std::size_t size() const { return data.size(); }
  bool same_shape(const BandStack& o) const { return bands == o.bands && height == o.height && width == o.width; }
  std::span<double> band(int b) { return {data.data() + b * plane_size(), plane_size()}; }
  std::span<const double> band(int b) const { return {data.data() + b * plane_size(), plane_size()}; }
};

enum class Subband { LL, LH, HL, HH };

const char* subband_name(Subband s);

// Where a packed band comes from. Detail bands of shallower levels are larger
// than the deepest level; they are packed polyphase, `phase` indexing the
// (row, col) offset inside a 2^(levels - level) block in row-major order.
struct BandInfo {
  int level = 0;
  Subband subband = Subband::LL;
  int channel = 0;
  int phase = 0;

  bool operator==(const BandInfo&) const = default;
};

// Packing order: deepest level first with LL(all channels), LH(all),
// HL(all), HH(all); then each shallower level contributes LH, HL, HH groups,
// each group ordered by channel then phase.
struct BandLayout {
  int levels = 0;
  int source_channels = 0;
  std::vector<BandInfo> ordering;

  static BandLayout make(int levels, int source_channels);
  int band_count() const { return static_cast<int>(ordering.size()); }
  bool operator==(const BandLayout&) const = default;
};

struct WaveletSpectrum {
  BandLayout layout;
  BandStack bands;
  double scale_applied = 1.0;

  int bands_height() const { return bands.height; }
  int bands_width() const { return bands.width; }
  int band_count() const { return bands.bands; }
};

struct SpectrumSplit {
  BandLayout layout;
  double scale_applied = 1.0;
  int n_low = 0;
  BandStack low;
  BandStack high;
};

// Orthonormal Haar analysis, recursing on the LL block.
WaveletSpectrum dwt2(const ImageGrid& image, int levels);
ImageGrid idwt2(const WaveletSpectrum& spectrum);

SpectrumSplit split_spectrum(const WaveletSpectrum& spectrum, int n_low);
WaveletSpectrum merge_spectrum(const SpectrumSplit& split);

WaveletSpectrum apply_scale(const WaveletSpectrum& spectrum, double gamma);

double energy(std::span<const double> values);

// Concatenate stacks along the band axis. All inputs need equal plane shapes;
// empty stacks (zero bands) are skipped.
BandStack concat_bands(std::span<const BandStack* const> parts);
BandStack slice_bands(const BandStack& s, int first, int count);

}  // namespace wavedm
