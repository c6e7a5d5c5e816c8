#include "spectrum_io.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "checkpoint.hpp"
#include "errors.hpp"
#include "image.hpp"
#include "pipeline.hpp"

namespace wavedm {

namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little, "spectrum files are written little-endian");

void save_spectrum(const WaveletSpectrum& s, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), Errc::io, "cannot write '" + path + "'");
  out << "WAVEDM-SPECTRUM 1\n"
      << "levels " << s.layout.levels << "\n"
      << "channels " << s.layout.source_channels << "\n"
      << "scale " << format_double(s.scale_applied) << "\n"
      << "shape " << s.bands.bands << "," << s.bands.height << "," << s.bands.width << "\n"
      << "data\n";
  out.write(reinterpret_cast<const char*>(s.bands.data.data()),
            static_cast<std::streamsize>(s.bands.data.size() * sizeof(double)));
  require(static_cast<bool>(out), Errc::io, "failed writing '" + path + "'");
}

WaveletSpectrum load_spectrum(const std::string& path) {
  if (!fs::exists(path)) fail(Errc::not_found, "spectrum file '" + path + "' does not exist");
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), Errc::io, "cannot read '" + path + "'");
  std::string magic, line;
  std::getline(in, magic);
  require(magic == "WAVEDM-SPECTRUM 1", Errc::format, "'" + path + "' is not a version 1 spectrum file");
  int levels = 0, channels = 0, bands = 0, h = 0, w = 0;
  double scale = 0.0;
  bool data = false;
  while (!data && std::getline(in, line)) {
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key == "levels") {
      ss >> levels;
    } else if (key == "channels") {
      ss >> channels;
    } else if (key == "scale") {
      ss >> scale;
    } else if (key == "shape") {
      char c1 = 0, c2 = 0;
      ss >> bands >> c1 >> h >> c2 >> w;
    } else if (key == "data") {
      data = true;
    } else {
      fail(Errc::format, "unknown spectrum header line '" + line + "'");
    }
  }
  require(data && levels >= 1 && channels >= 1 && h >= 1 && w >= 1, Errc::format, "corrupt spectrum header");
  WaveletSpectrum s;
  s.layout = BandLayout::make(levels, channels);
  require(bands == s.layout.band_count(), Errc::format, "spectrum band count does not match its layout");
  s.scale_applied = scale;
  s.bands = BandStack(bands, h, w);
  in.read(reinterpret_cast<char*>(s.bands.data.data()), static_cast<std::streamsize>(s.bands.data.size() * sizeof(double)));
  require(in.gcount() == static_cast<std::streamsize>(s.bands.data.size() * sizeof(double)), Errc::format,
          "spectrum file '" + path + "' is truncated");
  return s;
}

void save_band_images(const WaveletSpectrum& s, const std::string& dir) {
  fs::create_directories(dir);
  for (int b = 0; b < s.band_count(); ++b) {
    const auto band = s.bands.band(b);
    const auto [lo, hi] = std::minmax_element(band.begin(), band.end());
    const double range = *hi - *lo;
    ImageGrid img(s.bands.height, s.bands.width, 1);
    for (std::size_t i = 0; i < band.size(); ++i) img.data[i] = range > 0.0 ? (band[i] - *lo) / range : 0.5;
    const BandInfo& info = s.layout.ordering[b];
    char name[96];
    std::snprintf(name, sizeof name, "band_%03d_L%d_%s_c%d_p%d.png", b, info.level, subband_name(info.subband),
                  info.channel, info.phase);
    save_png(img, (fs::path(dir) / name).string());
  }
}

void save_trace(const SamplerTrace& trace, const BandStack& high, const SpectrumConfig& spec, const std::string& dir) {
  fs::create_directories(dir);
  std::ofstream csv(fs::path(dir) / "trace.csv");
  require(static_cast<bool>(csv), Errc::io, "cannot write trace into '" + dir + "'");
  csv << "step,t,mean_abs\n";
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto& step = trace.steps[i];
    char row[96];
    std::snprintf(row, sizeof row, "%zu,%d,%.9g\n", i, step.t, step.mean_abs);
    csv << row;
    if (step.snapshot) {
      char name[48];
      std::snprintf(name, sizeof name, "step_%03zu_t%04d.png", i, step.t);
      save_png(spectrum_to_image(*step.snapshot, high, spec), (fs::path(dir) / name).string());
    }
  }
}

}  // namespace wavedm
