#pragma once

#include <string>

#include "sampler.hpp"
#include "models.hpp"
#include "wavelet.hpp"

namespace wavedm {

// Text header ("WAVEDM-SPECTRUM 1", levels, channels, scale, shape) followed by
// little-endian float64 coefficients.
void save_spectrum(const WaveletSpectrum& s, const std::string& path);
WaveletSpectrum load_spectrum(const std::string& path);

// One grayscale PNG per band, each stretched to its own min/max, named
// band_000_L2_LL_c0_p0.png and so on.
void save_band_images(const WaveletSpectrum& s, const std::string& dir);

// trace.csv (step, t, mean_abs) plus, when snapshots were kept, one PNG per step
// built from the low-band state and the fixed high bands.
void save_trace(const SamplerTrace& trace, const BandStack& high, const SpectrumConfig& spec, const std::string& dir);

}  // namespace wavedm
