#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wavelet.hpp"

namespace wavedm {

// 8-bit PNG (gray, gray+alpha, RGB or RGBA; alpha dropped) -> [0, 1] image.
ImageGrid load_png(const std::string& path);
// Values are clamped to [lo, hi] and quantized to 8 bits.
void save_png(const ImageGrid& image, const std::string& path);

ImageGrid from_u8(const std::vector<std::uint8_t>& interleaved, int height, int width, int channels);
std::vector<std::uint8_t> to_u8(const ImageGrid& image);

// [lo, hi] -> [-1, 1] and back.
ImageGrid normalize(const ImageGrid& image);
ImageGrid denormalize(const ImageGrid& image, double lo = 0.0, double hi = 1.0);

// Reflect-pads bottom/right so both dims become multiples of `multiple`.
ImageGrid pad_reflect(const ImageGrid& image, int multiple);
ImageGrid crop(const ImageGrid& image, int height, int width);

ImageGrid clamp(const ImageGrid& image);

}  // namespace wavedm
