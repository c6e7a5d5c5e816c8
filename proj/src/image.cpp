#include "image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>

#include "errors.hpp"

namespace wavedm {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

int reflect(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

}  // namespace

ImageGrid from_u8(const std::vector<std::uint8_t>& interleaved, int height, int width, int channels) {
  require(interleaved.size() == static_cast<std::size_t>(height) * width * channels, Errc::shape_mismatch,
          "pixel buffer size does not match dimensions");
  ImageGrid img(height, width, channels, 0.0, 1.0);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < channels; ++c) {
        img.at(c, y, x) = interleaved[(static_cast<std::size_t>(y) * width + x) * channels + c] / 255.0;
      }
    }
  }
  return img;
}

std::vector<std::uint8_t> to_u8(const ImageGrid& image) {
  std::vector<std::uint8_t> out(image.data.size());
  const double range = image.hi - image.lo;
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      for (int c = 0; c < image.channels; ++c) {
        const double v = std::clamp((image.at(c, y, x) - image.lo) / range, 0.0, 1.0);
        out[(static_cast<std::size_t>(y) * image.width + x) * image.channels + c] =
            static_cast<std::uint8_t>(std::lround(v * 255.0));
      }
    }
  }
  return out;
}

ImageGrid load_png(const std::string& path) {
  if (!std::filesystem::exists(path)) fail(Errc::not_found, "image '" + path + "' does not exist");
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) fail(Errc::io, "cannot open image '" + path + "'");
  png_byte sig[8];
  if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    fail(Errc::io, "'" + path + "' is not a PNG file");
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(Errc::io, "libpng initialisation failed");
  }
  std::vector<std::uint8_t> pixels;
  int width = 0;
  int height = 0;
  int channels = 0;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(Errc::io, "failed to decode PNG '" + path + "'");
  }
  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_read_update_info(png, info);
  width = static_cast<int>(png_get_image_width(png, info));
  height = static_cast<int>(png_get_image_height(png, info));
  channels = png_get_channels(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  pixels.resize(rowbytes * height);
  std::vector<png_bytep> rows(height);
  for (int y = 0; y < height; ++y) rows[y] = pixels.data() + y * rowbytes;
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);

  const int keep = (channels == 2 || channels == 4) ? channels - 1 : channels;
  std::vector<std::uint8_t> packed(static_cast<std::size_t>(width) * height * keep);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < keep; ++c) {
        packed[(static_cast<std::size_t>(y) * width + x) * keep + c] = rows[y][x * channels + c];
      }
    }
  }
  return from_u8(packed, height, width, keep);
}

void save_png(const ImageGrid& image, const std::string& path) {
  require(image.channels == 1 || image.channels == 3, Errc::invalid_argument, "PNG output needs 1 or 3 channels");
  const std::vector<std::uint8_t> pixels = to_u8(image);
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) fail(Errc::io, "cannot open '" + path + "' for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    fail(Errc::io, "libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(Errc::io, "failed to encode PNG '" + path + "'");
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width), static_cast<png_uint_32>(image.height), 8,
               image.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride = static_cast<std::size_t>(image.width) * image.channels;
  for (int y = 0; y < image.height; ++y) {
    png_write_row(png, const_cast<png_bytep>(pixels.data() + y * stride));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

ImageGrid normalize(const ImageGrid& image) {
  require(image.hi > image.lo, Errc::invalid_argument, "image range is empty");
  ImageGrid out = image;
  out.lo = -1.0;
  out.hi = 1.0;
  const double scale = 2.0 / (image.hi - image.lo);
  for (double& v : out.data) v = (v - image.lo) * scale - 1.0;
  return out;
}

ImageGrid denormalize(const ImageGrid& image, double lo, double hi) {
  ImageGrid out = image;
  out.lo = lo;
  out.hi = hi;
  const double scale = (hi - lo) / 2.0;
  for (double& v : out.data) v = (v + 1.0) * scale + lo;
  return out;
}

ImageGrid pad_reflect(const ImageGrid& image, int multiple) {
  require(multiple >= 1, Errc::invalid_argument, "padding multiple must be >= 1");
  const int h = (image.height + multiple - 1) / multiple * multiple;
  const int w = (image.width + multiple - 1) / multiple * multiple;
  ImageGrid out(h, w, image.channels, image.lo, image.hi);
  for (int c = 0; c < image.channels; ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) out.at(c, y, x) = image.at(c, reflect(y, image.height), reflect(x, image.width));
    }
  }
  return out;
}

ImageGrid crop(const ImageGrid& image, int height, int width) {
  require(height <= image.height && width <= image.width, Errc::invalid_argument, "crop larger than image");
  ImageGrid out(height, width, image.channels, image.lo, image.hi);
  for (int c = 0; c < image.channels; ++c) {
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) out.at(c, y, x) = image.at(c, y, x);
    }
  }
  return out;
}

ImageGrid clamp(const ImageGrid& image) {
  ImageGrid out = image;
  for (double& v : out.data) v = std::clamp(v, image.lo, image.hi);
  return out;
}

}  // namespace wavedm
