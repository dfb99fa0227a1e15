#include "plidar/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <memory>

#include "plidar/error.hpp"

namespace plidar::png {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode, ErrorCode code) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw Error(code, "cannot open " + path.string());
  return f;
}

void write_png(const std::filesystem::path& path, int width, int height, int color_type,
               int bit_depth, const std::vector<const png_byte*>& rows) {
  auto f = open_file(path, "wb", ErrorCode::kIoFailure);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::kIoFailure, "libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::kIoFailure, "png encode failed: " + path.string());
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, width, height, bit_depth, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (bit_depth == 16 && std::endian::native == std::endian::little) png_set_swap(png);
  png_write_image(png, const_cast<png_bytepp>(rows.data()));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

RawImage read(const std::filesystem::path& path) {
  auto f = open_file(path, "rb", ErrorCode::kMissingFile);
  png_byte sig[8];
  if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw Error(ErrorCode::kIoFailure, "not a PNG file: " + path.string());
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::kIoFailure, "libpng init failed");
  }

  RawImage out;
  std::vector<png_byte> buffer;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::kIoFailure, "png decode failed: " + path.string());
  }
  png_init_io(png, f.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const int color_type = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (depth == 16 && std::endian::native == std::endian::little) png_set_swap(png);
  png_read_update_info(png, info);

  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.channels = png_get_channels(png, info);
  out.bit_depth = png_get_bit_depth(png, info);

  const std::size_t rowbytes = png_get_rowbytes(png, info);
  buffer.resize(rowbytes * out.height);
  std::vector<png_bytep> rows(out.height);
  for (int y = 0; y < out.height; ++y) rows[y] = buffer.data() + rowbytes * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const std::size_t n = static_cast<std::size_t>(out.width) * out.height * out.channels;
  out.samples.resize(n);
  if (out.bit_depth == 16) {
    for (int y = 0; y < out.height; ++y) {
      const auto* src = reinterpret_cast<const std::uint16_t*>(rows[y]);
      std::copy(src, src + static_cast<std::size_t>(out.width) * out.channels,
                out.samples.begin() + static_cast<std::size_t>(y) * out.width * out.channels);
    }
  } else {
    for (int y = 0; y < out.height; ++y) {
      const png_byte* src = rows[y];
      std::copy(src, src + static_cast<std::size_t>(out.width) * out.channels,
                out.samples.begin() + static_cast<std::size_t>(y) * out.width * out.channels);
    }
  }
  return out;
}

std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const double y = 0.299 * r + 0.587 * g + 0.114 * b;
  return static_cast<std::uint8_t>(std::lround(std::min(255.0, y)));
}

GrayImage read_gray(const std::filesystem::path& path) {
  RawImage raw = read(path);
  const int shift = raw.bit_depth == 16 ? 8 : 0;
  GrayImage img(raw.width, raw.height);
  const std::size_t n = img.pixels.size();
  if (raw.channels == 1 || raw.channels == 2) {
    for (std::size_t i = 0; i < n; ++i) {
      img.pixels[i] = static_cast<std::uint8_t>(raw.samples[i * raw.channels] >> shift);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const auto* px = &raw.samples[i * raw.channels];
      img.pixels[i] = luma(static_cast<std::uint8_t>(px[0] >> shift),
                           static_cast<std::uint8_t>(px[1] >> shift),
                           static_cast<std::uint8_t>(px[2] >> shift));
    }
  }
  return img;
}

void write_gray8(const std::filesystem::path& path, const GrayImage& img) {
  std::vector<const png_byte*> rows(img.height);
  for (int y = 0; y < img.height; ++y) {
    rows[y] = img.pixels.data() + static_cast<std::size_t>(y) * img.width;
  }
  write_png(path, img.width, img.height, PNG_COLOR_TYPE_GRAY, 8, rows);
}

void write_rgb8(const std::filesystem::path& path, int width, int height,
                const std::vector<std::uint8_t>& rgb) {
  if (rgb.size() != static_cast<std::size_t>(width) * height * 3) {
    throw Error(ErrorCode::kSizeMismatch, "rgb buffer size");
  }
  std::vector<const png_byte*> rows(height);
  for (int y = 0; y < height; ++y) rows[y] = rgb.data() + static_cast<std::size_t>(y) * width * 3;
  write_png(path, width, height, PNG_COLOR_TYPE_RGB, 8, rows);
}

void write_gray16(const std::filesystem::path& path, int width, int height,
                  const std::vector<std::uint16_t>& values) {
  if (values.size() != static_cast<std::size_t>(width) * height) {
    throw Error(ErrorCode::kSizeMismatch, "16-bit buffer size");
  }
  std::vector<const png_byte*> rows(height);
  for (int y = 0; y < height; ++y) {
    rows[y] = reinterpret_cast<const png_byte*>(values.data() + static_cast<std::size_t>(y) * width);
  }
  write_png(path, width, height, PNG_COLOR_TYPE_GRAY, 16, rows);
}

}  // namespace plidar::png
