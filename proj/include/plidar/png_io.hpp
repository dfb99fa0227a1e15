#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "plidar/types.hpp"

namespace plidar::png {

/// Decoded PNG samples, row-major, interleaved channels. 8-bit images keep
/// their byte values; 16-bit images are widened to native-endian uint16.
struct RawImage {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 0;
  std::vector<std::uint16_t> samples;
};

RawImage read(const std::filesystem::path& path);

/// 8-bit grayscale. Color inputs are reduced with ITU-R 601 luma weights.
GrayImage read_gray(const std::filesystem::path& path);

std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b);

void write_gray8(const std::filesystem::path& path, const GrayImage& img);
void write_rgb8(const std::filesystem::path& path, int width, int height,
                const std::vector<std::uint8_t>& rgb);
void write_gray16(const std::filesystem::path& path, int width, int height,
                  const std::vector<std::uint16_t>& values);

}  // namespace plidar::png
