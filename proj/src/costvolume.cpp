#include "plidar/costvolume.hpp"

#include <algorithm>
#include <string>

#include "plidar/error.hpp"
#include "plidar/parallel.hpp"

namespace plidar {

CensusImage census_transform(const GrayImage& img, CensusWindow window, int threads) {
  if (window.width < 1 || window.height < 1 || window.width % 2 == 0 || window.height % 2 == 0) {
    throw Error(ErrorCode::kWindowTooLarge, "census window must have odd positive sides");
  }
  if (window.bits() > 63) {
    throw Error(ErrorCode::kWindowTooLarge, "census code exceeds 63 bits");
  }
  if (img.width < window.width || img.height < window.height) {
    throw Error(ErrorCode::kWindowTooLarge,
                "image " + std::to_string(img.width) + "x" + std::to_string(img.height) +
                    " smaller than census window");
  }

  CensusImage out;
  out.width = img.width;
  out.height = img.height;
  out.code_bits = window.bits();
  out.codes.assign(img.pixels.size(), 0);

  const int rx = window.width / 2;
  const int ry = window.height / 2;
  // Clamped column lookup for every (x, dx); rows are clamped on the fly.
  std::vector<int> col(static_cast<std::size_t>(img.width) * window.width);
  for (int x = 0; x < img.width; ++x) {
    for (int dx = -rx; dx <= rx; ++dx) {
      col[static_cast<std::size_t>(x) * window.width + dx + rx] = std::clamp(x + dx, 0, img.width - 1);
    }
  }

  parallel_for(static_cast<std::size_t>(img.height), threads, [&](std::size_t y0, std::size_t y1) {
    std::vector<const std::uint8_t*> rows(window.height);
    for (std::size_t y = y0; y < y1; ++y) {
      for (int dy = -ry; dy <= ry; ++dy) {
        const int yy = std::clamp(static_cast<int>(y) + dy, 0, img.height - 1);
        rows[dy + ry] = img.pixels.data() + static_cast<std::size_t>(yy) * img.width;
      }
      std::uint64_t* dst = out.codes.data() + y * img.width;
      for (int x = 0; x < img.width; ++x) {
        const int* cx = col.data() + static_cast<std::size_t>(x) * window.width;
        const std::uint8_t center = rows[ry][x];
        std::uint64_t code = 0;
        int bit = 0;
        for (int wy = 0; wy < window.height; ++wy) {
          const std::uint8_t* row = rows[wy];
          for (int wx = 0; wx < window.width; ++wx) {
            if (wy == ry && wx == rx) continue;
            if (row[cx[wx]] < center) code |= std::uint64_t{1} << bit;
            ++bit;
          }
        }
        dst[x] = code;
      }
    }
  });
  return out;
}

CostVolume build_cost_volume(const CensusImage& left, const CensusImage& right,
                             int max_disparity, int threads) {
  if (left.width != right.width || left.height != right.height ||
      left.code_bits != right.code_bits) {
    throw Error(ErrorCode::kSizeMismatch, "census images differ in size or code length");
  }
  if (max_disparity < 1) throw Error(ErrorCode::kInvalidParams, "max_disparity must be >= 1");

  CostVolume vol(left.width, left.height, max_disparity, CostLayer::kRaw);
  vol.out_of_range = static_cast<Cost>(left.code_bits);
  const int w = left.width;
  const int dmax = max_disparity;

  parallel_for(static_cast<std::size_t>(left.height), threads, [&](std::size_t y0, std::size_t y1) {
    for (std::size_t y = y0; y < y1; ++y) {
      const std::uint64_t* lrow = left.codes.data() + y * w;
      const std::uint64_t* rrow = right.codes.data() + y * w;
      for (int x = 0; x < w; ++x) {
        Cost* dst = vol.pixel(x, static_cast<int>(y));
        const std::uint64_t code = lrow[x];
        const int reach = std::min(dmax, x + 1);
        for (int d = 0; d < reach; ++d) {
          dst[d] = static_cast<Cost>(hamming_distance(code, rrow[x - d]));
        }
        std::fill(dst + reach, dst + dmax, vol.out_of_range);
      }
    }
  });
  return vol;
}

}  // namespace plidar
