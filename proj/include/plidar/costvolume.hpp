#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "plidar/types.hpp"

namespace plidar {

struct CensusWindow {
  int width = 5;
  int height = 5;

  int bits() const { return width * height - 1; }
};

/// Per-pixel census bitstrings. Bit k (LSB first) corresponds to the k-th
/// window neighbour in row-major order, skipping the centre.
struct CensusImage {
  int width = 0;
  int height = 0;
  int code_bits = 0;
  std::vector<std::uint64_t> codes;

  std::uint64_t at(int x, int y) const { return codes[static_cast<std::size_t>(y) * width + x]; }
};

using Cost = std::uint16_t;

enum class CostLayer { kRaw, kAggregated };

/// Dense H x W x D cost tensor, disparity innermost.
struct CostVolume {
  int width = 0;
  int height = 0;
  int max_disparity = 0;
  CostLayer layer = CostLayer::kRaw;
  /// Cost assigned where the right-image column x - d falls outside the image.
  Cost out_of_range = 0;
  std::vector<Cost> costs;

  CostVolume() = default;
  CostVolume(int w, int h, int d, CostLayer tag)
      : width(w), height(h), max_disparity(d), layer(tag),
        costs(static_cast<std::size_t>(w) * h * d, 0) {}

  std::size_t index(int x, int y, int d) const {
    return (static_cast<std::size_t>(y) * width + x) * max_disparity + d;
  }
  Cost at(int x, int y, int d) const { return costs[index(x, y, d)]; }
  Cost& at(int x, int y, int d) { return costs[index(x, y, d)]; }

  const Cost* pixel(int x, int y) const { return costs.data() + index(x, y, 0); }
  Cost* pixel(int x, int y) { return costs.data() + index(x, y, 0); }
};

inline int hamming_distance(std::uint64_t a, std::uint64_t b) { return std::popcount(a ^ b); }

/// Throws kWindowTooLarge for even/oversized windows (more than 63 bits) or
/// images smaller than the window.
CensusImage census_transform(const GrayImage& img, CensusWindow window = {}, int threads = 1);

/// C(x,y,d) = Hamming(left(x,y), right(x-d,y)); x < d holds the sentinel,
/// which is the census code length (the largest cost a real match can take).
CostVolume build_cost_volume(const CensusImage& left, const CensusImage& right,
                             int max_disparity, int threads = 1);

}  // namespace plidar
