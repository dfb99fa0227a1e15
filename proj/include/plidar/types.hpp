#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace plidar {

/// Row-major 8-bit intensity image.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  GrayImage() = default;
  GrayImage(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

inline constexpr float kInvalidDisparity = -1.0f;

/// Per-pixel disparity in pixels. Invalid pixels hold kInvalidDisparity.
struct DisparityMap {
  int width = 0;
  int height = 0;
  std::vector<float> disparity;
  std::vector<std::uint8_t> valid;

  DisparityMap() = default;
  DisparityMap(int w, int h)
      : width(w),
        height(h),
        disparity(static_cast<std::size_t>(w) * h, kInvalidDisparity),
        valid(static_cast<std::size_t>(w) * h, 0) {}

  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
  std::size_t size() const { return disparity.size(); }

  void set(int x, int y, float d) {
    disparity[index(x, y)] = d;
    valid[index(x, y)] = 1;
  }
  void invalidate(std::size_t i) {
    disparity[i] = kInvalidDisparity;
    valid[i] = 0;
  }
};

/// Per-pixel metric depth. `pixel_stride` maps map columns/rows back onto
/// source-image pixel coordinates (2 after direct downsampling).
struct DepthMap {
  int width = 0;
  int height = 0;
  int pixel_stride = 1;
  std::vector<double> depth;
  std::vector<std::uint8_t> valid;

  DepthMap() = default;
  DepthMap(int w, int h)
      : width(w),
        height(h),
        depth(static_cast<std::size_t>(w) * h, 0.0),
        valid(static_cast<std::size_t>(w) * h, 0) {}

  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
  std::size_t size() const { return depth.size(); }
  std::size_t valid_count() const;
};

/// Velodyne-frame point: x forward, y left, z up (meters).
struct Point {
  float x = 0.f;
  float y = 0.f;
  float z = 0.f;
  float reflectance = 0.f;

  friend bool operator==(const Point&, const Point&) = default;
};

using PointCloud = std::vector<Point>;

enum class DisparityRegion { kNoc, kAll };

/// Ground-truth disparity as shipped by KITTI (disp_noc / disp_occ PNGs).
struct DisparityGroundTruth {
  int width = 0;
  int height = 0;
  std::vector<float> disparity;
  std::vector<std::uint8_t> valid;
  DisparityRegion region = DisparityRegion::kAll;
};

inline std::size_t DepthMap::valid_count() const {
  std::size_t n = 0;
  for (auto v : valid) n += v != 0;
  return n;
}

}  // namespace plidar
