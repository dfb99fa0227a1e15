#include "plidar/refine.hpp"

#include <algorithm>
#include <cmath>

#include "plidar/error.hpp"

namespace plidar {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

double parabola_offset(double c_minus, double c, double c_plus) {
  const double curvature = c_plus - 2.0 * c + c_minus;
  if (!(curvature > 0.0)) return 0.0;
  return -(c_plus - c_minus) / (2.0 * curvature);
}

DisparityMap subpixel_refine(const DisparityMap& disp, const CostVolume& volume) {
  if (disp.width != volume.width || disp.height != volume.height) {
    throw Error(ErrorCode::kSizeMismatch, "disparity map and cost volume differ in size");
  }
  DisparityMap out = disp;
  const int dmax = volume.max_disparity;
  for (int y = 0; y < disp.height; ++y) {
    for (int x = 0; x < disp.width; ++x) {
      const std::size_t i = disp.index(x, y);
      if (!disp.valid[i]) continue;
      const int d = static_cast<int>(std::lround(disp.disparity[i]));
      if (d < 1 || d > dmax - 2) continue;
      const Cost* c = volume.pixel(x, y);
      out.disparity[i] = static_cast<float>(d + parabola_offset(c[d - 1], c[d], c[d + 1]));
    }
  }
  return out;
}

DepthMap downsample_direct(const DepthMap& depth) {
  if (depth.width < 1 || depth.height < 1) throw Error(ErrorCode::kEmptyInput, "empty depth map");
  DepthMap out((depth.width + 1) / 2, (depth.height + 1) / 2);
  out.pixel_stride = depth.pixel_stride * 2;
  for (int i = 0; i < out.height; ++i) {
    for (int j = 0; j < out.width; ++j) {
      const std::size_t src = depth.index(2 * j, 2 * i);
      const std::size_t dst = out.index(j, i);
      out.depth[dst] = depth.depth[src];
      out.valid[dst] = depth.valid[src];
    }
  }
  return out;
}

void AdaptiveSamplingPolicy::validate() const {
  if (!(0.0 <= near_keep_prob && near_keep_prob <= far_keep_prob && far_keep_prob <= 1.0)) {
    throw Error(ErrorCode::kInvalidParams, "require 0 <= near_keep_prob <= far_keep_prob <= 1");
  }
  if (!(z_near < z_far)) throw Error(ErrorCode::kInvalidParams, "require z_near < z_far");
}

double AdaptiveSamplingPolicy::keep_probability(double forward_distance) const {
  const double t = (forward_distance - z_near) / (z_far - z_near);
  const double p = near_keep_prob + (far_keep_prob - near_keep_prob) * t;
  return std::clamp(p, near_keep_prob, far_keep_prob);
}

double keyed_uniform(std::uint64_t seed, std::uint64_t index) {
  const std::uint64_t h = splitmix64(splitmix64(seed) ^ index);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

PointCloud downsample_adaptive(const PointCloud& cloud, const AdaptiveSamplingPolicy& policy) {
  policy.validate();
  PointCloud out;
  out.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (keyed_uniform(policy.seed, i) < policy.keep_probability(cloud[i].x)) out.push_back(cloud[i]);
  }
  return out;
}

}  // namespace plidar
