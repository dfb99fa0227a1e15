#pragma once

#include <cstdint>

#include "plidar/costvolume.hpp"
#include "plidar/types.hpp"

namespace plidar {

/// Sub-pixel offset of the parabola through (d-1, c_minus), (d, c), (d+1, c_plus):
///   d_sub = d - (c_plus - c_minus) / (2 (c_plus - 2c + c_minus)).
/// Returns 0 when the curve is flat or opens downward (no interior minimum).
double parabola_offset(double c_minus, double c, double c_plus);

/// Applies the quadratic fit to every valid pixel with 1 <= d <= D-2 using
/// the given cost volume. The validity mask is left untouched.
DisparityMap subpixel_refine(const DisparityMap& disp, const CostVolume& volume);

/// Stride-2 decimation: output(i, j) = input(2i, 2j), ceil(H/2) x ceil(W/2).
DepthMap downsample_direct(const DepthMap& depth);

/// Distance-dependent keep probability, linear between (z_near, near_keep_prob)
/// and (z_far, far_keep_prob), clamped outside that interval.
struct AdaptiveSamplingPolicy {
  double near_keep_prob = 0.25;
  double far_keep_prob = 1.0;
  double z_near = 0.0;
  double z_far = 40.0;
  std::uint64_t seed = 0;

  void validate() const;
  double keep_probability(double forward_distance) const;
};

/// Counter-based uniform in [0, 1) keyed by (seed, index).
double keyed_uniform(std::uint64_t seed, std::uint64_t index);

/// Keeps each point independently with keep_probability(point.x); the
/// velodyne x axis is the forward distance. Order is preserved.
PointCloud downsample_adaptive(const PointCloud& cloud, const AdaptiveSamplingPolicy& policy);

}  // namespace plidar
