#pragma once

#include "plidar/camera.hpp"
#include "plidar/types.hpp"

namespace plidar {

/// Half-open axis-aligned extent [min, max) per axis, velodyne frame.
struct ScopeCrop {
  double x_min = 0.0, x_max = 69.12;
  double y_min = -39.68, y_max = 39.68;
  double z_min = -3.0, z_max = 1.0;

  void validate() const;
  bool contains(const Point& p) const {
    return p.x >= x_min && p.x < x_max && p.y >= y_min && p.y < y_max && p.z >= z_min &&
           p.z < z_max;
  }
};

inline constexpr double kDefaultMinDisparity = 0.5;

/// depth = focal_u * baseline / d on valid pixels with d > min_disparity.
DepthMap disparity_to_depth(const DisparityMap& disp, const CameraCalibration& calib,
                            double min_disparity = kDefaultMinDisparity);

/// Back-projects every valid pixel (row-major order) through the intrinsics
/// and cam_to_velo. Reflectance is fixed at 1.0.
PointCloud depth_to_cloud(const DepthMap& depth, const CameraCalibration& calib);

PointCloud crop_scope(const PointCloud& cloud, const ScopeCrop& scope);

}  // namespace plidar
