#include "plidar/pointcloud.hpp"

#include <cmath>

#include "plidar/error.hpp"

namespace plidar {

void ScopeCrop::validate() const {
  if (!(x_min < x_max) || !(y_min < y_max) || !(z_min < z_max)) {
    throw Error(ErrorCode::kInvalidParams, "scope requires min < max on every axis");
  }
}

DepthMap disparity_to_depth(const DisparityMap& disp, const CameraCalibration& calib,
                            double min_disparity) {
  calib.validate();
  DepthMap depth(disp.width, disp.height);
  const double fb = calib.focal_u * calib.baseline;
  for (std::size_t i = 0; i < disp.size(); ++i) {
    const double d = disp.disparity[i];
    if (!disp.valid[i] || !(d > min_disparity)) continue;
    const double z = fb / d;
    if (!std::isfinite(z)) continue;
    depth.depth[i] = z;
    depth.valid[i] = 1;
  }
  return depth;
}

PointCloud depth_to_cloud(const DepthMap& depth, const CameraCalibration& calib) {
  calib.validate();
  PointCloud cloud;
  cloud.reserve(depth.valid_count());
  const Eigen::Matrix3d rot = calib.rotation();
  const Eigen::Vector3d trans = calib.translation();
  for (int row = 0; row < depth.height; ++row) {
    const double v = static_cast<double>(row) * depth.pixel_stride;
    for (int col = 0; col < depth.width; ++col) {
      const std::size_t i = depth.index(col, row);
      if (!depth.valid[i]) continue;
      const double u = static_cast<double>(col) * depth.pixel_stride;
      const double z = depth.depth[i];
      const Eigen::Vector3d cam((u - calib.center_u) * z / calib.focal_u,
                                (v - calib.center_v) * z / calib.focal_v, z);
      const Eigen::Vector3d p = rot * cam + trans;
      cloud.push_back({static_cast<float>(p.x()), static_cast<float>(p.y()),
                       static_cast<float>(p.z()), 1.0f});
    }
  }
  return cloud;
}

PointCloud crop_scope(const PointCloud& cloud, const ScopeCrop& scope) {
  scope.validate();
  PointCloud out;
  out.reserve(cloud.size());
  for (const auto& p : cloud) {
    if (scope.contains(p)) out.push_back(p);
  }
  return out;
}

}  // namespace plidar
