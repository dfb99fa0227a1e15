#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace plidar {

/// Rectified stereo intrinsics plus the rigid transform from the rectified
/// left-camera frame into the velodyne frame.
struct CameraCalibration {
  double focal_u = 0.0;
  double focal_v = 0.0;
  double center_u = 0.0;
  double center_v = 0.0;
  double baseline = 0.0;
  Eigen::Matrix<double, 3, 4> cam_to_velo = Eigen::Matrix<double, 3, 4>::Identity();

  Eigen::Matrix3d rotation() const { return cam_to_velo.leftCols<3>(); }
  Eigen::Vector3d translation() const { return cam_to_velo.col(3); }

  Eigen::Vector3d to_velo(const Eigen::Vector3d& p_cam) const {
    return rotation() * p_cam + translation();
  }
  Eigen::Vector3d to_cam(const Eigen::Vector3d& p_velo) const {
    return rotation().transpose() * (p_velo - translation());
  }

  /// Throws kInvalidParams when focal lengths / baseline are non-positive or
  /// the rotation block is not orthonormal within 1e-6.
  void validate() const;
};

}  // namespace plidar
