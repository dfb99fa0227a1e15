#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "plidar/camera.hpp"
#include "plidar/types.hpp"

namespace plidar {

struct StereoFrame {
  GrayImage left;
  GrayImage right;
  CameraCalibration calib;

  int width() const { return left.width; }
  int height() const { return left.height; }
};

enum class Difficulty { kEasy = 0, kModerate = 1, kHard = 2, kIgnored = 3 };

const char* to_string(Difficulty d);

/// KITTI difficulty from 2D box height (px), occlusion level and truncation.
/// Boxes that meet none of the three levels are kIgnored.
Difficulty classify_difficulty(double bbox_height, int occlusion, double truncation);

/// 3D box in the velodyne frame. The center is the geometric center of the
/// box (KITTI labels store the bottom-face center, converted on load).
struct LabelBox3D {
  std::string category;
  double center_x = 0.0;
  double center_y = 0.0;
  double center_z = 0.0;
  double length = 0.0;
  double width = 0.0;
  double height = 0.0;
  double yaw = 0.0;  // (-pi, pi], heading of the length axis in the BEV plane
  std::optional<double> score;
  Difficulty difficulty = Difficulty::kEasy;
  double truncation = 0.0;
  int occlusion = 0;
  double alpha = 0.0;
  double bbox[4] = {0.0, 0.0, 0.0, 0.0};  // left, top, right, bottom (px)
};

/// Camera-frame parameters as written in a KITTI label line.
struct CameraBox {
  double x = 0.0;  // bottom-face center, rectified camera frame
  double y = 0.0;
  double z = 0.0;
  double rotation_y = 0.0;
};

double wrap_angle(double a);

LabelBox3D camera_to_velo(const CameraBox& cam, double h, double w, double l,
                          const CameraCalibration& calib);
CameraBox velo_to_camera(const LabelBox3D& box, const CameraCalibration& calib);

// Calibration ---------------------------------------------------------------

/// Parses the KITTI object calib text (P2, P3, R0_rect, Tr_velo_to_cam).
/// Intrinsics come from P2; the baseline from the P2/P3 horizontal offsets.
CameraCalibration parse_calibration(std::istream& in);
CameraCalibration load_calibration(const std::filesystem::path& path);

/// Canonical KITTI axis permutation (camera z forward -> velodyne x forward).
Eigen::Matrix<double, 3, 4> kitti_axes_cam_to_velo();

StereoFrame load_stereo_frame(const std::filesystem::path& left_path,
                              const std::filesystem::path& right_path,
                              const std::filesystem::path& calib_path);

// Point clouds --------------------------------------------------------------

void write_velodyne_bin(const PointCloud& cloud, const std::filesystem::path& path);
PointCloud read_velodyne_bin(const std::filesystem::path& path);

void write_ply(const PointCloud& cloud, const std::filesystem::path& path);
PointCloud read_ply(const std::filesystem::path& path);

// Labels --------------------------------------------------------------------

std::vector<LabelBox3D> parse_labels(std::istream& in, const CameraCalibration& calib);
std::vector<LabelBox3D> load_labels(const std::filesystem::path& path,
                                    const CameraCalibration& calib);
void write_labels(const std::vector<LabelBox3D>& boxes, const CameraCalibration& calib,
                  const std::filesystem::path& path);

// Disparity PNGs ------------------------------------------------------------

/// KITTI 16-bit disparity: value / 256 = disparity (px), 0 = invalid.
DisparityGroundTruth load_disparity_png(const std::filesystem::path& path,
                                        DisparityRegion region = DisparityRegion::kAll);
void write_disparity_png(const DisparityMap& disp, const std::filesystem::path& path);

}  // namespace plidar
