#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "plidar/kitti_io.hpp"
#include "plidar/types.hpp"

namespace plidar {

// Stereo --------------------------------------------------------------------

struct ThreePixelCounts {
  std::size_t bad = 0;    // |pred - gt| > 3 px
  std::size_t total = 0;  // valid in both maps
};

inline constexpr double kThreePixelThreshold = 3.0;

ThreePixelCounts three_pixel_counts(const DisparityMap& pred, const DisparityGroundTruth& gt);

/// Fraction of jointly valid pixels off by more than 3 px. Throws
/// kNoValidPixels when no pixel is valid in both maps.
double three_pixel_error(const DisparityMap& pred, const DisparityGroundTruth& gt);

// Box overlap ---------------------------------------------------------------

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

using Polygon = std::vector<Vec2>;

inline constexpr double kAreaEpsilon = 1e-9;

/// Counter-clockwise BEV footprint corners.
std::array<Vec2, 4> bev_corners(const LabelBox3D& box);

double polygon_area(std::span<const Vec2> poly);

/// Sutherland-Hodgman clip of a convex polygon against a convex CCW clipper.
Polygon clip_convex(std::span<const Vec2> subject, std::span<const Vec2> clipper);

double bev_intersection_area(const LabelBox3D& a, const LabelBox3D& b);
double bev_iou(const LabelBox3D& a, const LabelBox3D& b);
double iou_3d(const LabelBox3D& a, const LabelBox3D& b);

// Average precision ---------------------------------------------------------

enum class IouMetric { kBev, k3d };
enum class Interpolation { k11 = 11, k40 = 40 };

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
};

struct PrCurve {
  std::vector<PrPoint> points;
  /// Absent when there is no ground truth at the requested difficulty.
  std::optional<double> ap;
};

struct FrameBoxes {
  std::vector<LabelBox3D> detections;
  std::vector<LabelBox3D> ground_truth;
};

/// Ground truths of the requested difficulty or easier take part; each
/// detection (descending score) claims the unmatched ground truth with the
/// highest IoU >= iou_threshold, otherwise it is a false positive.
PrCurve average_precision(std::span<const FrameBoxes> frames, double iou_threshold,
                          IouMetric metric, Difficulty difficulty,
                          Interpolation interp = Interpolation::k40);

PrCurve average_precision(const std::vector<LabelBox3D>& detections,
                          const std::vector<LabelBox3D>& ground_truth, double iou_threshold,
                          IouMetric metric, Difficulty difficulty,
                          Interpolation interp = Interpolation::k40);

/// Mean of the max-precision-at-recall->=r envelope at the interpolation points.
double interpolated_ap(std::span<const PrPoint> points, Interpolation interp);

// Latency -------------------------------------------------------------------

struct TimingSample {
  std::string stage;
  double ms = 0.0;
};

struct StageStats {
  std::string stage;
  std::size_t count = 0;
  double mean_ms = 0.0;
  double median_ms = 0.0;
  double p95_ms = 0.0;
};

/// Per-stage statistics in order of first appearance. p95 is nearest-rank.
std::vector<StageStats> stage_timer_report(std::span<const TimingSample> samples);

std::string format_report_text(std::span<const StageStats> report);
std::string format_report_csv(std::span<const StageStats> report);

}  // namespace plidar
