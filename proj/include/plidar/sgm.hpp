#pragma once

#include <span>

#include "plidar/costvolume.hpp"
#include "plidar/types.hpp"

namespace plidar {

struct SgmParams {
  int p1 = 10;
  int p2 = 120;
  int num_paths = 8;  // 4 or 8
  double lr_threshold = 1.0;

  void validate() const;
};

/// Travel direction of a 1-D aggregation path; the predecessor of pixel p is
/// p - (dx, dy).
struct PathDirection {
  int dx = 0;
  int dy = 0;
};

std::span<const PathDirection> default_paths(int num_paths);

/// S(x,y,d) = sum over paths of L_r(x,y,d) with the usual P1/P2 recurrence.
/// Accumulation is integer-only, so the result does not depend on path order
/// or thread count.
CostVolume aggregate(const CostVolume& raw, const SgmParams& params, int threads = 1);
/// Like aggregate() with an explicit path set; accepts p1 = p2 = 0.
CostVolume aggregate_along(const CostVolume& raw, const SgmParams& params,
                           std::span<const PathDirection> paths, int threads = 1);

/// Left disparity: argmin_d S(x,y,d), ties toward the smaller d.
DisparityMap winner_take_all(const CostVolume& aggregated);

/// Right-view disparity from the same volume, re-indexed as S(x+d, y, d).
DisparityMap right_winner_take_all(const CostVolume& aggregated);

/// Invalidates left pixels whose right-view counterpart disagrees by more
/// than `threshold` or projects outside the image.
DisparityMap lr_consistency(const DisparityMap& left, const DisparityMap& right, double threshold);

}  // namespace plidar
