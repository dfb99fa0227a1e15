#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <unordered_map>
#include <vector>

#include "plidar/pointcloud.hpp"
#include "plidar/types.hpp"

namespace plidar {

struct PillarConfig {
  double pillar_x = 0.12;
  double pillar_y = 0.12;
  double pillar_z = 4.0;
  ScopeCrop scope;
  int max_points_per_pillar = 32;
  int max_pillars = 12000;
  /// When set, the kept subset of an overfull pillar is chosen by a seeded
  /// hash instead of first arrival (rows still keep point order).
  bool random_truncation = false;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Augmented point feature: raw (x, y, z, r), offsets to the pillar point
/// centroid (xc, yc, zc) and to the pillar's geometric BEV center (xp, yp).
using PillarFeature = std::array<float, 9>;

struct Pillar {
  int ix = 0;
  int iy = 0;
  std::vector<PillarFeature> rows;
};

struct PillarGrid {
  int nx = 0;
  int ny = 0;
  /// Pillars in first-occupancy order.
  std::vector<Pillar> pillars;

  const Pillar* find(int ix, int iy) const;
  std::size_t total_rows() const;

 private:
  friend PillarGrid build_pillars(const PointCloud& cloud, const PillarConfig& config);
  std::unordered_map<std::int64_t, std::size_t> lookup_;
};

/// (nx, ny) = ceil(extent / pillar size) per BEV axis.
std::array<int, 2> grid_shape(const PillarConfig& config);

PillarGrid build_pillars(const PointCloud& cloud, const PillarConfig& config);

/// Text dump: "ix iy count" per pillar followed by `count` rows of 9 features.
void write_pillar_dump(const PillarGrid& grid, const std::filesystem::path& path);

}  // namespace plidar
