#include "plidar/pillars.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "plidar/error.hpp"
#include "plidar/refine.hpp"

namespace plidar {
namespace {

// Cell boundaries like 0.36 / 0.12 land a hair below the integer in binary
// floating point; the nudge keeps the floor rule exact at cell edges.
constexpr double kEdgeEps = 1e-9;

int cell_count(double extent, double size) {
  return std::max(1, static_cast<int>(std::ceil(extent / size - kEdgeEps)));
}

int cell_index(double v, double lo, double size, int n) {
  const int i = static_cast<int>(std::floor((v - lo) / size + kEdgeEps));
  return std::clamp(i, 0, n - 1);
}

std::int64_t cell_key(int ix, int iy) {
  return (static_cast<std::int64_t>(ix) << 32) | static_cast<std::uint32_t>(iy);
}

}  // namespace

void PillarConfig::validate() const {
  scope.validate();
  if (!(pillar_x > 0.0) || !(pillar_y > 0.0) || !(pillar_z > 0.0)) {
    throw Error(ErrorCode::kInvalidParams, "pillar sizes must be positive");
  }
  if (pillar_z + kEdgeEps < scope.z_max - scope.z_min) {
    throw Error(ErrorCode::kInvalidParams, "pillar height must cover the scope's z extent");
  }
  if (max_points_per_pillar < 1 || max_pillars < 1) {
    throw Error(ErrorCode::kInvalidParams, "pillar capacity limits must be >= 1");
  }
}

const Pillar* PillarGrid::find(int ix, int iy) const {
  auto it = lookup_.find(cell_key(ix, iy));
  return it == lookup_.end() ? nullptr : &pillars[it->second];
}

std::size_t PillarGrid::total_rows() const {
  std::size_t n = 0;
  for (const auto& p : pillars) n += p.rows.size();
  return n;
}

std::array<int, 2> grid_shape(const PillarConfig& config) {
  config.validate();
  return {cell_count(config.scope.x_max - config.scope.x_min, config.pillar_x),
          cell_count(config.scope.y_max - config.scope.y_min, config.pillar_y)};
}

PillarGrid build_pillars(const PointCloud& cloud, const PillarConfig& config) {
  const auto [nx, ny] = grid_shape(config);
  const ScopeCrop& s = config.scope;

  PillarGrid grid;
  grid.nx = nx;
  grid.ny = ny;
  std::vector<std::vector<std::size_t>> members;

  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Point& p = cloud[i];
    if (!s.contains(p)) continue;
    const int ix = cell_index(p.x, s.x_min, config.pillar_x, nx);
    const int iy = cell_index(p.y, s.y_min, config.pillar_y, ny);
    const auto key = cell_key(ix, iy);
    auto it = grid.lookup_.find(key);
    if (it == grid.lookup_.end()) {
      if (grid.pillars.size() >= static_cast<std::size_t>(config.max_pillars)) continue;
      it = grid.lookup_.emplace(key, grid.pillars.size()).first;
      grid.pillars.push_back(Pillar{ix, iy, {}});
      members.emplace_back();
    }
    members[it->second].push_back(i);
  }

  const std::size_t cap = static_cast<std::size_t>(config.max_points_per_pillar);
  for (std::size_t k = 0; k < grid.pillars.size(); ++k) {
    auto& idx = members[k];
    if (idx.size() > cap) {
      if (config.random_truncation) {
        std::vector<std::size_t> order(idx.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
          return keyed_uniform(config.seed, idx[a]) < keyed_uniform(config.seed, idx[b]);
        });
        order.resize(cap);
        std::sort(order.begin(), order.end());
        std::vector<std::size_t> kept;
        kept.reserve(cap);
        for (auto o : order) kept.push_back(idx[o]);
        idx = std::move(kept);
      } else {
        idx.resize(cap);
      }
    }

    double cx = 0.0, cy = 0.0, cz = 0.0;
    for (auto i : idx) {
      cx += cloud[i].x;
      cy += cloud[i].y;
      cz += cloud[i].z;
    }
    const double n = static_cast<double>(idx.size());
    cx /= n;
    cy /= n;
    cz /= n;

    Pillar& pillar = grid.pillars[k];
    const double px = s.x_min + (pillar.ix + 0.5) * config.pillar_x;
    const double py = s.y_min + (pillar.iy + 0.5) * config.pillar_y;
    pillar.rows.reserve(idx.size());
    for (auto i : idx) {
      const Point& p = cloud[i];
      pillar.rows.push_back({p.x, p.y, p.z, p.reflectance, static_cast<float>(p.x - cx),
                             static_cast<float>(p.y - cy), static_cast<float>(p.z - cz),
                             static_cast<float>(p.x - px), static_cast<float>(p.y - py)});
    }
  }
  return grid;
}

void write_pillar_dump(const PillarGrid& grid, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  out.precision(9);
  for (const auto& p : grid.pillars) {
    out << p.ix << ' ' << p.iy << ' ' << p.rows.size() << '\n';
    for (const auto& row : p.rows) {
      for (std::size_t k = 0; k < row.size(); ++k) out << (k ? " " : "") << row[k];
      out << '\n';
    }
  }
  if (!out) throw Error(ErrorCode::kIoFailure, "write failed: " + path.string());
}

}  // namespace plidar
