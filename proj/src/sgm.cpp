#include "plidar/sgm.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "plidar/error.hpp"
#include "plidar/parallel.hpp"

namespace plidar {
namespace {

using PathCost = std::int16_t;

constexpr std::array<PathDirection, 8> kEightPaths = {{
    {1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, 1}, {1, -1}, {-1, -1},
}};

// Padding for the d-1 / d+1 neighbours at the disparity range ends. Must
// exceed any prev_min + P2 while staying clear of int16 overflow after + P1.
constexpr PathCost kPad = 16383;

/// Path buffer for one pixel: D values framed by a pad on each side.
struct PathRow {
  int stride = 0;
  std::vector<PathCost> values;
  std::vector<int> mins;

  PathRow(int width, int d) : stride(d + 2), values(static_cast<std::size_t>(width) * (d + 2), kPad), mins(width, 0) {}
  PathCost* at(int x) { return values.data() + static_cast<std::size_t>(x) * stride; }
  const PathCost* at(int x) const { return values.data() + static_cast<std::size_t>(x) * stride; }
};

// L(p,d) = C(p,d) + min(L(p-r,d), L(p-r,d±1) + P1, min_k L(p-r,k) + P2) - min_k L(p-r,k)
inline int path_step(const Cost* cost, const PathCost* prev, int prev_min, PathCost* cur, int dmax,
                     int p1, int p2) {
  const int jump = prev_min + p2;
  int cur_min = std::numeric_limits<int>::max();
  for (int d = 0; d < dmax; ++d) {
    int best = prev[d + 1];
    best = std::min(best, std::min<int>(prev[d], prev[d + 2]) + p1);
    best = std::min(best, jump);
    const int v = cost[d] + best - prev_min;
    cur[d + 1] = static_cast<PathCost>(v);
    cur_min = std::min(cur_min, v);
  }
  return cur_min;
}

inline int path_start(const Cost* cost, PathCost* cur, int dmax) {
  int cur_min = std::numeric_limits<int>::max();
  for (int d = 0; d < dmax; ++d) {
    cur[d + 1] = static_cast<PathCost>(cost[d]);
    cur_min = std::min<int>(cur_min, cost[d]);
  }
  return cur_min;
}

inline void accumulate(Cost* sum, const PathCost* path, int dmax) {
  for (int d = 0; d < dmax; ++d) sum[d] = static_cast<Cost>(sum[d] + path[d + 1]);
}

void horizontal_pass(const CostVolume& raw, CostVolume& out, PathDirection dir, int p1, int p2,
                     int threads) {
  const int w = raw.width;
  const int dmax = raw.max_disparity;
  parallel_for(static_cast<std::size_t>(raw.height), threads, [&](std::size_t y0, std::size_t y1) {
    std::vector<PathCost> a(dmax + 2, kPad), b(dmax + 2, kPad);
    for (std::size_t yy = y0; yy < y1; ++yy) {
      const int y = static_cast<int>(yy);
      PathCost* prev = a.data();
      PathCost* cur = b.data();
      int prev_min = 0;
      for (int i = 0; i < w; ++i) {
        const int x = dir.dx > 0 ? i : w - 1 - i;
        prev_min = i == 0 ? path_start(raw.pixel(x, y), cur, dmax)
                          : path_step(raw.pixel(x, y), prev, prev_min, cur, dmax, p1, p2);
        accumulate(out.pixel(x, y), cur, dmax);
        std::swap(prev, cur);
      }
    }
  });
}

void row_sweep_pass(const CostVolume& raw, CostVolume& out, PathDirection dir, int p1, int p2,
                    int threads) {
  const int w = raw.width;
  const int h = raw.height;
  const int dmax = raw.max_disparity;
  PathRow prev(w, dmax), cur(w, dmax);
  for (int i = 0; i < h; ++i) {
    const int y = dir.dy > 0 ? i : h - 1 - i;
    const bool first_row = i == 0;
    auto row_body = [&](std::size_t x0, std::size_t x1) {
      for (std::size_t xx = x0; xx < x1; ++xx) {
        const int x = static_cast<int>(xx);
        const int px = x - dir.dx;
        int m;
        if (first_row || px < 0 || px >= w) {
          m = path_start(raw.pixel(x, y), cur.at(x), dmax);
        } else {
          m = path_step(raw.pixel(x, y), prev.at(px), prev.mins[px], cur.at(x), dmax, p1, p2);
        }
        cur.mins[x] = m;
        accumulate(out.pixel(x, y), cur.at(x), dmax);
      }
    };
    if (threads == 1) {
      row_body(0, static_cast<std::size_t>(w));
    } else {
      parallel_for(static_cast<std::size_t>(w), threads, row_body);
    }
    std::swap(prev, cur);
  }
}

}  // namespace

void SgmParams::validate() const {
  if (p1 <= 0 || p2 < p1) throw Error(ErrorCode::kInvalidParams, "require 0 < p1 <= p2");
  if (num_paths != 4 && num_paths != 8) throw Error(ErrorCode::kInvalidParams, "num_paths must be 4 or 8");
  if (!(lr_threshold >= 0.0)) throw Error(ErrorCode::kInvalidParams, "lr_threshold must be >= 0");
}

std::span<const PathDirection> default_paths(int num_paths) {
  if (num_paths != 4 && num_paths != 8) throw Error(ErrorCode::kInvalidParams, "num_paths must be 4 or 8");
  return std::span<const PathDirection>(kEightPaths.data(), static_cast<std::size_t>(num_paths));
}

CostVolume aggregate(const CostVolume& raw, const SgmParams& params, int threads) {
  params.validate();
  return aggregate_along(raw, params, default_paths(params.num_paths), threads);
}

CostVolume aggregate_along(const CostVolume& raw, const SgmParams& params,
                           std::span<const PathDirection> paths, int threads) {
  if (raw.layer != CostLayer::kRaw) throw Error(ErrorCode::kWrongLayer, "aggregate expects a raw volume");
  // Zero penalties are allowed here (plain per-path cost summation); the
  // user-facing SgmParams::validate still demands p1 > 0.
  if (params.p1 < 0 || params.p2 < params.p1) {
    throw Error(ErrorCode::kInvalidParams, "require 0 <= p1 <= p2");
  }
  const int max_cost = raw.costs.empty() ? 0 : *std::max_element(raw.costs.begin(), raw.costs.end());
  // Per-path values stay below max_cost + P2; the pad must dominate them and
  // the summed volume must fit the 16-bit accumulator.
  if (max_cost + 2 * params.p2 >= kPad || kPad + params.p1 > std::numeric_limits<PathCost>::max() ||
      static_cast<long>(paths.size()) * (max_cost + params.p2) > std::numeric_limits<Cost>::max()) {
    throw Error(ErrorCode::kInvalidParams,
                "penalties too large for 16-bit accumulation (max cost " + std::to_string(max_cost) + ")");
  }

  CostVolume out(raw.width, raw.height, raw.max_disparity, CostLayer::kAggregated);
  out.out_of_range = raw.out_of_range;
  if (raw.costs.empty()) return out;
  threads = resolve_threads(threads);
  for (const auto& dir : paths) {
    if (dir.dx == 0 && dir.dy == 0) throw Error(ErrorCode::kInvalidParams, "zero path direction");
    if (dir.dy == 0) {
      horizontal_pass(raw, out, dir, params.p1, params.p2, threads);
    } else {
      row_sweep_pass(raw, out, dir, params.p1, params.p2, threads);
    }
  }
  return out;
}

DisparityMap winner_take_all(const CostVolume& aggregated) {
  if (aggregated.layer != CostLayer::kAggregated) {
    throw Error(ErrorCode::kWrongLayer, "winner_take_all expects an aggregated volume");
  }
  DisparityMap disp(aggregated.width, aggregated.height);
  const int dmax = aggregated.max_disparity;
  for (int y = 0; y < aggregated.height; ++y) {
    for (int x = 0; x < aggregated.width; ++x) {
      const Cost* c = aggregated.pixel(x, y);
      // min_element returns the first minimum, i.e. the smaller disparity on ties.
      const int best = static_cast<int>(std::min_element(c, c + dmax) - c);
      disp.set(x, y, static_cast<float>(best));
    }
  }
  return disp;
}

DisparityMap right_winner_take_all(const CostVolume& aggregated) {
  if (aggregated.layer != CostLayer::kAggregated) {
    throw Error(ErrorCode::kWrongLayer, "right_winner_take_all expects an aggregated volume");
  }
  const int w = aggregated.width;
  const int dmax = aggregated.max_disparity;
  DisparityMap disp(w, aggregated.height);
  std::vector<Cost> best_cost(w);
  std::vector<int> best_d(w);
  for (int y = 0; y < aggregated.height; ++y) {
    std::fill(best_cost.begin(), best_cost.end(), std::numeric_limits<Cost>::max());
    std::fill(best_d.begin(), best_d.end(), -1);
    // Right pixel xr sees left pixel xr + d. Walking left pixels in order visits
    // each xr with increasing d, so a strict comparison keeps the smaller d.
    for (int xl = 0; xl < w; ++xl) {
      const Cost* c = aggregated.pixel(xl, y);
      const int reach = std::min(dmax, xl + 1);
      for (int d = 0; d < reach; ++d) {
        const int xr = xl - d;
        if (best_d[xr] < 0 || c[d] < best_cost[xr]) {
          best_cost[xr] = c[d];
          best_d[xr] = d;
        }
      }
    }
    for (int x = 0; x < w; ++x) {
      if (best_d[x] >= 0) disp.set(x, y, static_cast<float>(best_d[x]));
    }
  }
  return disp;
}

DisparityMap lr_consistency(const DisparityMap& left, const DisparityMap& right, double threshold) {
  if (left.width != right.width || left.height != right.height) {
    throw Error(ErrorCode::kSizeMismatch, "left/right disparity maps differ in size");
  }
  DisparityMap out = left;
  for (int y = 0; y < left.height; ++y) {
    for (int x = 0; x < left.width; ++x) {
      const std::size_t i = left.index(x, y);
      if (!left.valid[i]) continue;
      const int xr = x - static_cast<int>(std::lround(left.disparity[i]));
      if (xr < 0 || xr >= left.width) {
        out.invalidate(i);
        continue;
      }
      const std::size_t j = right.index(xr, y);
      if (!right.valid[j] || std::abs(left.disparity[i] - right.disparity[j]) > threshold) {
        out.invalidate(i);
      }
    }
  }
  return out;
}

}  // namespace plidar
