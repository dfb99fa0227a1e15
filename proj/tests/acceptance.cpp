// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "plidar/costvolume.hpp"
#include "plidar/eval.hpp"
#include "plidar/kitti_io.hpp"
#include "plidar/pillars.hpp"
#include "plidar/pipeline.hpp"
#include "plidar/refine.hpp"
#include "plidar/sgm.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace plidar;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Stereo matching on an in-memory pair with the reference configuration.
struct StereoRun {
  DisparityMap raw_sgm;  // after LR check
  DisparityMap refined;  // raw_sgm plus sub-pixel refinement
};

StereoRun run_stereo(const testing::SyntheticPair& pair, int max_disparity) {
  PipelineConfig c;
  c.max_disparity = max_disparity;
  StereoFrame frame{pair.left, pair.right, {}};
  frame.calib.focal_u = frame.calib.focal_v = 700;
  frame.calib.baseline = 0.5;
  frame.calib.cam_to_velo = kitti_axes_cam_to_velo();
  c.de_enabled = false;
  StereoRun out;
  out.raw_sgm = compute_disparity(frame, c);
  c.de_enabled = true;
  out.refined = compute_disparity(frame, c);
  return out;
}

// --------------------------------------------------------------------------

void ac1(Outcome& o) {
  const auto t0 = Clock::now();
  // Every strict-local-minimum triple becomes one pixel of a 3-level volume so
  // the sweep runs through subpixel_refine itself.
  std::vector<std::array<Cost, 3>> triples;
  std::size_t symmetric = 0;
  for (int cm = 0; cm <= 64; ++cm)
    for (int c = 0; c <= 64; ++c)
      for (int cp = 0; cp <= 64; ++cp)
        if (c < cm && c < cp) triples.push_back({Cost(cm), Cost(c), Cost(cp)});
  CostVolume vol(static_cast<int>(triples.size()), 1, 3, CostLayer::kRaw);
  DisparityMap disp(vol.width, 1);
  for (int x = 0; x < vol.width; ++x) {
    std::copy(triples[x].begin(), triples[x].end(), vol.pixel(x, 0));
    disp.set(x, 0, 1.0f);
  }
  const DisparityMap out = subpixel_refine(disp, vol);
  std::size_t ok = 0;
  double worst = 0.0;
  for (int x = 0; x < vol.width; ++x) {
    const double off = std::abs(out.disparity[x] - 1.0);
    worst = std::max(worst, off);
    ok += off < 0.5;
    if (triples[x][0] == triples[x][2]) {
      ++symmetric;
      o.require(out.disparity[x] == 1.0f, "symmetric triple moved");
    }
  }
  const double secs = seconds_since(t0);
  o.require(ok == triples.size(), "offset bound");
  o.require(secs < 1.0, "runtime");
  o.detail << triples.size() << " strict minima, " << ok << " within bound (max |offset| " << worst
           << "), " << symmetric << " symmetric exact, " << secs << " s";
}

void ac2(Outcome& o) {
  std::mt19937 rng(2024);
  int lines = 0, exact = 0;
  for (; lines < 200; ++lines) {
    const int n = 1 + static_cast<int>(rng() % 16);
    const int d = 1 + static_cast<int>(rng() % 8);
    const int p1 = 1 + static_cast<int>(rng() % 20);
    const int p2 = p1 + static_cast<int>(rng() % 150);
    CostVolume raw(n, 1, d, CostLayer::kRaw);
    for (auto& c : raw.costs) c = static_cast<Cost>(rng() % 25);
    const PathDirection dir{lines % 2 ? -1 : 1, 0};
    const CostVolume agg = aggregate_along(raw, SgmParams{p1, p2}, std::span(&dir, 1));
    std::vector<std::vector<std::int64_t>> costs;
    for (int i = 0; i < n; ++i) {
      const int x = dir.dx > 0 ? i : n - 1 - i;
      costs.emplace_back(raw.pixel(x, 0), raw.pixel(x, 0) + d);
    }
    const auto ref = oracle::scanline_dp(costs, p1, p2);
    bool same = true;
    for (int i = 0; i < n; ++i) {
      const int x = dir.dx > 0 ? i : n - 1 - i;
      for (int k = 0; k < d; ++k) same = same && agg.at(x, 0, k) == ref[i][k];
    }
    exact += same;
  }
  o.require(exact == lines, "oracle mismatch");
  o.detail << exact << "/" << lines << " scanlines bit-exact";
}

void ac3(Outcome& o) {
  const auto t0 = Clock::now();
  constexpr int kW = 256, kH = 128, kD = 32;
  for (int s : {2, 5, 11}) {
    const auto pair = testing::make_shifted_pair(kW, kH, s, 1000 + s, testing::Texture::kNoise);
    const StereoRun run = run_stereo(pair, kD);
    std::size_t valid = 0, exact = 0;
    double abs_err = 0.0;
    for (int y = 2; y < kH - 2; ++y) {
      for (int x = kD; x < kW - 2; ++x) {
        const auto i = run.raw_sgm.index(x, y);
        if (!run.raw_sgm.valid[i]) continue;
        ++valid;
        exact += run.raw_sgm.disparity[i] == static_cast<float>(s);
        abs_err += std::abs(run.refined.disparity[i] - s);
      }
    }
    const double frac = valid ? static_cast<double>(exact) / valid : 0.0;
    const double mae = valid ? abs_err / valid : 1e9;
    o.require(frac >= 0.99, "s=" + std::to_string(s) + " exact fraction");
    o.require(mae <= 0.25, "s=" + std::to_string(s) + " DE MAE");
    o.detail << "s=" << s << ": " << 100.0 * frac << "% exact of " << valid << ", DE MAE " << mae << "; ";
  }
  const double secs = seconds_since(t0);
  o.require(secs < 5.0, "runtime");
  o.detail << secs << " s";
}

void ac4(Outcome& o) {
  constexpr int kW = 256, kH = 128, kD = 32;
  constexpr double kShift = 5.5;
  double off_sum = 0, on_sum = 0;
  std::size_t n = 0;
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const auto pair = testing::make_shifted_pair(kW, kH, kShift, seed, testing::Texture::kSmooth);
    const StereoRun run = run_stereo(pair, kD);
    for (int y = 2; y < kH - 2; ++y) {
      for (int x = kD; x < kW - 8; ++x) {
        const auto i = run.raw_sgm.index(x, y);
        if (!run.raw_sgm.valid[i]) continue;
        off_sum += std::abs(run.raw_sgm.disparity[i] - kShift);
        on_sum += std::abs(run.refined.disparity[i] - kShift);
        ++n;
      }
    }
  }
  const double off = n ? off_sum / n : 0, on = n ? on_sum / n : 0;
  const double reduction = off > 0 ? 1.0 - on / off : 0.0;
  o.require(n > 0, "no valid pixels");
  o.require(reduction >= 0.30, "relative reduction");
  o.detail << n << " px, MAE DE-off " << off << ", DE-on " << on << ", reduction " << 100 * reduction << "%";
}

void ac5(Outcome& o) {
  std::mt19937 rng(5);
  int ok = 0;
  for (int t = 0; t < 1000; ++t) {
    const int w = 2 + static_cast<int>(rng() % 200), h = 2 + static_cast<int>(rng() % 120);
    DepthMap in(w, h);
    for (std::size_t i = 0; i < in.size(); ++i) {
      in.depth[i] = 1.0 + (rng() % 100000) / 100.0;
      in.valid[i] = rng() % 4 != 0;
    }
    const DepthMap out = downsample_direct(in);
    bool good = out.size() == static_cast<std::size_t>((h + 1) / 2) * ((w + 1) / 2);
    const std::multiset<double> values(in.depth.begin(), in.depth.end());
    for (std::size_t i = 0; good && i < out.size(); ++i) good = values.count(out.depth[i]) > 0;
    ok += good;
  }
  o.require(ok == 1000, "decimation contract");
  o.detail << ok << "/1000 shapes";
}

void ac6(Outcome& o) {
  constexpr std::size_t kN = 100000;
  PointCloud cloud(kN, Point{0.f, 1.f, 0.f, 1.f});  // forward distance 0 m => p = near_keep_prob
  AdaptiveSamplingPolicy p;
  p.near_keep_prob = 0.25;
  p.seed = 42;
  const auto kept = downsample_adaptive(cloud, p);
  const double sigma = std::sqrt(kN * 0.25 * 0.75);
  const double dev = std::abs(static_cast<double>(kept.size()) - 25000.0);
  o.require(dev <= 3 * sigma, "binomial band");
  o.require(downsample_adaptive(cloud, p) == kept, "repeatability");

  const AdaptiveSamplingPolicy def;
  bool monotone = true;
  for (double z = -5; z < 60; z += 0.01) monotone = monotone && def.keep_probability(z + 0.01) >= def.keep_probability(z);
  // Empirical check on a ramp: kept fraction per 10 m band never decreases.
  PointCloud ramp(200000);
  for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = {static_cast<float>(50.0 * i / ramp.size()), 0.f, 0.f, 1.f};
  AdaptiveSamplingPolicy rp;
  rp.seed = 7;
  std::vector<int> per_band(5, 0);
  for (const auto& q : downsample_adaptive(ramp, rp)) ++per_band[std::min(4, static_cast<int>(q.x / 10.0))];
  for (int b = 1; b < 5; ++b) monotone = monotone && per_band[b] >= per_band[b - 1];
  o.require(monotone, "monotone keep probability");

  // Thread-count independence through the full pipeline.
  const auto dir = testing::scratch_dir("accept_ad");
  testing::write_synthetic_frame(dir / "in", "0", 192, 96, 10, 77);
  PipelineConfig c;
  c.input_dir = dir / "in";
  c.frames = {"0"};
  c.max_disparity = 32;
  c.ad_enabled = true;
  c.dd_enabled = false;
  std::ostringstream log;
  c.output_dir = dir / "t1";
  c.threads = 1;
  run_pipeline(c, log);
  c.output_dir = dir / "t4";
  c.threads = 4;
  run_pipeline(c, log);
  const std::string a = slurp(dir / "t1/velodyne/0.bin"), b = slurp(dir / "t4/velodyne/0.bin");
  o.require(!a.empty() && a == b, "thread-count independence");
  o.detail << "kept " << kept.size() << " (|dev| " << dev << " <= 3 sigma " << 3 * sigma << "), bands";
  for (int v : per_band) o.detail << ' ' << v;
  o.detail << ", 1 vs 4 threads identical (" << a.size() / 16 << " pts)";
}

void ac7(Outcome& o) {
  PillarConfig c;
  c.max_points_per_pillar = 1 << 20;
  c.max_pillars = 1 << 24;
  std::mt19937 rng(7);
  std::uniform_real_distribution<float> ux(-10.f, 80.f), uy(-50.f, 50.f), uz(-4.f, 2.f);
  PointCloud cloud(10000);
  for (auto& p : cloud) p = {ux(rng), uy(rng), uz(rng), 1.f};
  // Exact duplicates of a few points must still appear once per occurrence.
  for (int k = 0; k < 50; ++k) cloud.push_back(cloud[k]);
  const PillarGrid g = build_pillars(cloud, c);
  std::multiset<std::tuple<float, float, float>> expected, seen;
  for (const auto& p : cloud)
    if (c.scope.contains(p)) expected.insert({p.x, p.y, p.z});
  std::set<std::pair<int, int>> cells;
  bool cells_unique = true, in_cell = true;
  for (const auto& pil : g.pillars) {
    cells_unique = cells_unique && cells.insert({pil.ix, pil.iy}).second;
    for (const auto& r : pil.rows) {
      seen.insert({r[0], r[1], r[2]});
      const int ix = static_cast<int>(std::floor((r[0] - c.scope.x_min) / c.pillar_x));
      const int iy = static_cast<int>(std::floor((r[1] - c.scope.y_min) / c.pillar_y));
      in_cell = in_cell && ix == pil.ix && iy == pil.iy;
    }
  }
  o.require(seen == expected, "partition");
  o.require(cells_unique && in_cell, "cell assignment");
  PillarConfig s12, s16;
  s16.pillar_x = s16.pillar_y = 0.16;
  const int nx12 = grid_shape(s12)[0], nx16 = grid_shape(s16)[0];
  o.require(nx12 == 576 && nx16 == 432, "grid shape");
  o.detail << expected.size() << " in-scope points in " << g.pillars.size() << " pillars, " << seen.size()
           << " rows; nx(0.12)=" << nx12 << ", nx(0.16)=" << nx16;
}

LabelBox3D random_box(std::mt19937_64& rng, double cx, double cy, double spread) {
  std::uniform_real_distribution<double> j(-spread, spread), l(3.0, 5.0), w(1.4, 2.2), a(-std::numbers::pi, std::numbers::pi);
  LabelBox3D b;
  b.category = "Car";
  b.center_x = cx + j(rng);
  b.center_y = cy + j(rng);
  b.length = l(rng);
  b.width = w(rng);
  b.height = 1.5;
  b.yaw = a(rng);
  return b;
}

void ac8(Outcome& o) {
  std::mt19937_64 rng(8);
  double worst_iou = 0.0;
  int overlapping = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto a = random_box(rng, 0, 0, 2.0);
    const auto b = random_box(rng, 0, 0, 2.0);
    const double v = bev_iou(a, b);
    overlapping += v > 0;
    worst_iou = std::max(worst_iou, std::abs(v - oracle::bev_iou(a, b)));
  }
  o.require(worst_iou <= 1e-6, "IoU oracle");

  double worst_ap = 0.0, ap_sum = 0.0;
  int ap_count = 0;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    std::vector<FrameBoxes> frames;
    std::vector<oracle::OracleFrame> of;
    const int nf = 1 + static_cast<int>(rng() % 3);
    for (int f = 0; f < nf; ++f) {
      FrameBoxes fb;
      const int ng = 1 + static_cast<int>(rng() % 5);
      for (int g = 0; g < ng; ++g) fb.ground_truth.push_back(random_box(rng, 12.0 * g, 0, 0.0));
      const int nd = static_cast<int>(rng() % 8);
      for (int d = 0; d < nd; ++d) {
        const int target = static_cast<int>(rng() % (ng + 1));  // == ng: no ground truth there
        auto det = random_box(rng, 12.0 * target, 0, 0.4);
        if (target < ng) {
          const auto& g = fb.ground_truth[target];
          det.yaw = g.yaw + (u(rng) - 0.5) * 0.6;
          det.length = g.length + (u(rng) - 0.5) * 0.4;
          det.width = g.width + (u(rng) - 0.5) * 0.2;
        }
        det.score = u(rng);
        fb.detections.push_back(det);
      }
      of.push_back({fb.detections, fb.ground_truth});
      frames.push_back(std::move(fb));
    }
    for (double thr : {0.5, 0.7}) {
      for (auto interp : {Interpolation::k11, Interpolation::k40}) {
        const double ap = *average_precision(frames, thr, IouMetric::kBev, Difficulty::kHard, interp).ap;
        ap_sum += ap;
        ++ap_count;
        worst_ap = std::max(worst_ap, std::abs(ap - oracle::brute_force_ap(of, thr, static_cast<int>(interp))));
      }
    }
  }
  o.require(worst_ap <= 1e-6, "AP brute force");

  DisparityMap pred(10, 1);
  for (int x = 0; x < 10; ++x) pred.set(x, 0, 30.f - x);
  const DisparityGroundTruth gt{10, 1, pred.disparity, pred.valid, DisparityRegion::kAll};
  DisparityMap one_bad = pred, boundary = pred;
  one_bad.set(4, 0, pred.disparity[4] + 4.f);
  boundary.set(4, 0, pred.disparity[4] - 3.f);
  const double e0 = three_pixel_error(pred, gt), e1 = three_pixel_error(one_bad, gt), e2 = three_pixel_error(boundary, gt);
  o.require(e0 == 0.0 && e1 == 0.1 && e2 == 0.0, "three-pixel cases");
  o.detail << "IoU max dev " << worst_iou << " (" << overlapping << " overlapping pairs), AP max dev " << worst_ap << " (mean AP " << ap_sum / ap_count << ")"
           << ", 3px {" << e0 << ", " << e1 << ", " << e2 << "}";
}

void ac9(Outcome& o) {
  constexpr int kW = 1224, kH = 370, kFrames = 10;
  const auto dir = testing::scratch_dir("accept_det");
  std::vector<std::string> ids;
  for (int f = 0; f < kFrames; ++f) {
    char id[8];
    std::snprintf(id, sizeof id, "%06d", f);
    ids.push_back(id);
    testing::write_synthetic_frame(dir / "in", id, kW, kH, 12 + 3 * f, 900 + f);
  }
  PipelineConfig c;
  c.input_dir = dir / "in";
  c.max_disparity = 128;
  std::ostringstream log;

  c.frames = {ids[0]};
  c.output_dir = dir / "single";
  const auto t0 = Clock::now();
  const auto single = run_pipeline(c, log);
  const double single_s = seconds_since(t0);
  o.require(single.frames_failed == 0 && single_s < 2.0, "single-frame latency");

  c.frames = ids;
  std::size_t points = 0;
  double batch_s[2];
  for (int run = 0; run < 2; ++run) {
    c.output_dir = dir / ("run" + std::to_string(run));
    const auto t1 = Clock::now();
    const auto s = run_pipeline(c, log);
    batch_s[run] = seconds_since(t1);
    o.require(s.frames_failed == 0, "frame failures");
    points = s.points_emitted;
  }
  int identical = 0;
  for (const auto& id : ids) {
    const std::string a = slurp(dir / "run0/velodyne" / (id + ".bin"));
    identical += !a.empty() && a == slurp(dir / "run1/velodyne" / (id + ".bin"));
  }
  o.require(identical == kFrames, "byte-identical outputs");
  o.detail << identical << "/" << kFrames << " frames identical, " << points << " points per run; single frame "
           << single_s << " s; batches " << batch_s[0] << " s / " << batch_s[1] << " s";
}

void ac10(Outcome& o) {
  const auto dir = testing::scratch_dir("accept_io");
  std::mt19937 rng(10);
  bool ok = true;
  for (std::size_t n : {0u, 1u, 7u, 12345u}) {
    PointCloud cloud(n);
    for (auto& p : cloud) {
      std::uint32_t bits[4];
      for (auto& b : bits) {
        do b = rng(); while (((b >> 23) & 0xFF) == 0xFF);  // finite floats of any magnitude
      }
      std::memcpy(&p, bits, sizeof p);
    }
    const fs::path path = dir / ("c" + std::to_string(n) + ".bin");
    write_velodyne_bin(cloud, path);
    const PointCloud back = read_velodyne_bin(path);
    ok = ok && fs::file_size(path) == 16 * n && back.size() == n &&
         (n == 0 || std::memcmp(back.data(), cloud.data(), 16 * n) == 0);
  }
  o.require(ok, "velodyne bin");

  const auto gt = load_disparity_png(fs::path(PLIDAR_TEST_DATA_DIR) / "disp_gt_8x8.png");
  int matched = 0;
  for (int r = 0; r < 8; ++r) {
    for (int col = 0; col < 8; ++col) {
      const std::size_t i = static_cast<std::size_t>(r) * 8 + col;
      const int raw = (r + col) % 5 == 0 ? 0 : r * 2000 + col * 37 + 1;
      const bool good = raw == 0 ? gt.valid[i] == 0 : gt.valid[i] == 1 && gt.disparity[i] == static_cast<float>(raw / 256.0);
      matched += good;
    }
  }
  o.require(gt.width == 8 && gt.height == 8 && matched == 64, "golden disparity png");
  o.detail << "bin sizes/roundtrip ok=" << ok << ", golden png " << matched << "/64 pixels";
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria = {
      {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4}, {"AC5", ac5},
      {"AC6", ac6}, {"AC7", ac7}, {"AC8", ac8}, {"AC9", ac9}, {"AC10", ac10},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      fn(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    failures += !o.pass;
    std::cout << name << ' ' << (o.pass ? "PASS" : "FAIL") << "  " << o.detail.str() << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
