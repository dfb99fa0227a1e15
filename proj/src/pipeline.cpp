#include "plidar/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "plidar/costvolume.hpp"
#include "plidar/error.hpp"
#include "plidar/pointcloud.hpp"
#include "plidar/refine.hpp"
#include "plidar/sgm.hpp"

namespace plidar {
namespace {

namespace fs = std::filesystem;

class StageClock {
 public:
  explicit StageClock(std::vector<TimingSample>* sink) : sink_(sink) {}

  template <typename Fn>
  auto time(double& acc, Fn&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      acc += elapsed_ms(t0);
    } else {
      auto result = fn();
      acc += elapsed_ms(t0);
      return result;
    }
  }

  void emit(const char* stage, double ms) {
    if (sink_) sink_->push_back({stage, ms});
  }

 private:
  static double elapsed_ms(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  }
  std::vector<TimingSample>* sink_;
};

std::vector<std::string> ids_with_extension(const fs::path& dir, const std::string& ext) {
  std::vector<std::string> ids;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return ids;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ext) {
      ids.push_back(entry.path().stem().string());
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

fs::path prefer_subdir(const fs::path& dir, const char* sub) {
  std::error_code ec;
  return fs::is_directory(dir / sub, ec) ? dir / sub : dir;
}

std::vector<std::string> resolve_frames(const PipelineConfig& config) {
  if (config.frames.size() == 1 && config.frames.front() == "all") {
    return discover_frames(config.input_dir);
  }
  return config.frames;
}

/// Frame ids present on both sides; throws kMissingCounterpart otherwise.
std::vector<std::string> match_ids(const std::vector<std::string>& pred,
                                   const std::vector<std::string>& gt,
                                   const std::vector<std::string>& requested) {
  const std::set<std::string> ps(pred.begin(), pred.end()), gs(gt.begin(), gt.end());
  if (!requested.empty()) {
    for (const auto& id : requested) {
      if (!ps.count(id) || !gs.count(id)) {
        throw Error(ErrorCode::kMissingCounterpart, "frame " + id + " missing on one side");
      }
    }
    return requested;
  }
  for (const auto& id : ps) {
    if (!gs.count(id)) throw Error(ErrorCode::kMissingCounterpart, "frame " + id + " has no ground truth");
  }
  for (const auto& id : gs) {
    if (!ps.count(id)) throw Error(ErrorCode::kMissingCounterpart, "frame " + id + " has no prediction");
  }
  return std::vector<std::string>(gs.begin(), gs.end());
}

DisparityMap to_disparity_map(const DisparityGroundTruth& gt) {
  DisparityMap d(gt.width, gt.height);
  for (std::size_t i = 0; i < gt.disparity.size(); ++i) {
    if (gt.valid[i]) {
      d.disparity[i] = gt.disparity[i];
      d.valid[i] = 1;
    }
  }
  return d;
}

}  // namespace

DisparityMap compute_disparity(const StereoFrame& frame, const PipelineConfig& config,
                               std::vector<TimingSample>* timings) {
  StageClock clock(timings);
  double t_census = 0, t_cost = 0, t_sgm = 0, t_refine = 0;
  const int threads = config.threads;

  const auto [left_census, right_census] = clock.time(t_census, [&] {
    return std::pair{census_transform(frame.left, config.census, threads),
                     census_transform(frame.right, config.census, threads)};
  });
  const CostVolume raw = clock.time(
      t_cost, [&] { return build_cost_volume(left_census, right_census, config.max_disparity, threads); });
  DisparityMap disp = clock.time(t_sgm, [&] {
    const CostVolume aggregated = aggregate(raw, config.sgm, threads);
    return lr_consistency(winner_take_all(aggregated), right_winner_take_all(aggregated),
                          config.sgm.lr_threshold);
  });
  if (config.de_enabled) {
    disp = clock.time(t_refine, [&] { return subpixel_refine(disp, raw); });
  }
  clock.emit("census", t_census);
  clock.emit("cost_volume", t_cost);
  clock.emit("sgm", t_sgm);
  if (timings) timings->push_back({"refine", t_refine});
  return disp;
}

FrameOutput process_frame(const StereoFrame& frame, const PipelineConfig& config,
                          std::vector<TimingSample>* timings) {
  std::vector<TimingSample> local;
  FrameOutput out;
  out.disparity = compute_disparity(frame, config, &local);

  StageClock clock(nullptr);
  double t_refine = 0, t_cloud = 0, t_pillars = 0;
  DepthMap depth =
      clock.time(t_cloud, [&] { return disparity_to_depth(out.disparity, frame.calib, config.min_disparity); });
  if (config.dd_enabled) {
    depth = clock.time(t_refine, [&] { return downsample_direct(depth); });
  }
  out.cloud = clock.time(t_cloud, [&] { return crop_scope(depth_to_cloud(depth, frame.calib), config.scope); });
  if (config.ad_enabled) {
    out.cloud = clock.time(t_refine, [&] { return downsample_adaptive(out.cloud, config.ad); });
  }
  PillarConfig pillar = config.pillar;
  pillar.scope = config.scope;
  out.pillars = clock.time(t_pillars, [&] { return build_pillars(out.cloud, pillar); });

  for (auto& s : local) {
    if (s.stage == "refine") s.ms += t_refine;
  }
  local.push_back({"cloud", t_cloud});
  local.push_back({"pillars", t_pillars});
  if (timings) timings->insert(timings->end(), local.begin(), local.end());
  return out;
}

FrameLayout input_layout(const fs::path& input_dir, const std::string& id) {
  return {input_dir / "image_2" / (id + ".png"), input_dir / "image_3" / (id + ".png"),
          input_dir / "calib" / (id + ".txt")};
}

std::vector<std::string> discover_frames(const fs::path& input_dir) {
  return ids_with_extension(input_dir / "image_2", ".png");
}

RunSummary run_pipeline(const PipelineConfig& config, std::ostream& log) {
  config.validate();
  RunSummary summary;
  const auto frames = resolve_frames(config);
  if (frames.empty()) return summary;

  std::error_code ec;
  if (!fs::is_directory(config.input_dir, ec)) {
    throw Error(ErrorCode::kConfigError, "input directory does not exist: " + config.input_dir.string());
  }
  const fs::path velo_dir = config.output_dir / "velodyne";
  fs::create_directories(velo_dir, ec);
  if (ec) throw Error(ErrorCode::kConfigError, "cannot create " + velo_dir.string());
  if (config.write_ply) fs::create_directories(config.output_dir / "ply");
  if (config.write_pillars) fs::create_directories(config.output_dir / "pillars");
  if (config.write_disparity) fs::create_directories(config.output_dir / "disparity");

  for (const auto& id : frames) {
    try {
      StageClock clock(nullptr);
      double t_io = 0;
      const auto layout = input_layout(config.input_dir, id);
      const StereoFrame frame =
          clock.time(t_io, [&] { return load_stereo_frame(layout.left, layout.right, layout.calib); });
      std::vector<TimingSample> timings;
      const FrameOutput out = process_frame(frame, config, &timings);
      clock.time(t_io, [&] {
        write_velodyne_bin(out.cloud, velo_dir / (id + ".bin"));
        if (config.write_ply) write_ply(out.cloud, config.output_dir / "ply" / (id + ".ply"));
        if (config.write_pillars) {
          write_pillar_dump(out.pillars, config.output_dir / "pillars" / (id + ".txt"));
        }
        if (config.write_disparity) {
          write_disparity_png(out.disparity, config.output_dir / "disparity" / (id + ".png"));
        }
      });
      timings.push_back({"io", t_io});
      summary.timings.insert(summary.timings.end(), timings.begin(), timings.end());
      ++summary.frames_processed;
      summary.points_emitted += out.cloud.size();
    } catch (const std::exception& e) {
      ++summary.frames_failed;
      summary.failures.push_back(id + ": " + e.what());
      log << "frame " << id << " failed: " << e.what() << '\n';
    }
  }
  return summary;
}

std::string EvalReport::to_csv() const {
  std::ostringstream out;
  out << "metric,iou,difficulty,value\n";
  for (const auto& r : rows) {
    out << r.metric << ',';
    if (mode == EvalMode::kDetection) out << r.iou;
    out << ',' << r.difficulty << ',';
    if (r.value) out << *r.value;
    out << '\n';
  }
  return out.str();
}

std::string EvalReport::to_text() const {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(2);
  out << (mode == EvalMode::kStereo ? "stereo" : "detection") << " evaluation over " << frames
      << " frame(s)\n";
  for (const auto& r : rows) {
    out << "  " << r.metric;
    if (mode == EvalMode::kDetection) out << " @IoU=" << r.iou << " " << r.difficulty;
    out << ": ";
    if (r.value) {
      out << *r.value * 100.0 << " %";
    } else {
      out << "n/a";
    }
    out << '\n';
  }
  return out.str();
}

EvalReport run_eval(const PipelineConfig& config, const fs::path& pred_dir, const fs::path& gt_dir,
                    EvalMode mode) {
  EvalReport report;
  report.mode = mode;
  std::error_code ec;
  if (!fs::is_directory(pred_dir, ec) || !fs::is_directory(gt_dir, ec)) {
    throw Error(ErrorCode::kConfigError, "prediction and ground-truth directories must exist");
  }
  const std::vector<std::string> requested =
      (config.frames.size() == 1 && config.frames.front() == "all") ? std::vector<std::string>{}
                                                                   : config.frames;

  if (mode == EvalMode::kStereo) {
    const fs::path pdir = prefer_subdir(pred_dir, "disparity");
    const fs::path noc_dir = gt_dir / "disp_noc_0";
    const fs::path all_dir = gt_dir / "disp_occ_0";
    const auto ids = match_ids(ids_with_extension(pdir, ".png"), ids_with_extension(all_dir, ".png"), requested);
    ThreePixelCounts noc, all;
    for (const auto& id : ids) {
      const DisparityMap pred = to_disparity_map(load_disparity_png(pdir / (id + ".png")));
      const auto a = three_pixel_counts(pred, load_disparity_png(all_dir / (id + ".png"), DisparityRegion::kAll));
      all.bad += a.bad;
      all.total += a.total;
      const fs::path noc_path = noc_dir / (id + ".png");
      if (fs::exists(noc_path)) {
        const auto n = three_pixel_counts(pred, load_disparity_png(noc_path, DisparityRegion::kNoc));
        noc.bad += n.bad;
        noc.total += n.total;
      }
    }
    report.frames = ids.size();
    auto frac = [](const ThreePixelCounts& c) -> std::optional<double> {
      if (c.total == 0) return std::nullopt;
      return static_cast<double>(c.bad) / static_cast<double>(c.total);
    };
    report.rows.push_back({"3px_noc", 0.0, "", frac(noc)});
    report.rows.push_back({"3px_all", 0.0, "", frac(all)});
  } else {
    const fs::path gdir = prefer_subdir(gt_dir, "label_2");
    const fs::path pdir = prefer_subdir(pred_dir, "data");
    const auto gt_ids = ids_with_extension(gdir, ".txt");
    auto pred_ids = ids_with_extension(pdir, ".txt");
    // An empty prediction directory means "no detections anywhere".
    const bool no_predictions = pred_ids.empty();
    const auto ids = match_ids(no_predictions ? gt_ids : pred_ids, gt_ids, requested);

    std::vector<FrameBoxes> frames;
    for (const auto& id : ids) {
      const fs::path calib_path = config.input_dir / "calib" / (id + ".txt");
      CameraCalibration calib;
      if (fs::exists(calib_path)) {
        calib = load_calibration(calib_path);
      } else {
        calib.cam_to_velo = kitti_axes_cam_to_velo();
      }
      FrameBoxes fb;
      for (auto& b : load_labels(gdir / (id + ".txt"), calib)) {
        if (b.category == config.eval_class) fb.ground_truth.push_back(std::move(b));
      }
      if (!no_predictions) {
        for (auto& b : load_labels(pdir / (id + ".txt"), calib)) {
          if (b.category == config.eval_class) fb.detections.push_back(std::move(b));
        }
      }
      frames.push_back(std::move(fb));
    }
    report.frames = ids.size();
    for (IouMetric metric : {IouMetric::kBev, IouMetric::k3d}) {
      for (double iou : {0.5, 0.7}) {
        for (Difficulty d : {Difficulty::kEasy, Difficulty::kModerate, Difficulty::kHard}) {
          const PrCurve curve = average_precision(frames, iou, metric, d, config.eval_interp);
          report.rows.push_back({metric == IouMetric::kBev ? "AP_BEV" : "AP_3D", iou, to_string(d), curve.ap});
        }
      }
    }
  }

  fs::create_directories(config.output_dir, ec);
  const fs::path csv = config.output_dir / (mode == EvalMode::kStereo ? "eval_stereo.csv" : "eval_detection.csv");
  std::ofstream out(csv, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + csv.string());
  out << report.to_csv();
  return report;
}

BenchResult run_bench(const PipelineConfig& config, int repeats, std::ostream& log) {
  if (repeats < 1) throw Error(ErrorCode::kConfigError, "repeats must be >= 1");
  BenchResult result;
  std::vector<TimingSample> samples;
  for (int pass = 0; pass <= repeats; ++pass) {
    RunSummary s = run_pipeline(config, log);
    result.frames_failed += s.frames_failed;
    if (pass == 0) continue;  // warm-up
    samples.insert(samples.end(), s.timings.begin(), s.timings.end());
  }
  result.stats = stage_timer_report(samples);
  std::error_code ec;
  fs::create_directories(config.output_dir, ec);
  std::ofstream csv(config.output_dir / "bench_timing.csv", std::ios::trunc);
  if (!csv) throw Error(ErrorCode::kIoFailure, "cannot write bench_timing.csv");
  csv << format_report_csv(result.stats);
  return result;
}

}  // namespace plidar
