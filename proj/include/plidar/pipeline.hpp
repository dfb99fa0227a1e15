#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "plidar/config.hpp"
#include "plidar/eval.hpp"
#include "plidar/kitti_io.hpp"
#include "plidar/pillars.hpp"

namespace plidar {

/// Fixed stage taxonomy used for latency reporting.
inline constexpr const char* kStageNames[] = {"census", "cost_volume", "sgm",    "refine",
                                              "cloud",  "pillars",     "io"};

struct FrameOutput {
  DisparityMap disparity;  // after LR check and (optional) DE
  PointCloud cloud;        // cropped, sparsified pseudo-lidar
  PillarGrid pillars;
};

/// Stereo matching only: census -> cost volume -> SGM -> WTA -> LR check ->
/// optional DE. Appends stage timings when `timings` is non-null.
DisparityMap compute_disparity(const StereoFrame& frame, const PipelineConfig& config,
                               std::vector<TimingSample>* timings = nullptr);

/// The in-memory per-frame chain (everything except file I/O).
FrameOutput process_frame(const StereoFrame& frame, const PipelineConfig& config,
                          std::vector<TimingSample>* timings = nullptr);

struct FrameLayout {
  std::filesystem::path left, right, calib;
};
FrameLayout input_layout(const std::filesystem::path& input_dir, const std::string& id);

/// Ids with a left image under input_dir/image_2, sorted.
std::vector<std::string> discover_frames(const std::filesystem::path& input_dir);

struct RunSummary {
  std::size_t frames_processed = 0;
  std::size_t frames_failed = 0;
  std::size_t points_emitted = 0;
  std::vector<std::string> failures;  // "id: reason"
  std::vector<TimingSample> timings;

  int exit_code() const { return frames_failed == 0 ? 0 : 1; }
};

/// Processes config.frames; a failing frame is logged to `log` and skipped.
RunSummary run_pipeline(const PipelineConfig& config, std::ostream& log);

enum class EvalMode { kStereo, kDetection };

struct EvalRow {
  std::string metric;      // "3px_noc", "3px_all", "AP_BEV", "AP_3D"
  double iou = 0.0;        // detection only
  std::string difficulty;  // detection only
  std::optional<double> value;
};

struct EvalReport {
  EvalMode mode = EvalMode::kStereo;
  std::size_t frames = 0;
  std::vector<EvalRow> rows;

  std::string to_csv() const;
  std::string to_text() const;
};

/// Stereo: pred_dir holds 16-bit disparity PNGs (or a disparity/ subfolder),
/// gt_dir holds disp_noc_0/ and disp_occ_0/. Detection: KITTI label files in
/// pred_dir and gt_dir (or its label_2/). Writes eval_<mode>.csv to the output dir.
EvalReport run_eval(const PipelineConfig& config, const std::filesystem::path& pred_dir,
                    const std::filesystem::path& gt_dir, EvalMode mode);

struct BenchResult {
  std::vector<StageStats> stats;
  std::size_t frames_failed = 0;  // summed over all passes
};

/// One warm-up pass plus `repeats` timed passes over config.frames. Writes
/// bench_timing.csv to the output dir.
BenchResult run_bench(const PipelineConfig& config, int repeats, std::ostream& log);

}  // namespace plidar
