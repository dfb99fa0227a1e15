#include "plidar/cli.hpp"

#include <CLI11.hpp>

#include <ostream>
#include <string>
#include <vector>

#include "plidar/config.hpp"
#include "plidar/error.hpp"
#include "plidar/pipeline.hpp"

namespace plidar {
namespace {

struct CliOptions {
  std::string config_path;
  std::string frames;
  std::string out_dir;
  std::string input_dir;
  std::string de;
  std::string sparsing;
  double pillar_size = 0.0;
  int threads = -1;
  long long seed = -1;
  std::vector<std::string> overrides;
};

PipelineConfig build_config(const CliOptions& o) {
  PipelineConfig config;
  if (!o.config_path.empty()) apply_config_file(config, o.config_path);
  apply_env_overrides(config);
  if (!o.input_dir.empty()) config.input_dir = o.input_dir;
  if (!o.out_dir.empty()) config.output_dir = o.out_dir;
  if (!o.frames.empty()) config.frames = parse_frame_list(o.frames);
  if (!o.de.empty()) config.de_enabled = o.de == "on";
  if (o.sparsing == "none") {
    config.dd_enabled = config.ad_enabled = false;
  } else if (o.sparsing == "dd") {
    config.dd_enabled = true;
    config.ad_enabled = false;
  } else if (o.sparsing == "ad") {
    config.dd_enabled = false;
    config.ad_enabled = true;
  }
  if (o.pillar_size > 0.0) config.pillar.pillar_x = config.pillar.pillar_y = o.pillar_size;
  if (o.threads >= 0) config.threads = o.threads;
  if (o.seed >= 0) config.ad.seed = config.pillar.seed = static_cast<std::uint64_t>(o.seed);
  for (const auto& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::kConfigError, "--set expects key=value");
    set_config_value(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  config.validate();
  return config;
}

void print_summary(const RunSummary& s, std::ostream& out) {
  out << "frames processed: " << s.frames_processed << '\n'
      << "frames failed:    " << s.frames_failed << '\n'
      << "points emitted:   " << s.points_emitted << '\n';
  if (!s.timings.empty()) out << format_report_text(stage_timer_report(s.timings));
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Classical pseudo-lidar front end: SGM stereo, refinement, pillars, metrics"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "plidar 1.0");

  CliOptions opts;
  app.add_option("--config", opts.config_path, "key = value config file")->check(CLI::ExistingFile);
  app.add_option("--frames", opts.frames, "comma-separated ids, a file with one id per line, or 'all'");
  app.add_option("--out", opts.out_dir, "output directory");
  app.add_option("--input", opts.input_dir, "KITTI-layout input directory (image_2, image_3, calib)");
  app.add_option("--de", opts.de, "sub-pixel de-smoothing")->check(CLI::IsMember({"on", "off"}));
  app.add_option("--sparsing", opts.sparsing, "point sparsification")->check(CLI::IsMember({"none", "dd", "ad"}));
  app.add_option("--pillar-size", opts.pillar_size, "BEV pillar edge length (m)")->check(CLI::PositiveNumber);
  app.add_option("--threads", opts.threads, "worker threads (0 = hardware)")->check(CLI::NonNegativeNumber);
  app.add_option("--seed", opts.seed, "seed for adaptive sampling / random truncation")->check(CLI::NonNegativeNumber);
  app.add_option("--set", opts.overrides, "override any config key (key=value), repeatable");
  app.fallthrough();

  auto* run = app.add_subcommand("run", "run the pipeline over the frame list");

  auto* eval = app.add_subcommand("eval", "evaluate stereo or detection results");
  std::string pred_dir, gt_dir, mode = "stereo";
  eval->add_option("--pred", pred_dir, "prediction directory")->required();
  eval->add_option("--gt", gt_dir, "ground-truth directory")->required();
  eval->add_option("--mode", mode, "stereo | detection")->check(CLI::IsMember({"stereo", "detection"}));

  auto* bench = app.add_subcommand("bench", "time each pipeline stage");
  int repeats = 5;
  bench->add_option("--repeats", repeats, "timed repeats after one warm-up")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    out << e.what() << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  }

  PipelineConfig config;
  try {
    config = build_config(opts);
  } catch (const Error& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  }

  try {
    if (run->parsed()) {
      const RunSummary summary = run_pipeline(config, err);
      print_summary(summary, out);
      return summary.exit_code();
    }
    if (eval->parsed()) {
      const EvalReport report =
          run_eval(config, pred_dir, gt_dir, mode == "stereo" ? EvalMode::kStereo : EvalMode::kDetection);
      out << report.to_text();
      return kExitOk;
    }
    if (bench->parsed()) {
      const BenchResult result = run_bench(config, repeats, err);
      out << format_report_text(result.stats);
      return result.frames_failed == 0 ? kExitOk : kExitPartialFailure;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::kConfigError ? kExitConfigError : kExitPartialFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitPartialFailure;
  }
  return kExitConfigError;
}

}  // namespace plidar
