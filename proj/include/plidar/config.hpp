#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "plidar/costvolume.hpp"
#include "plidar/eval.hpp"
#include "plidar/pillars.hpp"
#include "plidar/pointcloud.hpp"
#include "plidar/refine.hpp"
#include "plidar/sgm.hpp"

namespace plidar {

/// Everything the batch runner needs. Defaults reproduce the SGM + DE + DD
/// system, so an empty config file is a complete configuration.
struct PipelineConfig {
  CensusWindow census;
  int max_disparity = 128;
  SgmParams sgm;
  double min_disparity = kDefaultMinDisparity;

  bool de_enabled = true;
  bool dd_enabled = true;
  bool ad_enabled = false;
  AdaptiveSamplingPolicy ad;

  ScopeCrop scope;
  PillarConfig pillar;

  std::filesystem::path input_dir = ".";
  std::filesystem::path output_dir = "out";
  std::vector<std::string> frames;

  bool write_ply = false;
  bool write_pillars = false;
  bool write_disparity = false;

  std::string eval_class = "Car";
  Interpolation eval_interp = Interpolation::k40;

  int threads = 1;

  /// Throws kConfigError / kInvalidParams on inconsistent settings.
  void validate() const;
};

inline constexpr std::string_view kEnvPrefix = "PLIDAR_";

/// Every recognised dotted key, in documentation order.
std::vector<std::string> config_keys();

/// Sets one dotted key from its textual value. Throws kConfigError for
/// unknown keys or unparsable values.
void set_config_value(PipelineConfig& config, std::string_view key, std::string_view value);

/// `key = value` lines; `#` starts a comment; blank lines ignored.
void apply_config_text(PipelineConfig& config, std::string_view text);
void apply_config_file(PipelineConfig& config, const std::filesystem::path& path);

/// Environment name for a key: PLIDAR_ + upper-case key with '.' -> '_'.
std::string env_name(std::string_view key);

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
void apply_env_overrides(PipelineConfig& config, const EnvLookup& lookup);
void apply_env_overrides(PipelineConfig& config);

/// A comma/whitespace separated id list, or the path of a file with one id per line.
std::vector<std::string> parse_frame_list(std::string_view list);

}  // namespace plidar
