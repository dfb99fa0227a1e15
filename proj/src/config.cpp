#include "plidar/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "plidar/error.hpp"

namespace plidar {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw Error(ErrorCode::kConfigError,
              "invalid value '" + std::string(value) + "' for " + std::string(key));
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v);
  return out;
}

template <typename Int>
Int to_int(std::string_view key, std::string_view v) {
  Int out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v);
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  std::string s(v);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "1" || s == "true" || s == "on" || s == "yes") return true;
  if (s == "0" || s == "false" || s == "off" || s == "no") return false;
  bad_value(key, v);
}

using Setter = std::function<void(PipelineConfig&, std::string_view key, std::string_view value)>;

struct KeySpec {
  const char* name;
  Setter set;
};

Setter real(double PipelineConfig::*field) {
  return [field](PipelineConfig& c, std::string_view k, std::string_view v) { c.*field = to_double(k, v); };
}

template <typename Member>
Setter nested_real(Member get) {
  return [get](PipelineConfig& c, std::string_view k, std::string_view v) { get(c) = to_double(k, v); };
}

template <typename Member>
Setter nested_int(Member get) {
  return [get](PipelineConfig& c, std::string_view k, std::string_view v) { get(c) = to_int<int>(k, v); };
}

Setter flag(bool PipelineConfig::*field) {
  return [field](PipelineConfig& c, std::string_view k, std::string_view v) { c.*field = to_bool(k, v); };
}

template <typename Member>
Setter scope_real(Member get) {
  // The pillar grid always shares the point-cloud scope.
  return [get](PipelineConfig& c, std::string_view k, std::string_view v) {
    get(c.scope) = to_double(k, v);
    get(c.pillar.scope) = to_double(k, v);
  };
}

const std::vector<KeySpec>& registry() {
  static const std::vector<KeySpec> specs = {
      {"census.width", nested_int([](PipelineConfig& c) -> int& { return c.census.width; })},
      {"census.height", nested_int([](PipelineConfig& c) -> int& { return c.census.height; })},
      {"stereo.max_disparity", nested_int([](PipelineConfig& c) -> int& { return c.max_disparity; })},
      {"sgm.p1", nested_int([](PipelineConfig& c) -> int& { return c.sgm.p1; })},
      {"sgm.p2", nested_int([](PipelineConfig& c) -> int& { return c.sgm.p2; })},
      {"sgm.paths", nested_int([](PipelineConfig& c) -> int& { return c.sgm.num_paths; })},
      {"sgm.lr_threshold", nested_real([](PipelineConfig& c) -> double& { return c.sgm.lr_threshold; })},
      {"depth.min_disparity", real(&PipelineConfig::min_disparity)},
      {"de.enabled", flag(&PipelineConfig::de_enabled)},
      {"dd.enabled", flag(&PipelineConfig::dd_enabled)},
      {"ad.enabled", flag(&PipelineConfig::ad_enabled)},
      {"ad.near_keep_prob", nested_real([](PipelineConfig& c) -> double& { return c.ad.near_keep_prob; })},
      {"ad.far_keep_prob", nested_real([](PipelineConfig& c) -> double& { return c.ad.far_keep_prob; })},
      {"ad.z_near", nested_real([](PipelineConfig& c) -> double& { return c.ad.z_near; })},
      {"ad.z_far", nested_real([](PipelineConfig& c) -> double& { return c.ad.z_far; })},
      {"ad.seed",
       [](PipelineConfig& c, std::string_view k, std::string_view v) { c.ad.seed = to_int<std::uint64_t>(k, v); }},
      {"scope.x_min", scope_real([](ScopeCrop& s) -> double& { return s.x_min; })},
      {"scope.x_max", scope_real([](ScopeCrop& s) -> double& { return s.x_max; })},
      {"scope.y_min", scope_real([](ScopeCrop& s) -> double& { return s.y_min; })},
      {"scope.y_max", scope_real([](ScopeCrop& s) -> double& { return s.y_max; })},
      {"scope.z_min", scope_real([](ScopeCrop& s) -> double& { return s.z_min; })},
      {"scope.z_max", scope_real([](ScopeCrop& s) -> double& { return s.z_max; })},
      {"pillar.size_x", nested_real([](PipelineConfig& c) -> double& { return c.pillar.pillar_x; })},
      {"pillar.size_y", nested_real([](PipelineConfig& c) -> double& { return c.pillar.pillar_y; })},
      {"pillar.size_z", nested_real([](PipelineConfig& c) -> double& { return c.pillar.pillar_z; })},
      {"pillar.max_points", nested_int([](PipelineConfig& c) -> int& { return c.pillar.max_points_per_pillar; })},
      {"pillar.max_pillars", nested_int([](PipelineConfig& c) -> int& { return c.pillar.max_pillars; })},
      {"pillar.random_truncation",
       [](PipelineConfig& c, std::string_view k, std::string_view v) { c.pillar.random_truncation = to_bool(k, v); }},
      {"pillar.seed",
       [](PipelineConfig& c, std::string_view k, std::string_view v) { c.pillar.seed = to_int<std::uint64_t>(k, v); }},
      {"io.input_dir", [](PipelineConfig& c, std::string_view, std::string_view v) { c.input_dir = std::string(v); }},
      {"io.output_dir", [](PipelineConfig& c, std::string_view, std::string_view v) { c.output_dir = std::string(v); }},
      {"io.frames", [](PipelineConfig& c, std::string_view, std::string_view v) { c.frames = parse_frame_list(v); }},
      {"output.ply", flag(&PipelineConfig::write_ply)},
      {"output.pillars", flag(&PipelineConfig::write_pillars)},
      {"output.disparity", flag(&PipelineConfig::write_disparity)},
      {"eval.class", [](PipelineConfig& c, std::string_view, std::string_view v) { c.eval_class = std::string(v); }},
      {"eval.interp",
       [](PipelineConfig& c, std::string_view k, std::string_view v) {
         const int n = to_int<int>(k, v);
         if (n != 11 && n != 40) bad_value(k, v);
         c.eval_interp = static_cast<Interpolation>(n);
       }},
      {"run.threads", nested_int([](PipelineConfig& c) -> int& { return c.threads; })},
  };
  return specs;
}

}  // namespace

void PipelineConfig::validate() const {
  if (max_disparity < 2) throw Error(ErrorCode::kConfigError, "stereo.max_disparity must be >= 2");
  if (census.width < 1 || census.height < 1 || census.width % 2 == 0 || census.height % 2 == 0 ||
      census.bits() > 63) {
    throw Error(ErrorCode::kConfigError, "census window must be odd with at most 63 bits");
  }
  if (threads < 0) throw Error(ErrorCode::kConfigError, "run.threads must be >= 0");
  if (!(min_disparity >= 0.0)) throw Error(ErrorCode::kConfigError, "depth.min_disparity must be >= 0");
  try {
    sgm.validate();
    ad.validate();
    scope.validate();
    pillar.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfigError, e.what());
  }
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& s : registry()) keys.emplace_back(s.name);
  return keys;
}

void set_config_value(PipelineConfig& config, std::string_view key, std::string_view value) {
  for (const auto& s : registry()) {
    if (key == s.name) {
      s.set(config, key, trim(value));
      return;
    }
  }
  throw Error(ErrorCode::kConfigError, "unknown config key '" + std::string(key) + "'");
}

void apply_config_text(PipelineConfig& config, std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kConfigError, "line " + std::to_string(lineno) + ": expected key = value");
    }
    set_config_value(config, trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
  }
}

void apply_config_file(PipelineConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfigError, "cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  apply_config_text(config, ss.str());
}

std::string env_name(std::string_view key) {
  std::string out(kEnvPrefix);
  for (char c : key) {
    out.push_back(c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  return out;
}

void apply_env_overrides(PipelineConfig& config, const EnvLookup& lookup) {
  for (const auto& s : registry()) {
    if (auto v = lookup(env_name(s.name))) s.set(config, s.name, trim(*v));
  }
}

void apply_env_overrides(PipelineConfig& config) {
  apply_env_overrides(config, [](const std::string& name) -> std::optional<std::string> {
    if (const char* v = std::getenv(name.c_str())) return std::string(v);
    return std::nullopt;
  });
}

std::vector<std::string> parse_frame_list(std::string_view list) {
  std::vector<std::string> ids;
  const std::string s = trim(list);
  if (s.empty()) return ids;
  std::error_code ec;
  if (std::filesystem::is_regular_file(s, ec)) {
    std::ifstream in(s);
    std::string line;
    while (std::getline(in, line)) {
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      const std::string id = trim(line);
      if (!id.empty()) ids.push_back(id);
    }
    return ids;
  }
  std::string cur;
  for (char c : s) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) ids.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) ids.push_back(cur);
  return ids;
}

}  // namespace plidar
