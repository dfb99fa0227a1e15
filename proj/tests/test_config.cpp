#include <doctest.h>

#include <fstream>
#include <map>

#include "plidar/config.hpp"
#include "plidar/error.hpp"
#include "support/synthetic.hpp"

using namespace plidar;

TEST_SUITE("config") {
  TEST_CASE("defaults form a valid configuration") {
    const PipelineConfig c;
    CHECK_NOTHROW(c.validate());
    CHECK(c.de_enabled);
    CHECK(c.dd_enabled);
    CHECK_FALSE(c.ad_enabled);
    CHECK(c.sgm.p1 == 10);
    CHECK(c.sgm.p2 == 120);
    CHECK(c.pillar.pillar_x == 0.12);
    CHECK(c.eval_interp == Interpolation::k40);
  }

  TEST_CASE("every key is settable") {
    const std::map<std::string, std::string> sample = {
        {"census.width", "7"},          {"census.height", "7"},        {"stereo.max_disparity", "64"},
        {"sgm.p1", "8"},                {"sgm.p2", "96"},              {"sgm.paths", "4"},
        {"sgm.lr_threshold", "2"},      {"depth.min_disparity", "1"},  {"de.enabled", "off"},
        {"dd.enabled", "false"},        {"ad.enabled", "yes"},         {"ad.near_keep_prob", "0.3"},
        {"ad.far_keep_prob", "0.9"},    {"ad.z_near", "5"},            {"ad.z_far", "50"},
        {"ad.seed", "7"},               {"scope.x_min", "1"},          {"scope.x_max", "60"},
        {"scope.y_min", "-30"},         {"scope.y_max", "30"},         {"scope.z_min", "-2"},
        {"scope.z_max", "1.5"},         {"pillar.size_x", "0.16"},     {"pillar.size_y", "0.16"},
        {"pillar.size_z", "4"},         {"pillar.max_points", "64"},   {"pillar.max_pillars", "9000"},
        {"pillar.random_truncation", "1"}, {"pillar.seed", "3"},       {"io.input_dir", "/data"},
        {"io.output_dir", "/tmp/o"},    {"io.frames", "000001,000002"}, {"output.ply", "true"},
        {"output.pillars", "on"},       {"output.disparity", "1"},     {"eval.class", "Pedestrian"},
        {"eval.interp", "11"},          {"run.threads", "2"},
    };
    PipelineConfig c;
    for (const auto& key : config_keys()) {
      INFO(key);
      REQUIRE(sample.count(key) == 1);
      CHECK_NOTHROW(set_config_value(c, key, sample.at(key)));
    }
    CHECK(sample.size() == config_keys().size());
    CHECK_NOTHROW(c.validate());
    CHECK(c.census.width == 7);
    CHECK(c.sgm.num_paths == 4);
    CHECK_FALSE(c.de_enabled);
    CHECK(c.ad_enabled);
    CHECK(c.ad.seed == 7u);
    CHECK(c.scope.x_max == 60.0);
    CHECK(c.pillar.scope.x_max == 60.0);
    CHECK(c.frames == std::vector<std::string>{"000001", "000002"});
    CHECK(c.eval_interp == Interpolation::k11);
    CHECK(c.input_dir == "/data");
  }

  TEST_CASE("bad keys and values") {
    PipelineConfig c;
    CHECK_THROWS_AS(set_config_value(c, "sgm.p3", "1"), Error);
    CHECK_THROWS_AS(set_config_value(c, "sgm.p1", "ten"), Error);
    CHECK_THROWS_AS(set_config_value(c, "de.enabled", "maybe"), Error);
    CHECK_THROWS_AS(set_config_value(c, "eval.interp", "20"), Error);
    CHECK_THROWS_AS(apply_config_text(c, "sgm.p1 10\n"), Error);
    try {
      set_config_value(c, "nope", "1");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kConfigError);
    }
    PipelineConfig bad;
    bad.sgm.p1 = 200;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = {};
    bad.census = {9, 9};
    CHECK_THROWS_AS(bad.validate(), Error);
  }

  TEST_CASE("config text and file") {
    PipelineConfig c;
    apply_config_text(c, "# comment\n\n  sgm.p1 = 12   # trailing\nde.enabled=off\n");
    CHECK(c.sgm.p1 == 12);
    CHECK_FALSE(c.de_enabled);
    const auto dir = testing::scratch_dir("config_file");
    std::ofstream(dir / "c.cfg") << "stereo.max_disparity = 96\n";
    apply_config_file(c, dir / "c.cfg");
    CHECK(c.max_disparity == 96);
    CHECK_THROWS_AS(apply_config_file(c, dir / "missing.cfg"), Error);
  }

  TEST_CASE("environment overrides") {
    CHECK(env_name("sgm.p1") == "PLIDAR_SGM_P1");
    CHECK(env_name("ad.near_keep_prob") == "PLIDAR_AD_NEAR_KEEP_PROB");
    PipelineConfig c;
    apply_env_overrides(c, [](const std::string& name) -> std::optional<std::string> {
      if (name == "PLIDAR_SGM_P2") return "150";
      if (name == "PLIDAR_DD_ENABLED") return "off";
      return std::nullopt;
    });
    CHECK(c.sgm.p2 == 150);
    CHECK_FALSE(c.dd_enabled);
  }

  TEST_CASE("frame lists") {
    CHECK(parse_frame_list("").empty());
    CHECK(parse_frame_list("1, 2 ,3") == std::vector<std::string>{"1", "2", "3"});
    CHECK(parse_frame_list("all") == std::vector<std::string>{"all"});
    const auto dir = testing::scratch_dir("frame_list");
    std::ofstream(dir / "ids.txt") << "000010\n# skip\n\n000011\n";
    CHECK(parse_frame_list((dir / "ids.txt").string()) == std::vector<std::string>{"000010", "000011"});
  }
}
