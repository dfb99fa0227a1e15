#include <doctest.h>

#include <cmath>
#include <random>

#include "plidar/error.hpp"
#include "plidar/refine.hpp"

using namespace plidar;

namespace {

DisparityMap single_pixel(float d) {
  DisparityMap m(1, 1);
  m.set(0, 0, d);
  return m;
}

CostVolume triple_volume(int d, Cost cm, Cost c, Cost cp, int dmax = 32) {
  CostVolume v(1, 1, dmax, CostLayer::kRaw);
  std::fill(v.costs.begin(), v.costs.end(), Cost{20});
  if (d >= 1) v.at(0, 0, d - 1) = cm;
  v.at(0, 0, d) = c;
  if (d + 1 < dmax) v.at(0, 0, d + 1) = cp;
  return v;
}

DepthMap numbered(int w, int h) {
  DepthMap m(w, h);
  for (std::size_t i = 0; i < m.size(); ++i) {
    m.depth[i] = 1.0 + static_cast<double>(i);
    m.valid[i] = i % 3 != 0;
  }
  return m;
}

}  // namespace

TEST_SUITE("refine") {
  TEST_CASE("parabola offsets") {
    CHECK(parabola_offset(4, 2, 4) == 0.0);
    CHECK(parabola_offset(3, 1, 2) == doctest::Approx(1.0 / 6.0));
    CHECK(parabola_offset(5, 5, 5) == 0.0);
    CHECK(parabola_offset(1, 5, 1) == 0.0);  // opens downward
  }

  TEST_CASE("subpixel refinement of single pixels") {
    CHECK(subpixel_refine(single_pixel(10), triple_volume(10, 4, 2, 4)).disparity[0] == 10.0f);
    CHECK(subpixel_refine(single_pixel(10), triple_volume(10, 3, 1, 2)).disparity[0] ==
          doctest::Approx(10.0 + 1.0 / 6.0));
    CHECK(subpixel_refine(single_pixel(10), triple_volume(10, 2, 2, 2)).disparity[0] == 10.0f);
    SUBCASE("range ends keep the integer value") {
      CHECK(subpixel_refine(single_pixel(0), triple_volume(0, 0, 1, 9)).disparity[0] == 0.0f);
      CHECK(subpixel_refine(single_pixel(31), triple_volume(31, 9, 1, 0)).disparity[0] == 31.0f);
    }
    SUBCASE("invalid pixels and mask are untouched") {
      DisparityMap m(1, 1);
      const auto out = subpixel_refine(m, triple_volume(10, 3, 1, 2));
      CHECK(out.valid[0] == 0);
      CHECK(out.disparity[0] == kInvalidDisparity);
    }
    SUBCASE("size mismatch") {
      CHECK_THROWS_AS(subpixel_refine(DisparityMap(2, 1), triple_volume(10, 3, 1, 2)), Error);
    }
  }

  TEST_CASE("strict local minima move by less than half a level") {
    std::mt19937 rng(13);
    for (int i = 0; i < 5000; ++i) {
      const int c = static_cast<int>(rng() % 60);
      const int cm = c + 1 + static_cast<int>(rng() % 60);
      const int cp = c + 1 + static_cast<int>(rng() % 60);
      CHECK(std::abs(parabola_offset(cm, c, cp)) < 0.5);
    }
  }

  TEST_CASE("direct downsampling") {
    SUBCASE("4x4 keeps the even-indexed entries") {
      const DepthMap in = numbered(4, 4);
      const DepthMap out = downsample_direct(in);
      REQUIRE(out.width == 2);
      REQUIRE(out.height == 2);
      CHECK(out.pixel_stride == 2);
      CHECK(out.depth[0] == in.depth[in.index(0, 0)]);
      CHECK(out.depth[1] == in.depth[in.index(2, 0)]);
      CHECK(out.depth[2] == in.depth[in.index(0, 2)]);
      CHECK(out.depth[3] == in.depth[in.index(2, 2)]);
      CHECK(out.valid[1] == in.valid[in.index(2, 0)]);
    }
    SUBCASE("constant map") {
      DepthMap in(6, 4);
      std::fill(in.depth.begin(), in.depth.end(), 7.5);
      std::fill(in.valid.begin(), in.valid.end(), 1);
      const DepthMap out = downsample_direct(in);
      CHECK(out.size() == 6u);
      for (auto v : out.depth) CHECK(v == 7.5);
    }
    SUBCASE("odd sizes round up") {
      const DepthMap out = downsample_direct(numbered(5, 5));
      CHECK(out.width == 3);
      CHECK(out.height == 3);
      CHECK(downsample_direct(numbered(7, 2)).width == 4);
    }
    SUBCASE("empty input") { CHECK_THROWS_AS(downsample_direct(DepthMap()), Error); }
  }

  TEST_CASE("adaptive sampling") {
    PointCloud cloud(2000);
    for (std::size_t i = 0; i < cloud.size(); ++i)
      cloud[i] = {static_cast<float>(i % 60), static_cast<float>(i), 0.f, 1.f};

    SUBCASE("keep all / keep none") {
      AdaptiveSamplingPolicy all{1.0, 1.0};
      CHECK(downsample_adaptive(cloud, all) == cloud);
      AdaptiveSamplingPolicy none{0.0, 0.0};
      CHECK(downsample_adaptive(cloud, none).empty());
      CHECK(downsample_adaptive({}, AdaptiveSamplingPolicy{}).empty());
    }
    SUBCASE("keep probability is clamped and monotone") {
      const AdaptiveSamplingPolicy p;
      CHECK(p.keep_probability(-5) == 0.25);
      CHECK(p.keep_probability(20) == doctest::Approx(0.625));
      CHECK(p.keep_probability(100) == 1.0);
      double prev = 0.0;
      for (double z = -10; z < 80; z += 0.25) {
        CHECK(p.keep_probability(z) >= prev);
        prev = p.keep_probability(z);
      }
    }
    SUBCASE("order preserved, subset, deterministic") {
      AdaptiveSamplingPolicy p;
      p.seed = 99;
      const auto a = downsample_adaptive(cloud, p);
      const auto b = downsample_adaptive(cloud, p);
      CHECK(a == b);
      float last_y = -1.f;
      for (const auto& q : a) {
        CHECK(q.y > last_y);  // y is the original index
        last_y = q.y;
        CHECK(cloud[static_cast<std::size_t>(q.y)] == q);
      }
      p.seed = 100;
      CHECK(downsample_adaptive(cloud, p) != a);
    }
    SUBCASE("policy validation") {
      CHECK_THROWS_AS(downsample_adaptive(cloud, AdaptiveSamplingPolicy{0.8, 0.5}), Error);
      CHECK_THROWS_AS(downsample_adaptive(cloud, AdaptiveSamplingPolicy{0.2, 0.5, 10, 10}), Error);
    }
  }

  TEST_CASE("keyed uniform lies in [0, 1)") {
    double sum = 0;
    for (std::uint64_t i = 0; i < 10000; ++i) {
      const double u = keyed_uniform(42, i);
      CHECK(u >= 0.0);
      CHECK(u < 1.0);
      sum += u;
    }
    CHECK(sum / 10000 == doctest::Approx(0.5).epsilon(0.02));
    CHECK(keyed_uniform(1, 5) == keyed_uniform(1, 5));
    CHECK(keyed_uniform(1, 5) != keyed_uniform(2, 5));
  }
}
