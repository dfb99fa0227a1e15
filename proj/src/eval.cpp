#include "plidar/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "plidar/error.hpp"

namespace plidar {

ThreePixelCounts three_pixel_counts(const DisparityMap& pred, const DisparityGroundTruth& gt) {
  if (pred.width != gt.width || pred.height != gt.height) {
    throw Error(ErrorCode::kSizeMismatch, "prediction and ground truth differ in size");
  }
  ThreePixelCounts counts;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!pred.valid[i] || !gt.valid[i]) continue;
    ++counts.total;
    if (std::abs(static_cast<double>(pred.disparity[i]) - gt.disparity[i]) > kThreePixelThreshold) {
      ++counts.bad;
    }
  }
  return counts;
}

double three_pixel_error(const DisparityMap& pred, const DisparityGroundTruth& gt) {
  const auto counts = three_pixel_counts(pred, gt);
  if (counts.total == 0) throw Error(ErrorCode::kNoValidPixels, "no jointly valid pixels");
  return static_cast<double>(counts.bad) / static_cast<double>(counts.total);
}

std::array<Vec2, 4> bev_corners(const LabelBox3D& box) {
  const double c = std::cos(box.yaw), s = std::sin(box.yaw);
  const double hl = box.length / 2.0, hw = box.width / 2.0;
  constexpr double kSigns[4][2] = {{1, -1}, {1, 1}, {-1, 1}, {-1, -1}};
  std::array<Vec2, 4> out;
  for (int k = 0; k < 4; ++k) {
    const double lx = kSigns[k][0] * hl, ly = kSigns[k][1] * hw;
    out[k] = {box.center_x + c * lx - s * ly, box.center_y + s * lx + c * ly};
  }
  return out;
}

double polygon_area(std::span<const Vec2> poly) {
  double twice = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % poly.size()];
    twice += a.x * b.y - b.x * a.y;
  }
  return std::abs(twice) / 2.0;
}

Polygon clip_convex(std::span<const Vec2> subject, std::span<const Vec2> clipper) {
  Polygon output(subject.begin(), subject.end());
  for (std::size_t e = 0; e < clipper.size() && !output.empty(); ++e) {
    const Vec2 a = clipper[e];
    const Vec2 b = clipper[(e + 1) % clipper.size()];
    auto side = [&](const Vec2& p) { return (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x); };
    const Polygon input = std::move(output);
    output.clear();
    for (std::size_t i = 0; i < input.size(); ++i) {
      const Vec2& cur = input[i];
      const Vec2& prev = input[(i + input.size() - 1) % input.size()];
      const double sc = side(cur), sp = side(prev);
      if (sc >= 0.0) {
        if (sp < 0.0) {
          const double t = sp / (sp - sc);
          output.push_back({prev.x + t * (cur.x - prev.x), prev.y + t * (cur.y - prev.y)});
        }
        output.push_back(cur);
      } else if (sp >= 0.0) {
        const double t = sp / (sp - sc);
        output.push_back({prev.x + t * (cur.x - prev.x), prev.y + t * (cur.y - prev.y)});
      }
    }
  }
  return output;
}

double bev_intersection_area(const LabelBox3D& a, const LabelBox3D& b) {
  const auto pa = bev_corners(a);
  const auto pb = bev_corners(b);
  const Polygon inter = clip_convex(pa, pb);
  return inter.size() < 3 ? 0.0 : polygon_area(inter);
}

double bev_iou(const LabelBox3D& a, const LabelBox3D& b) {
  const double area_a = a.length * a.width;
  const double area_b = b.length * b.width;
  if (area_a < kAreaEpsilon || area_b < kAreaEpsilon) return 0.0;
  const double inter = bev_intersection_area(a, b);
  const double uni = area_a + area_b - inter;
  if (uni < kAreaEpsilon) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double iou_3d(const LabelBox3D& a, const LabelBox3D& b) {
  const double vol_a = a.length * a.width * a.height;
  const double vol_b = b.length * b.width * b.height;
  if (vol_a < kAreaEpsilon || vol_b < kAreaEpsilon) return 0.0;
  const double top = std::min(a.center_z + a.height / 2.0, b.center_z + b.height / 2.0);
  const double bottom = std::max(a.center_z - a.height / 2.0, b.center_z - b.height / 2.0);
  const double overlap = std::max(0.0, top - bottom);
  if (overlap <= 0.0) return 0.0;
  const double inter = bev_intersection_area(a, b) * overlap;
  const double uni = vol_a + vol_b - inter;
  if (uni < kAreaEpsilon) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double interpolated_ap(std::span<const PrPoint> points, Interpolation interp) {
  const int n = static_cast<int>(interp);
  // Recall sample points: {0, 0.1, ..., 1} for 11-point, {1/40, ..., 1} for 40-point.
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    const double r = interp == Interpolation::k11 ? k / 10.0 : (k + 1) / 40.0;
    double best = 0.0;
    for (const auto& p : points) {
      if (p.recall >= r) best = std::max(best, p.precision);
    }
    sum += best;
  }
  return sum / n;
}

PrCurve average_precision(std::span<const FrameBoxes> frames, double iou_threshold,
                          IouMetric metric, Difficulty difficulty, Interpolation interp) {
  struct Scored {
    double score;
    bool tp;
  };
  std::vector<Scored> pooled;
  std::size_t num_gt = 0;

  for (const auto& frame : frames) {
    std::vector<const LabelBox3D*> gts;
    for (const auto& g : frame.ground_truth) {
      if (g.difficulty != Difficulty::kIgnored && g.difficulty <= difficulty) gts.push_back(&g);
    }
    num_gt += gts.size();

    std::vector<std::size_t> order(frame.detections.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return frame.detections[a].score.value_or(0.0) > frame.detections[b].score.value_or(0.0);
    });

    std::vector<bool> taken(gts.size(), false);
    for (std::size_t k : order) {
      const LabelBox3D& det = frame.detections[k];
      int best = -1;
      double best_iou = -1.0;
      for (std::size_t g = 0; g < gts.size(); ++g) {
        if (taken[g]) continue;
        const double iou = metric == IouMetric::kBev ? bev_iou(det, *gts[g]) : iou_3d(det, *gts[g]);
        if (iou >= iou_threshold && iou > best_iou) {
          best_iou = iou;
          best = static_cast<int>(g);
        }
      }
      if (best >= 0) taken[best] = true;
      pooled.push_back({det.score.value_or(0.0), best >= 0});
    }
  }

  PrCurve curve;
  if (num_gt == 0) return curve;
  std::stable_sort(pooled.begin(), pooled.end(),
                   [](const Scored& a, const Scored& b) { return a.score > b.score; });
  std::size_t tp = 0;
  for (std::size_t i = 0; i < pooled.size(); ++i) {
    tp += pooled[i].tp;
    curve.points.push_back({static_cast<double>(tp) / static_cast<double>(num_gt),
                            static_cast<double>(tp) / static_cast<double>(i + 1)});
  }
  curve.ap = interpolated_ap(curve.points, interp);
  return curve;
}

PrCurve average_precision(const std::vector<LabelBox3D>& detections,
                          const std::vector<LabelBox3D>& ground_truth, double iou_threshold,
                          IouMetric metric, Difficulty difficulty, Interpolation interp) {
  const FrameBoxes frame{detections, ground_truth};
  return average_precision(std::span<const FrameBoxes>(&frame, 1), iou_threshold, metric,
                           difficulty, interp);
}

std::vector<StageStats> stage_timer_report(std::span<const TimingSample> samples) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<double>> by_stage;
  for (const auto& s : samples) {
    auto [it, inserted] = by_stage.try_emplace(s.stage);
    if (inserted) order.push_back(s.stage);
    it->second.push_back(s.ms);
  }
  std::vector<StageStats> report;
  for (const auto& stage : order) {
    auto values = by_stage[stage];
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    StageStats st;
    st.stage = stage;
    st.count = n;
    st.mean_ms = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
    st.median_ms = n % 2 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
    const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(n)));
    st.p95_ms = values[std::max<std::size_t>(rank, 1) - 1];
    report.push_back(std::move(st));
  }
  return report;
}

std::string format_report_text(std::span<const StageStats> report) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(3);
  out << "stage          count    mean_ms  median_ms     p95_ms\n";
  for (const auto& s : report) {
    out.width(12);
    out << std::left << s.stage << std::right;
    out.width(9);
    out << s.count;
    for (double v : {s.mean_ms, s.median_ms, s.p95_ms}) {
      out.width(11);
      out << v;
    }
    out << '\n';
  }
  return out.str();
}

std::string format_report_csv(std::span<const StageStats> report) {
  std::ostringstream out;
  out.precision(6);
  out.setf(std::ios::fixed);
  out << "stage,mean_ms,median_ms,p95_ms\n";
  for (const auto& s : report) {
    out << s.stage << ',' << s.mean_ms << ',' << s.median_ms << ',' << s.p95_ms << '\n';
  }
  return out.str();
}

}  // namespace plidar
