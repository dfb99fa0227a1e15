#include "plidar/kitti_io.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "plidar/error.hpp"
#include "plidar/png_io.hpp"

namespace plidar {
namespace {

using Mat34 = Eigen::Matrix<double, 3, 4>;

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

bool parse_double(const std::string& s, double& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool parse_int(const std::string& s, int& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

Eigen::Matrix3d nearest_rotation(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0) {
    Eigen::Matrix3d u = svd.matrixU();
    u.col(2) *= -1.0;
    r = u * svd.matrixV().transpose();
  }
  return r;
}

template <typename T>
T byteswap_if_big(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return v;
}

void ensure_stream(const std::ios& s, const std::filesystem::path& path) {
  if (!s) throw Error(ErrorCode::kIoFailure, "write failed: " + path.string());
}

}  // namespace

void CameraCalibration::validate() const {
  if (!(focal_u > 0.0) || !(focal_v > 0.0)) {
    throw Error(ErrorCode::kInvalidParams, "focal lengths must be positive");
  }
  if (!(baseline > 0.0)) throw Error(ErrorCode::kInvalidParams, "baseline must be positive");
  const Eigen::Matrix3d r = rotation();
  const Eigen::Matrix3d err = r * r.transpose() - Eigen::Matrix3d::Identity();
  if (err.cwiseAbs().maxCoeff() > 1e-6) {
    throw Error(ErrorCode::kInvalidParams, "cam_to_velo rotation is not orthonormal");
  }
}

const char* to_string(Difficulty d) {
  switch (d) {
    case Difficulty::kEasy: return "easy";
    case Difficulty::kModerate: return "moderate";
    case Difficulty::kHard: return "hard";
    case Difficulty::kIgnored: return "ignored";
  }
  return "ignored";
}

Difficulty classify_difficulty(double bbox_height, int occlusion, double truncation) {
  constexpr double kMinHeight[] = {40.0, 25.0, 25.0};
  constexpr int kMaxOcclusion[] = {0, 1, 2};
  constexpr double kMaxTruncation[] = {0.15, 0.30, 0.50};
  for (int level = 0; level < 3; ++level) {
    if (bbox_height >= kMinHeight[level] && occlusion <= kMaxOcclusion[level] &&
        truncation <= kMaxTruncation[level]) {
      return static_cast<Difficulty>(level);
    }
  }
  return Difficulty::kIgnored;
}

double wrap_angle(double a) {
  constexpr double kPi = std::numbers::pi;
  a = std::fmod(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  if (a > kPi) a -= 2.0 * kPi;
  return a;
}

LabelBox3D camera_to_velo(const CameraBox& cam, double h, double w, double l,
                          const CameraCalibration& calib) {
  LabelBox3D box;
  box.height = h;
  box.width = w;
  box.length = l;
  // Camera y points down; the label stores the bottom-face center.
  const Eigen::Vector3d center = calib.to_velo(Eigen::Vector3d(cam.x, cam.y - h / 2.0, cam.z));
  box.center_x = center.x();
  box.center_y = center.y();
  box.center_z = center.z();
  const Eigen::Vector3d heading_cam(std::cos(cam.rotation_y), 0.0, -std::sin(cam.rotation_y));
  const Eigen::Vector3d heading = calib.rotation() * heading_cam;
  box.yaw = wrap_angle(std::atan2(heading.y(), heading.x()));
  return box;
}

CameraBox velo_to_camera(const LabelBox3D& box, const CameraCalibration& calib) {
  const Eigen::Vector3d center =
      calib.to_cam(Eigen::Vector3d(box.center_x, box.center_y, box.center_z));
  CameraBox cam;
  cam.x = center.x();
  cam.y = center.y() + box.height / 2.0;
  cam.z = center.z();

  // Exact inverse of the heading map in camera_to_velo: find rotation_y whose
  // rotated heading is parallel to (cos yaw, sin yaw).
  const Eigen::Matrix3d r = calib.rotation();
  const double a = r(0, 0), b = r(0, 2), c = r(1, 0), e = r(1, 2);
  const double sy = std::sin(box.yaw), cy = std::cos(box.yaw);
  double ry = std::atan2(a * sy - c * cy, b * sy - e * cy);
  const double vx = a * std::cos(ry) - b * std::sin(ry);
  const double vy = c * std::cos(ry) - e * std::sin(ry);
  if (vx * cy + vy * sy < 0.0) ry += std::numbers::pi;
  cam.rotation_y = wrap_angle(ry);
  return cam;
}

Eigen::Matrix<double, 3, 4> kitti_axes_cam_to_velo() {
  Mat34 m = Mat34::Zero();
  m(0, 2) = 1.0;   // velo x = cam z
  m(1, 0) = -1.0;  // velo y = -cam x
  m(2, 1) = -1.0;  // velo z = -cam y
  return m;
}

CameraCalibration parse_calibration(std::istream& in) {
  std::map<std::string, std::vector<double>> entries;
  std::string line;
  while (std::getline(in, line)) {
    const auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    std::string key = line.substr(0, colon);
    key.erase(0, key.find_first_not_of(" \t"));
    key.erase(key.find_last_not_of(" \t\r") + 1);
    std::vector<double> values;
    for (const auto& tok : split_ws(line.substr(colon + 1))) {
      double v = 0.0;
      if (!parse_double(tok, v)) {
        throw Error(ErrorCode::kMalformedCalibration, "non-numeric value in " + key);
      }
      values.push_back(v);
    }
    entries[key] = std::move(values);
  }

  auto fetch = [&](std::initializer_list<const char*> keys,
                   std::size_t count) -> const std::vector<double>* {
    for (const char* k : keys) {
      auto it = entries.find(k);
      if (it == entries.end()) continue;
      if (it->second.size() != count) {
        throw Error(ErrorCode::kMalformedCalibration,
                    std::string(k) + " expects " + std::to_string(count) + " values");
      }
      return &it->second;
    }
    return nullptr;
  };

  const auto* p2 = fetch({"P2", "P_rect_02"}, 12);
  const auto* p3 = fetch({"P3", "P_rect_03"}, 12);
  if (!p2 || !p3) throw Error(ErrorCode::kMalformedCalibration, "P2 and P3 are required");
  const auto* r0 = fetch({"R0_rect", "R_rect", "R_rect_00"}, 9);
  const auto* tr = fetch({"Tr_velo_to_cam", "Tr_velo_cam"}, 12);

  const Eigen::Map<const Eigen::Matrix<double, 3, 4, Eigen::RowMajor>> P2(p2->data());
  const Eigen::Map<const Eigen::Matrix<double, 3, 4, Eigen::RowMajor>> P3(p3->data());

  CameraCalibration calib;
  calib.focal_u = P2(0, 0);
  calib.focal_v = P2(1, 1);
  calib.center_u = P2(0, 2);
  calib.center_v = P2(1, 2);
  if (!(calib.focal_u > 0.0) || !(calib.focal_v > 0.0)) {
    throw Error(ErrorCode::kMalformedCalibration, "P2 focal lengths must be positive");
  }
  calib.baseline = (P2(0, 3) - P3(0, 3)) / calib.focal_u;
  if (!(calib.baseline > 0.0)) {
    throw Error(ErrorCode::kMalformedCalibration, "P2/P3 offsets give a non-positive baseline");
  }

  // rect cam2 -> rect cam0 (P2 offset) -> reference cam (R0^T) -> velodyne (Tr^-1).
  Eigen::Matrix4d rect2_to_rect0 = Eigen::Matrix4d::Identity();
  rect2_to_rect0(0, 3) = -P2(0, 3) / calib.focal_u;
  rect2_to_rect0(1, 3) = -P2(1, 3) / calib.focal_v;
  rect2_to_rect0(2, 3) = -P2(2, 3);

  Eigen::Matrix4d rect0_to_ref = Eigen::Matrix4d::Identity();
  if (r0) {
    const Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>> R0(r0->data());
    rect0_to_ref.topLeftCorner<3, 3>() = nearest_rotation(R0).transpose();
  }

  Eigen::Matrix4d velo_to_ref = Eigen::Matrix4d::Identity();
  if (tr) {
    velo_to_ref.topRows<3>() = Eigen::Map<const Eigen::Matrix<double, 3, 4, Eigen::RowMajor>>(tr->data());
  } else {
    velo_to_ref.topLeftCorner<3, 3>() = kitti_axes_cam_to_velo().leftCols<3>().transpose();
  }
  const Eigen::Matrix3d tr_rot = velo_to_ref.topLeftCorner<3, 3>();
  if ((tr_rot * tr_rot.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-2) {
    throw Error(ErrorCode::kMalformedCalibration, "Tr_velo_to_cam is not a rigid transform");
  }
  velo_to_ref.topLeftCorner<3, 3>() = nearest_rotation(tr_rot);

  Eigen::Matrix4d ref_to_velo = Eigen::Matrix4d::Identity();
  const Eigen::Matrix3d rot = velo_to_ref.topLeftCorner<3, 3>();
  ref_to_velo.topLeftCorner<3, 3>() = rot.transpose();
  ref_to_velo.topRightCorner<3, 1>() = -rot.transpose() * velo_to_ref.topRightCorner<3, 1>();

  const Eigen::Matrix4d full = ref_to_velo * rect0_to_ref * rect2_to_rect0;
  calib.cam_to_velo = full.topRows<3>();
  calib.cam_to_velo.leftCols<3>() = nearest_rotation(calib.cam_to_velo.leftCols<3>());
  return calib;
}

CameraCalibration load_calibration(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, path.string());
  return parse_calibration(in);
}

StereoFrame load_stereo_frame(const std::filesystem::path& left_path,
                              const std::filesystem::path& right_path,
                              const std::filesystem::path& calib_path) {
  for (const auto* p : {&left_path, &right_path, &calib_path}) {
    if (!std::filesystem::exists(*p)) throw Error(ErrorCode::kMissingFile, p->string());
  }
  StereoFrame frame;
  frame.left = png::read_gray(left_path);
  frame.right = png::read_gray(right_path);
  if (frame.left.width != frame.right.width || frame.left.height != frame.right.height) {
    throw Error(ErrorCode::kDimensionMismatch,
                "left " + std::to_string(frame.left.width) + "x" + std::to_string(frame.left.height) +
                    " vs right " + std::to_string(frame.right.width) + "x" +
                    std::to_string(frame.right.height));
  }
  frame.calib = load_calibration(calib_path);
  return frame;
}

void write_velodyne_bin(const PointCloud& cloud, const std::filesystem::path& path) {
  std::vector<float> buffer;
  buffer.reserve(cloud.size() * 4);
  for (const auto& p : cloud) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z) ||
        !std::isfinite(p.reflectance)) {
      throw Error(ErrorCode::kInvalidParams, "non-finite point in cloud");
    }
    for (float v : {p.x, p.y, p.z, p.reflectance}) buffer.push_back(byteswap_if_big(v));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  out.write(reinterpret_cast<const char*>(buffer.data()),
            static_cast<std::streamsize>(buffer.size() * sizeof(float)));
  ensure_stream(out, path);
}

PointCloud read_velodyne_bin(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw Error(ErrorCode::kMissingFile, path.string());
  const auto size = static_cast<std::size_t>(in.tellg());
  if (size % 16 != 0) throw Error(ErrorCode::kIoFailure, "bin size not a multiple of 16");
  in.seekg(0);
  std::vector<float> buffer(size / sizeof(float));
  in.read(reinterpret_cast<char*>(buffer.data()), static_cast<std::streamsize>(size));
  if (!in) throw Error(ErrorCode::kIoFailure, "short read: " + path.string());
  PointCloud cloud(size / 16);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    cloud[i] = {byteswap_if_big(buffer[4 * i]), byteswap_if_big(buffer[4 * i + 1]),
                byteswap_if_big(buffer[4 * i + 2]), byteswap_if_big(buffer[4 * i + 3])};
  }
  return cloud;
}

void write_ply(const PointCloud& cloud, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size()
      << "\nproperty float x\nproperty float y\nproperty float z\nend_header\n";
  char buf[64];
  for (const auto& p : cloud) {
    const float xyz[3] = {p.x, p.y, p.z};
    for (int k = 0; k < 3; ++k) {
      auto res = std::to_chars(buf, buf + sizeof(buf), xyz[k]);
      out.write(buf, res.ptr - buf);
      out.put(k == 2 ? '\n' : ' ');
    }
  }
  ensure_stream(out, path);
}

PointCloud read_ply(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, path.string());
  std::string line;
  std::getline(in, line);
  if (line.rfind("ply", 0) != 0) throw Error(ErrorCode::kMalformedLine, "missing ply magic");

  std::size_t count = 0;
  std::vector<std::string> props;
  bool in_vertex = false;
  while (std::getline(in, line)) {
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok[0] == "end_header") break;
    if (tok[0] == "format" && (tok.size() < 2 || tok[1] != "ascii")) {
      throw Error(ErrorCode::kMalformedLine, "only ascii PLY is supported");
    }
    if (tok[0] == "element") {
      in_vertex = tok.size() == 3 && tok[1] == "vertex";
      if (in_vertex) count = std::stoul(tok[2]);
    } else if (tok[0] == "property" && in_vertex && tok.size() >= 3) {
      props.push_back(tok.back());
    }
  }
  auto index_of = [&](std::string_view name) -> int {
    auto it = std::find(props.begin(), props.end(), name);
    return it == props.end() ? -1 : static_cast<int>(it - props.begin());
  };
  const int ix = index_of("x"), iy = index_of("y"), iz = index_of("z");
  int ir = index_of("reflectance");
  if (ir < 0) ir = index_of("intensity");
  if (ix < 0 || iy < 0 || iz < 0) throw Error(ErrorCode::kMalformedLine, "PLY lacks x/y/z");

  PointCloud cloud;
  cloud.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(in, line)) throw Error(ErrorCode::kMalformedLine, "truncated PLY body");
    const auto tok = split_ws(line);
    if (tok.size() < props.size()) throw Error(ErrorCode::kMalformedLine, "short PLY vertex");
    auto get = [&](int k) {
      double v = 0.0;
      if (!parse_double(tok[k], v)) throw Error(ErrorCode::kMalformedLine, "bad PLY value");
      return static_cast<float>(v);
    };
    cloud.push_back({get(ix), get(iy), get(iz), ir >= 0 ? get(ir) : 1.0f});
  }
  return cloud;
}

std::vector<LabelBox3D> parse_labels(std::istream& in, const CameraCalibration& calib) {
  std::vector<LabelBox3D> boxes;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok.size() != 15 && tok.size() != 16) {
      throw Error(ErrorCode::kMalformedLine, "line " + std::to_string(lineno) + ": expected 15 or 16 fields, got " +
                                                 std::to_string(tok.size()));
    }
    double v[15] = {};
    int occlusion = 0;
    for (std::size_t k = 1; k < 15; ++k) {
      const bool ok = k == 2 ? parse_int(tok[k], occlusion) : parse_double(tok[k], v[k]);
      if (!ok) {
        throw Error(ErrorCode::kMalformedLine,
                    "line " + std::to_string(lineno) + ": non-numeric field " + std::to_string(k));
      }
    }
    double score = 0.0;
    if (tok.size() == 16 && !parse_double(tok[15], score)) {
      throw Error(ErrorCode::kMalformedLine, "line " + std::to_string(lineno) + ": non-numeric score");
    }
    const double h = v[8], w = v[9], l = v[10];
    if (!(h > 0.0) || !(w > 0.0) || !(l > 0.0)) {
      throw Error(ErrorCode::kMalformedLine, "line " + std::to_string(lineno) + ": non-positive box size");
    }
    LabelBox3D box = camera_to_velo(CameraBox{v[11], v[12], v[13], v[14]}, h, w, l, calib);
    box.category = tok[0];
    box.truncation = v[1];
    box.occlusion = occlusion;
    box.alpha = v[3];
    std::copy(v + 4, v + 8, box.bbox);
    if (tok.size() == 16) box.score = score;
    box.difficulty = classify_difficulty(box.bbox[3] - box.bbox[1], box.occlusion, box.truncation);
    boxes.push_back(std::move(box));
  }
  return boxes;
}

std::vector<LabelBox3D> load_labels(const std::filesystem::path& path,
                                    const CameraCalibration& calib) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, path.string());
  return parse_labels(in, calib);
}

void write_labels(const std::vector<LabelBox3D>& boxes, const CameraCalibration& calib,
                  const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  out.precision(10);
  for (const auto& b : boxes) {
    const CameraBox cam = velo_to_camera(b, calib);
    out << b.category << ' ' << b.truncation << ' ' << b.occlusion << ' ' << b.alpha << ' '
        << b.bbox[0] << ' ' << b.bbox[1] << ' ' << b.bbox[2] << ' ' << b.bbox[3] << ' '
        << b.height << ' ' << b.width << ' ' << b.length << ' ' << cam.x << ' ' << cam.y << ' '
        << cam.z << ' ' << cam.rotation_y;
    if (b.score) out << ' ' << *b.score;
    out << '\n';
  }
  ensure_stream(out, path);
}

DisparityGroundTruth load_disparity_png(const std::filesystem::path& path,
                                        DisparityRegion region) {
  const png::RawImage raw = png::read(path);
  if (raw.channels != 1 || raw.bit_depth != 16) {
    throw Error(ErrorCode::kIoFailure, "disparity PNG must be 16-bit grayscale: " + path.string());
  }
  DisparityGroundTruth gt;
  gt.width = raw.width;
  gt.height = raw.height;
  gt.region = region;
  gt.disparity.resize(raw.samples.size());
  gt.valid.resize(raw.samples.size());
  for (std::size_t i = 0; i < raw.samples.size(); ++i) {
    const std::uint16_t v = raw.samples[i];
    gt.valid[i] = v != 0;
    gt.disparity[i] = v != 0 ? static_cast<float>(v / 256.0) : 0.0f;
  }
  return gt;
}

void write_disparity_png(const DisparityMap& disp, const std::filesystem::path& path) {
  std::vector<std::uint16_t> values(disp.size(), 0);
  for (std::size_t i = 0; i < disp.size(); ++i) {
    if (!disp.valid[i]) continue;
    const long v = std::lround(static_cast<double>(disp.disparity[i]) * 256.0);
    // A valid zero disparity would alias the invalid marker.
    values[i] = static_cast<std::uint16_t>(std::clamp<long>(v, 1, 65535));
  }
  png::write_gray16(path, disp.width, disp.height, values);
}

}  // namespace plidar
