#include "grio/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace grio {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kImuHeader = "t,ax,ay,az,wx,wy,wz";
constexpr std::string_view kScanHeader = "t,x,y,z,doppler,intensity";

void strip_cr(std::string& line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
}

std::vector<double> parse_row(const std::string& line, std::size_t expected, const fs::path& file,
                              int line_no) {
  std::vector<double> values;
  values.reserve(expected);
  std::size_t pos = 0;
  while (pos <= line.size()) {
    const std::size_t comma = std::min(line.find(',', pos), line.size());
    std::string field = line.substr(pos, comma - pos);
    field.erase(0, field.find_first_not_of(' '));
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size() ||
        !std::isfinite(v)) {
      throw DatasetError(fmt::format("{}:{}: malformed value '{}'", file.string(), line_no, field));
    }
    values.push_back(v);
    pos = comma + 1;
  }
  if (values.size() != expected) {
    throw DatasetError(fmt::format("{}:{}: expected {} columns, found {}", file.string(), line_no,
                                   expected, values.size()));
  }
  return values;
}

std::ifstream open_or_throw(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError(fmt::format("{}: file not found or unreadable", path.string()));
  return in;
}

void expect_header(std::ifstream& in, std::string_view header, const fs::path& file) {
  std::string line;
  if (!std::getline(in, line)) {
    throw DatasetError(fmt::format("{}:1: missing header '{}'", file.string(), header));
  }
  strip_cr(line);
  if (line != header) {
    throw DatasetError(
        fmt::format("{}:1: expected header '{}', found '{}'", file.string(), header, line));
  }
}

std::vector<ImuSample> load_imu(const fs::path& file) {
  auto in = open_or_throw(file);
  expect_header(in, kImuHeader, file);
  std::vector<ImuSample> imu;
  std::string line;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto v = parse_row(line, 7, file, line_no);
    if (!imu.empty() && !(v[0] > imu.back().timestamp)) {
      throw DatasetError(fmt::format("{}:{}: timestamp {} is not after the previous sample ({})",
                                     file.string(), line_no, v[0], imu.back().timestamp));
    }
    imu.push_back({v[0], Vec3(v[1], v[2], v[3]), Vec3(v[4], v[5], v[6])});
  }
  return imu;
}

}  // namespace

RadarScan load_scan_file(const fs::path& file, double doppler_sign) {
  RadarScan scan;
  std::ifstream in(file);
  if (!in) throw DatasetError(fmt::format("{}: file not readable", file.string()));
  if (in.peek() == std::ifstream::traits_type::eof()) {
    scan.empty_file = true;
    return scan;
  }
  expect_header(in, kScanHeader, file);
  std::string line;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto v = parse_row(line, 6, file, line_no);
    if (scan.points.empty()) scan.timestamp = v[0];
    RadarPoint p;
    p.position = Vec3(v[1], v[2], v[3]);
    p.doppler = doppler_sign * v[4];
    p.intensity = v[5];
    if (p.position.isZero(0.0)) {
      throw DatasetError(fmt::format("{}:{}: point at the sensor origin", file.string(), line_no));
    }
    scan.points.push_back(p);
  }
  scan.empty_file = scan.points.empty();
  return scan;
}

namespace {

Mat3 load_calib(const fs::path& file) {
  auto in = open_or_throw(file);
  std::vector<double> values;
  double v;
  while (in >> v) values.push_back(v);
  if (!in.eof() || values.size() != 9) {
    throw DatasetError(fmt::format("{}: expected 9 numbers (row-major 3x3 rotation)", file.string()));
  }
  Mat3 R;
  R << values[0], values[1], values[2], values[3], values[4], values[5], values[6], values[7],
      values[8];
  if (!(R * R.transpose()).isApprox(Mat3::Identity(), 1e-6) || R.determinant() < 0.0) {
    throw DatasetError(fmt::format("{}: matrix is not a rotation", file.string()));
  }
  return R;
}

}  // namespace

Dataset load_dataset(const fs::path& root, double doppler_sign) {
  if (!fs::is_directory(root)) {
    throw DatasetError(fmt::format("{}: dataset directory not found", root.string()));
  }
  Dataset ds;
  ds.imu = load_imu(root / "imu.csv");
  ds.radar_to_body = load_calib(root / "calib.txt");

  const fs::path scan_dir = root / "scans";
  if (!fs::is_directory(scan_dir)) {
    throw DatasetError(fmt::format("{}: scans directory not found", scan_dir.string()));
  }
  std::vector<std::pair<long long, fs::path>> files;
  for (const auto& entry : fs::directory_iterator(scan_dir)) {
    if (entry.path().extension() != ".csv") continue;
    const std::string stem = entry.path().stem().string();
    long long index = 0;
    const auto [ptr, ec] = std::from_chars(stem.data(), stem.data() + stem.size(), index);
    if (ec != std::errc() || ptr != stem.data() + stem.size()) {
      throw DatasetError(fmt::format("{}: scan file name is not an integer index",
                                     entry.path().string()));
    }
    files.emplace_back(index, entry.path());
  }
  std::sort(files.begin(), files.end());

  const RadarScan* previous = nullptr;
  std::string previous_file;
  ds.scans.reserve(files.size());
  for (const auto& [index, path] : files) {
    ds.scans.push_back(load_scan_file(path, doppler_sign));
    const RadarScan& scan = ds.scans.back();
    if (scan.empty_file) {
      spdlog::warn("{}: scan has no points", path.string());
      continue;
    }
    if (previous && !(scan.timestamp > previous->timestamp)) {
      throw DatasetError(fmt::format("{}:2: scan timestamp {} is not after {} ({})", path.string(),
                                     scan.timestamp, previous->timestamp, previous_file));
    }
    previous = &ds.scans.back();
    previous_file = path.string();
  }

  if (const fs::path gt = root / "groundtruth.txt"; fs::exists(gt)) {
    try {
      ds.groundtruth = read_trajectory(gt);
    } catch (const std::runtime_error& e) {
      throw DatasetError(e.what());
    }
  }
  return ds;
}

void write_dataset(const Dataset& dataset, const fs::path& root) {
  fs::create_directories(root / "scans");
  auto open = [](const fs::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw DatasetError(fmt::format("{}: cannot open for writing", p.string()));
    return out;
  };

  {
    auto out = open(root / "imu.csv");
    out << kImuHeader << '\n';
    for (const ImuSample& s : dataset.imu) {
      out << fmt::format("{:.9f},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g}\n", s.timestamp,
                         s.accel.x(), s.accel.y(), s.accel.z(), s.gyro.x(), s.gyro.y(), s.gyro.z());
    }
  }
  {
    auto out = open(root / "calib.txt");
    const Mat3& R = dataset.radar_to_body;
    for (int r = 0; r < 3; ++r) {
      out << fmt::format("{:.17g} {:.17g} {:.17g}\n", R(r, 0), R(r, 1), R(r, 2));
    }
  }
  for (std::size_t i = 0; i < dataset.scans.size(); ++i) {
    const RadarScan& scan = dataset.scans[i];
    auto out = open(root / "scans" / fmt::format("{:06d}.csv", i));
    if (scan.points.empty()) continue;
    out << kScanHeader << '\n';
    for (const RadarPoint& p : scan.points) {
      out << fmt::format("{:.9f},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g}\n", scan.timestamp,
                         p.position.x(), p.position.y(), p.position.z(), p.doppler, p.intensity);
    }
  }
  if (dataset.groundtruth) write_trajectory(*dataset.groundtruth, root / "groundtruth.txt");
}

}  // namespace grio
