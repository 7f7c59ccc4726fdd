#include "reloc/trajectory_io.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include "reloc/error.hpp"

namespace reloc {

namespace {

// Quaternion whose decoded matrix equals `rotation` bit for bit, searched
// within a few ulps of the direct conversion.
std::optional<Eigen::Vector4d> exact_quaternion(const Pose& pose) {
  const Eigen::Vector4d q0 = pose.quaternion();
  constexpr int kUlps = 2;
  auto step = [](double x, int n) {
    const double dir = n > 0 ? INFINITY : -INFINITY;
    for (int k = 0; k < std::abs(n); ++k) x = std::nextafter(x, dir);
    return x;
  };
  Eigen::Vector4d q;
  for (int a = -kUlps; a <= kUlps; ++a) {
    q[0] = step(q0[0], a);
    for (int b = -kUlps; b <= kUlps; ++b) {
      q[1] = step(q0[1], b);
      for (int c = -kUlps; c <= kUlps; ++c) {
        q[2] = step(q0[2], c);
        for (int d = -kUlps; d <= kUlps; ++d) {
          q[3] = step(q0[3], d);
          if (Pose::from_quaternion(q[0], q[1], q[2], q[3], Vec3::Zero()).rotation == pose.rotation) {
            return q;
          }
        }
      }
    }
  }
  return std::nullopt;
}

}  // namespace

Trajectory parse_tum(const std::string& text, const std::string& source_name) {
  Trajectory out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    double v[8];
    for (double& x : v) {
      if (!(fields >> x)) {
        throw Error(ErrorCode::ParseError,
                    fmt::format("{}:{}: expected 8 numbers `timestamp tx ty tz qx qy qz qw`",
                                source_name, line_no));
      }
    }
    std::string extra;
    if (fields >> extra) {
      throw Error(ErrorCode::ParseError,
                  fmt::format("{}:{}: trailing field '{}'", source_name, line_no, extra));
    }
    try {
      out.push_back({v[0], Pose::from_quaternion(v[4], v[5], v[6], v[7], Vec3(v[1], v[2], v[3]))});
    } catch (const Error&) {
      throw Error(ErrorCode::ParseError,
                  fmt::format("{}:{}: invalid quaternion", source_name, line_no));
    }
  }
  return out;
}

std::string format_tum(const Trajectory& trajectory) {
  std::string out;
  for (const auto& sp : trajectory) {
    const auto q = exact_quaternion(sp.pose).value_or(sp.pose.quaternion());
    const auto& t = sp.pose.translation;
    out += fmt::format("{} {} {} {} {} {} {} {}\n", sp.timestamp, t.x(), t.y(), t.z(), q[0],
                       q[1], q[2], q[3]);
  }
  return out;
}

Trajectory read_tum(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_tum(buf.str(), path.string());
}

void write_tum(const std::filesystem::path& path, const Trajectory& trajectory) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << format_tum(trajectory);
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

Pose canonicalize_rotation(const Pose& pose) {
  // Walk the decode/encode map until the matrix is exactly representable.
  Pose current = pose;
  for (int round = 0; round < 32; ++round) {
    if (exact_quaternion(current)) return current;
    auto q = current.quaternion();
    q[round % 4] = std::nextafter(q[round % 4], round % 8 < 4 ? INFINITY : -INFINITY);
    current = Pose::from_quaternion(q[0], q[1], q[2], q[3], pose.translation);
  }
  throw Error(ErrorCode::InvalidArgument, "rotation has no exact quaternion encoding");
}

std::vector<Pose> poses_of(const Trajectory& trajectory) {
  std::vector<Pose> out;
  out.reserve(trajectory.size());
  for (const auto& sp : trajectory) out.push_back(sp.pose);
  return out;
}

}  // namespace reloc
