#include "reloc/g2o_io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "reloc/error.hpp"

namespace reloc {

namespace {

std::string pose_fields(const Pose& p) {
  const auto q = p.quaternion();
  const auto& t = p.translation;
  return fmt::format("{} {} {} {} {} {} {}", t.x(), t.y(), t.z(), q[0], q[1], q[2], q[3]);
}

Pose read_pose(std::istringstream& fields, const std::string& where) {
  double v[7];
  for (double& x : v) {
    if (!(fields >> x)) throw Error(ErrorCode::ParseError, where + ": expected 7 pose numbers");
  }
  try {
    return Pose::from_quaternion(v[3], v[4], v[5], v[6], Vec3(v[0], v[1], v[2]));
  } catch (const Error&) {
    throw Error(ErrorCode::ParseError, where + ": invalid quaternion");
  }
}

}  // namespace

std::string format_g2o(const PoseGraphProblem& problem) {
  problem.validate();
  std::string out;
  for (std::size_t k = 0; k < problem.poses.size(); ++k) {
    out += fmt::format("VERTEX_SE3:QUAT {} {}\n", k, pose_fields(problem.poses[k]));
  }
  for (const auto& e : problem.edges) {
    out += fmt::format("EDGE_SE3:QUAT {} {} {}", e.i, e.j, pose_fields(e.measured.inverse()));
    for (int r = 0; r < 6; ++r)
      for (int c = r; c < 6; ++c) out += fmt::format(" {}", r == c ? e.info_scale : 0.0);
    out += '\n';
  }
  out += fmt::format("FIX {}\n", problem.anchor);
  return out;
}

PoseGraphProblem parse_g2o(const std::string& text, const std::string& source_name) {
  std::map<int, Pose> vertices;
  PoseGraphProblem p;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool fixed = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = fmt::format("{}:{}", source_name, line_no);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    std::string tag;
    fields >> tag;
    if (tag == "VERTEX_SE3:QUAT") {
      int id = 0;
      if (!(fields >> id) || id < 0) throw Error(ErrorCode::ParseError, where + ": bad vertex id");
      if (vertices.count(id)) throw Error(ErrorCode::ParseError, where + ": duplicate vertex");
      vertices[id] = read_pose(fields, where);
    } else if (tag == "EDGE_SE3:QUAT") {
      PoseEdge e;
      if (!(fields >> e.i >> e.j)) throw Error(ErrorCode::ParseError, where + ": bad edge ids");
      e.measured = read_pose(fields, where).inverse();
      double info[21];
      for (double& x : info) {
        if (!(fields >> x)) throw Error(ErrorCode::ParseError, where + ": expected 21 information entries");
      }
      int k = 0;
      for (int r = 0; r < 6; ++r) {
        for (int c = r; c < 6; ++c, ++k) {
          const bool ok = r == c ? info[k] == info[0] : info[k] == 0.0;
          if (!ok) {
            throw Error(ErrorCode::ParseError,
                        where + ": only isotropic information matrices are supported");
          }
        }
      }
      e.info_scale = info[0];
      p.edges.push_back(e);
    } else if (tag == "FIX") {
      if (!(fields >> p.anchor)) throw Error(ErrorCode::ParseError, where + ": bad FIX line");
      fixed = true;
    } else {
      throw Error(ErrorCode::ParseError, where + ": unknown record '" + tag + "'");
    }
    std::string extra;
    if (fields >> extra) throw Error(ErrorCode::ParseError, where + ": trailing field '" + extra + "'");
  }
  int expected = 0;
  for (const auto& [id, pose] : vertices) {
    if (id != expected++) {
      throw Error(ErrorCode::ParseError,
                  fmt::format("{}: vertex ids must be 0..N-1 without gaps", source_name));
    }
    p.poses.push_back(pose);
  }
  if (!fixed) p.anchor = 0;
  p.validate();
  return p;
}

void write_g2o(const std::filesystem::path& path, const PoseGraphProblem& problem) {
  const std::string text = format_g2o(problem);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

PoseGraphProblem read_g2o(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_g2o(buf.str(), path.string());
}

}  // namespace reloc
