#include "reloc/image.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <istream>
#include <string>

#include "reloc/error.hpp"

namespace reloc {

long DepthMap::valid_count() const {
  long n = 0;
  for (double d : values) n += d > 0.0 ? 1 : 0;
  return n;
}

void DepthMap::validate() const {
  if (width < 0 || height < 0 ||
      values.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error(ErrorCode::InvalidArgument, "depth map size does not match its resolution");
  }
  for (double d : values) {
    if (!std::isfinite(d) || d < 0.0) {
      throw Error(ErrorCode::InvalidArgument, "depth values must be finite and nonnegative");
    }
  }
}

double quantize_depth_mm(double meters) {
  const double mm = std::round(meters * 1000.0);
  if (mm <= 0.0) return 0.0;
  if (mm > 65535.0) return 0.0;  // beyond sensor range
  return mm / 1000.0;
}

namespace {

struct NetpbmHeader {
  std::string magic;
  int width = 0;
  int height = 0;
  int maxval = 0;
};

int read_header_int(std::istream& in, const std::filesystem::path& path) {
  char c = 0;
  while (in.get(c)) {
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      in.unget();
      break;
    }
  }
  int value = 0;
  if (!(in >> value)) {
    throw Error(ErrorCode::ParseError, "malformed netpbm header in " + path.string());
  }
  return value;
}

NetpbmHeader read_header(std::istream& in, const std::filesystem::path& path) {
  NetpbmHeader h;
  char m[2];
  if (!in.read(m, 2)) throw Error(ErrorCode::ParseError, "empty file " + path.string());
  h.magic.assign(m, 2);
  h.width = read_header_int(in, path);
  h.height = read_header_int(in, path);
  h.maxval = read_header_int(in, path);
  char ws = 0;
  in.get(ws);  // single whitespace before raster
  if (h.width <= 0 || h.height <= 0 || h.maxval <= 0 || h.maxval > 65535) {
    throw Error(ErrorCode::ParseError, "invalid netpbm dimensions in " + path.string());
  }
  return h;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  return out;
}

}  // namespace

DepthMap read_depth_pgm(const std::filesystem::path& path) {
  auto in = open_in(path);
  const auto h = read_header(in, path);
  if (h.magic != "P5" || h.maxval <= 255) {
    throw Error(ErrorCode::ParseError, "expected 16-bit P5 depth image: " + path.string());
  }
  std::vector<unsigned char> raw(static_cast<std::size_t>(h.width) * h.height * 2);
  if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()))) {
    throw Error(ErrorCode::ParseError, "truncated depth raster in " + path.string());
  }
  DepthMap d(h.width, h.height);
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    const unsigned mm = (static_cast<unsigned>(raw[2 * i]) << 8) | raw[2 * i + 1];
    d.values[i] = mm / 1000.0;
  }
  return d;
}

void write_depth_pgm(const std::filesystem::path& path, const DepthMap& depth) {
  auto out = open_out(path);
  out << fmt::format("P5\n{} {}\n65535\n", depth.width, depth.height);
  std::vector<unsigned char> raw(depth.values.size() * 2);
  for (std::size_t i = 0; i < depth.values.size(); ++i) {
    const double mm = std::round(depth.values[i] * 1000.0);
    const unsigned v = mm <= 0.0 ? 0u : mm >= 65535.0 ? 65535u : static_cast<unsigned>(mm);
    raw[2 * i] = static_cast<unsigned char>(v >> 8);
    raw[2 * i + 1] = static_cast<unsigned char>(v & 0xff);
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

RgbImage read_ppm(const std::filesystem::path& path) {
  auto in = open_in(path);
  const auto h = read_header(in, path);
  if (h.magic != "P6" || h.maxval != 255) {
    throw Error(ErrorCode::ParseError, "expected 8-bit P6 image: " + path.string());
  }
  RgbImage img(h.width, h.height);
  if (!in.read(reinterpret_cast<char*>(img.data.data()),
               static_cast<std::streamsize>(img.data.size()))) {
    throw Error(ErrorCode::ParseError, "truncated RGB raster in " + path.string());
  }
  return img;
}

void write_ppm(const std::filesystem::path& path, const RgbImage& image) {
  auto out = open_out(path);
  out << fmt::format("P6\n{} {}\n255\n", image.width, image.height);
  out.write(reinterpret_cast<const char*>(image.data.data()),
            static_cast<std::streamsize>(image.data.size()));
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

void write_pgm8(const std::filesystem::path& path, int width, int height,
                const std::vector<std::uint8_t>& pixels) {
  if (pixels.size() != static_cast<std::size_t>(width) * height) {
    throw Error(ErrorCode::InvalidArgument, "pgm pixel count does not match resolution");
  }
  auto out = open_out(path);
  out << fmt::format("P5\n{} {}\n255\n", width, height);
  out.write(reinterpret_cast<const char*>(pixels.data()),
            static_cast<std::streamsize>(pixels.size()));
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

}  // namespace reloc
