#pragma once

#include <cstdint>
#include <vector>

#include "reloc/image.hpp"

namespace reloc {

struct Pixel {
  int u = 0;
  int v = 0;
  auto operator<=>(const Pixel&) const = default;
};

/// Row-major order used for canonical sorting: (v, u).
[[nodiscard]] inline bool row_major_less(const Pixel& a, const Pixel& b) {
  return a.v != b.v ? a.v < b.v : a.u < b.u;
}

/// Square RGB crop of side `scale`, interleaved bytes.
struct Patch {
  Pixel center;
  int scale = 16;
  std::vector<std::uint8_t> data;
  bool operator==(const Patch&) const = default;
};

struct Keyframe {
  int id = 0;
  double timestamp = 0.0;
  RgbImage rgb;
  DepthMap depth;
  std::vector<Pixel> features;
  std::vector<Patch> patches;
};

}  // namespace reloc
