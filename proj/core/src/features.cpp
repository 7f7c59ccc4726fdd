#include "reloc/features.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "reloc/error.hpp"

namespace reloc {

namespace {

constexpr double kMinGradient = 1e-9;
constexpr int kMaxAugmentAttempts = 100;

std::vector<double> luminance(const RgbImage& rgb) {
  std::vector<double> y(static_cast<std::size_t>(rgb.width) * rgb.height);
  for (int v = 0; v < rgb.height; ++v) {
    for (int u = 0; u < rgb.width; ++u) {
      y[static_cast<std::size_t>(v) * rgb.width + u] =
          0.299 * rgb.at(u, v, 0) + 0.587 * rgb.at(u, v, 1) + 0.114 * rgb.at(u, v, 2);
    }
  }
  return y;
}

}  // namespace

std::vector<double> sobel_magnitude(const RgbImage& rgb) {
  const int w = rgb.width;
  const int h = rgb.height;
  std::vector<double> mag(static_cast<std::size_t>(w) * h, 0.0);
  if (w < 3 || h < 3) return mag;
  const auto y = luminance(rgb);
  auto px = [&](int u, int v) { return y[static_cast<std::size_t>(v) * w + u]; };
  for (int v = 1; v < h - 1; ++v) {
    for (int u = 1; u < w - 1; ++u) {
      const double gx = (px(u + 1, v - 1) + 2.0 * px(u + 1, v) + px(u + 1, v + 1)) -
                        (px(u - 1, v - 1) + 2.0 * px(u - 1, v) + px(u - 1, v + 1));
      const double gy = (px(u - 1, v + 1) + 2.0 * px(u, v + 1) + px(u + 1, v + 1)) -
                        (px(u - 1, v - 1) + 2.0 * px(u, v - 1) + px(u + 1, v - 1));
      mag[static_cast<std::size_t>(v) * w + u] = std::sqrt(gx * gx + gy * gy);
    }
  }
  return mag;
}

std::vector<Pixel> select_features(const RgbImage& rgb, int budget, int margin,
                                   std::uint64_t seed, const DepthMap* depth) {
  if (rgb.empty()) throw Error(ErrorCode::InvalidArgument, "select_features needs an image");
  if (depth && (depth->width != rgb.width || depth->height != rgb.height)) {
    throw Error(ErrorCode::ResolutionMismatch, "depth and rgb resolutions differ");
  }
  const auto mag = sobel_magnitude(rgb);

  struct Candidate {
    double magnitude;
    std::uint64_t key;
    Pixel px;
  };
  std::vector<Candidate> candidates;
  std::mt19937_64 rng(seed);
  for (int v = margin; v <= rgb.height - margin; ++v) {
    for (int u = margin; u <= rgb.width - margin; ++u) {
      if (u < 0 || v < 0 || u >= rgb.width || v >= rgb.height) continue;
      const double m = mag[static_cast<std::size_t>(v) * rgb.width + u];
      if (!(m > kMinGradient)) continue;
      if (depth && !depth->valid(u, v)) continue;
      candidates.push_back({m, rng(), {u, v}});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.magnitude != b.magnitude) return a.magnitude > b.magnitude;
    if (a.key != b.key) return a.key < b.key;
    return row_major_less(a.px, b.px);
  });
  const auto keep = std::min<std::size_t>(candidates.size(), std::max(0, budget));
  std::vector<Pixel> out;
  out.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) out.push_back(candidates[i].px);
  std::sort(out.begin(), out.end(), row_major_less);
  return out;
}

std::vector<Pixel> augment_low_texture(std::span<const Pixel> features, int budget,
                                       double center_u, double center_v, int width, int height,
                                       int margin, std::uint64_t seed) {
  if (features.empty()) {
    throw Error(ErrorCode::NoSeedFeatures, "low-texture augmentation needs at least one feature");
  }
  if (static_cast<int>(features.size()) >= budget) {
    return {features.begin(), features.end()};
  }

  auto inside = [&](const Pixel& p) {
    return p.u >= margin && p.u <= width - margin && p.v >= margin && p.v <= height - margin;
  };
  auto cmp = [](const Pixel& a, const Pixel& b) { return row_major_less(a, b); };
  std::set<Pixel, decltype(cmp)> taken(cmp);
  for (const auto& f : features) taken.insert(f);

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick_segment(0, features.size() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Step along the dominant axis in whole pixels and round the other
  // coordinate; the perpendicular offset from the segment is then below 0.5 px.
  auto sample_on_segment = [&](const Pixel& from) -> Pixel {
    const double dx = center_u - from.u;
    const double dy = center_v - from.v;
    const double t = unit(rng);
    if (std::abs(dx) >= std::abs(dy)) {
      if (dx == 0.0) return from;
      const int steps = static_cast<int>(std::floor(std::abs(dx)));
      const int k = std::min(steps, static_cast<int>(std::floor(t * (steps + 1))));
      const int u = from.u + (dx > 0 ? k : -k);
      const double vv = from.v + (u - from.u) * dy / dx;
      return {u, static_cast<int>(std::lround(vv))};
    }
    const int steps = static_cast<int>(std::floor(std::abs(dy)));
    const int k = std::min(steps, static_cast<int>(std::floor(t * (steps + 1))));
    const int v = from.v + (dy > 0 ? k : -k);
    const double uu = from.u + (v - from.v) * dx / dy;
    return {static_cast<int>(std::lround(uu)), v};
  };

  std::vector<Pixel> out(features.begin(), features.end());
  const int missing = budget - static_cast<int>(features.size());
  for (int slot = 0; slot < missing; ++slot) {
    for (int attempt = 0; attempt < kMaxAugmentAttempts; ++attempt) {
      const Pixel p = sample_on_segment(features[pick_segment(rng)]);
      if (!inside(p) || taken.contains(p)) continue;
      taken.insert(p);
      out.push_back(p);
      break;
    }
  }
  std::sort(out.begin(), out.end(), row_major_less);
  return out;
}

std::vector<Patch> extract_patches(const RgbImage& rgb, std::span<const Pixel> features,
                                   int scale) {
  if (scale <= 0 || scale % 2 != 0) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("patch scale {} must be even", scale));
  }
  const int half = scale / 2;
  std::vector<Patch> out;
  out.reserve(features.size());
  for (const auto& f : features) {
    if (f.u - half < 0 || f.v - half < 0 || f.u + half > rgb.width || f.v + half > rgb.height) {
      throw Error(ErrorCode::MarginViolation,
                  fmt::format("feature ({}, {}) too close to the border for a {}x{} patch", f.u,
                              f.v, scale, scale));
    }
    Patch p;
    p.center = f;
    p.scale = scale;
    p.data.resize(static_cast<std::size_t>(scale) * scale * 3);
    std::size_t k = 0;
    for (int v = f.v - half; v < f.v + half; ++v) {
      for (int u = f.u - half; u < f.u + half; ++u) {
        for (int c = 0; c < 3; ++c) p.data[k++] = rgb.at(u, v, c);
      }
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace reloc
