#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "reloc/image.hpp"
#include "reloc/keyframe.hpp"

namespace reloc {

inline constexpr int kDefaultFeatureBudget = 128;

/// Sobel gradient magnitude of the luminance image; zero on the one-pixel border.
[[nodiscard]] std::vector<double> sobel_magnitude(const RgbImage& rgb);

/// Top-`budget` pixels by Sobel magnitude (strictly positive only), ties
/// broken by a seeded random key, restricted to u, v in [margin, size - margin].
/// Pixels with invalid depth are skipped when `depth` is given. Sorted by (v, u).
[[nodiscard]] std::vector<Pixel> select_features(const RgbImage& rgb, int budget, int margin,
                                                 std::uint64_t seed,
                                                 const DepthMap* depth = nullptr);

/// Tops the feature set up to `budget` with points sampled uniformly on the
/// segments from each feature to `center`. Added points stay within half a
/// pixel of their segment, honor the margin, and never duplicate an existing
/// point (100 resampling attempts per slot, then the slot is skipped).
/// Throws NoSeedFeatures when `features` is empty.
[[nodiscard]] std::vector<Pixel> augment_low_texture(std::span<const Pixel> features, int budget,
                                                     double center_u, double center_v,
                                                     int width, int height, int margin,
                                                     std::uint64_t seed);

/// Axis-aligned scale x scale crops spanning [u - scale/2, u + scale/2).
/// Throws MarginViolation if a crop would leave the image.
[[nodiscard]] std::vector<Patch> extract_patches(const RgbImage& rgb,
                                                 std::span<const Pixel> features, int scale);

}  // namespace reloc
