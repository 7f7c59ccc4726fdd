#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace reloc {

/// 8-bit RGB image, row-major, interleaved channels.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0) {}

  [[nodiscard]] std::uint8_t at(int u, int v, int c) const {
    return data[(static_cast<std::size_t>(v) * width + u) * 3 + c];
  }
  std::uint8_t& at(int u, int v, int c) {
    return data[(static_cast<std::size_t>(v) * width + u) * 3 + c];
  }
  [[nodiscard]] bool empty() const { return width <= 0 || height <= 0; }
  bool operator==(const RgbImage&) const = default;
};

/// Depth in meters, row-major. 0 marks an invalid pixel.
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  DepthMap() = default;
  DepthMap(int w, int h) : width(w), height(h), values(static_cast<std::size_t>(w) * h, 0.0) {}

  [[nodiscard]] double at(int u, int v) const {
    return values[static_cast<std::size_t>(v) * width + u];
  }
  double& at(int u, int v) { return values[static_cast<std::size_t>(v) * width + u]; }
  [[nodiscard]] bool valid(int u, int v) const { return at(u, v) > 0.0; }
  [[nodiscard]] long valid_count() const;
  /// Throws InvalidArgument on non-finite or negative values or a size mismatch.
  void validate() const;
  bool operator==(const DepthMap&) const = default;
};

/// Sensor-style quantization to whole millimeters (what a 16-bit depth PGM stores).
[[nodiscard]] double quantize_depth_mm(double meters);

// Netpbm IO. Depth uses 16-bit big-endian P5 in millimeters.
[[nodiscard]] DepthMap read_depth_pgm(const std::filesystem::path& path);
void write_depth_pgm(const std::filesystem::path& path, const DepthMap& depth);
[[nodiscard]] RgbImage read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const RgbImage& image);
/// 8-bit grayscale P5.
void write_pgm8(const std::filesystem::path& path, int width, int height,
                const std::vector<std::uint8_t>& pixels);

}  // namespace reloc
