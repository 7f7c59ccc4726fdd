#include "reloc/encoder.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "binary_io.hpp"
#include "reloc/error.hpp"

namespace reloc {

std::size_t EncoderParams::parameter_count() const {
  return static_cast<std::size_t>(w1.size() + b1.size() + w2.size() + b2.size() + w3.size() +
                                  b3.size());
}

EncoderParams EncoderParams::initialize(int patch_scale, int hidden, int dim,
                                        std::uint64_t seed) {
  if (patch_scale <= 0 || hidden <= 0 || dim <= 0) {
    throw Error(ErrorCode::InvalidArgument, "encoder dimensions must be positive");
  }
  EncoderParams p;
  p.patch_scale = patch_scale;
  p.hidden = hidden;
  p.dim = dim;
  std::mt19937_64 rng(seed);
  auto glorot = [&](int rows, int cols) {
    const double limit = std::sqrt(6.0 / (rows + cols));
    std::uniform_real_distribution<double> u(-limit, limit);
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) m(r, c) = u(rng);
    return m;
  };
  p.w1 = glorot(hidden, p.input_dim());
  p.w2 = glorot(hidden, hidden);
  p.w3 = glorot(dim, hidden);
  p.b1 = Eigen::VectorXd::Constant(hidden, 0.01);
  p.b2 = Eigen::VectorXd::Constant(hidden, 0.01);
  // Output bias keeps codes away from zero even if every hidden unit is off.
  std::uniform_real_distribution<double> ub(0.05, 0.15);
  p.b3.resize(dim);
  for (int i = 0; i < dim; ++i) p.b3[i] = (i % 2 == 0 ? 1.0 : -1.0) * ub(rng);
  return p;
}

namespace {

template <typename Fn>
void for_each_block(EncoderParams& p, Fn&& fn) {
  fn(p.w1);
  fn(p.b1);
  fn(p.w2);
  fn(p.b2);
  fn(p.w3);
  fn(p.b3);
}

template <typename Fn>
void for_each_block(const EncoderParams& p, Fn&& fn) {
  fn(p.w1);
  fn(p.b1);
  fn(p.w2);
  fn(p.b2);
  fn(p.w3);
  fn(p.b3);
}

template <typename Derived>
void copy_out(const Eigen::MatrixBase<Derived>& m, double* dst) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) *dst++ = m(r, c);
}

template <typename Derived>
void copy_in(Eigen::MatrixBase<Derived>& m, const double* src) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = *src++;
}

}  // namespace

Eigen::VectorXd EncoderParams::flatten() const {
  Eigen::VectorXd flat(static_cast<Eigen::Index>(parameter_count()));
  double* dst = flat.data();
  for_each_block(*this, [&](const auto& m) {
    copy_out(m, dst);
    dst += m.size();
  });
  return flat;
}

void EncoderParams::assign(const Eigen::VectorXd& flat) {
  if (static_cast<std::size_t>(flat.size()) != parameter_count()) {
    throw Error(ErrorCode::DimMismatch, "flat encoder parameter vector has the wrong length");
  }
  const double* src = flat.data();
  for_each_block(*this, [&](auto& m) {
    copy_in(m, src);
    src += m.size();
  });
}

bool EncoderParams::all_finite() const {
  bool ok = true;
  for_each_block(*this, [&](const auto& m) { ok = ok && m.allFinite(); });
  return ok;
}

Eigen::MatrixXd encoder_input(std::span<const Patch> patches, int image_width, int image_height,
                              int scale) {
  if (patches.empty()) throw Error(ErrorCode::EmptyPatchSet, "encoder needs at least one patch");
  std::vector<std::size_t> order(patches.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& pa = patches[a];
    const auto& pb = patches[b];
    if (pa.center != pb.center) return row_major_less(pa.center, pb.center);
    return pa.data < pb.data;
  });

  const int in_dim = 3 * scale * scale + 2;
  Eigen::MatrixXd x(static_cast<Eigen::Index>(patches.size()), in_dim);
  for (std::size_t r = 0; r < order.size(); ++r) {
    const auto& p = patches[order[r]];
    if (p.scale != scale || static_cast<int>(p.data.size()) != 3 * scale * scale) {
      throw Error(ErrorCode::DimMismatch,
                  fmt::format("patch scale {} does not match encoder scale {}", p.scale, scale));
    }
    for (int k = 0; k < in_dim - 2; ++k) x(r, k) = p.data[k] / 255.0;
    x(r, in_dim - 2) = static_cast<double>(p.center.u) / image_width;
    x(r, in_dim - 1) = static_cast<double>(p.center.v) / image_height;
  }
  return x;
}

EmbeddingCode encode(const EncoderParams& params, const Eigen::MatrixXd& input) {
  if (input.rows() == 0) throw Error(ErrorCode::EmptyPatchSet, "encoder needs at least one patch");
  if (input.cols() != params.input_dim()) {
    throw Error(ErrorCode::DimMismatch, "encoder input width does not match parameters");
  }
  const Eigen::MatrixXd h1 =
      ((input * params.w1.transpose()).rowwise() + params.b1.transpose()).cwiseMax(0.0);
  const Eigen::MatrixXd h2 =
      ((h1 * params.w2.transpose()).rowwise() + params.b2.transpose()).cwiseMax(0.0);
  const Eigen::MatrixXd y = (h2 * params.w3.transpose()).rowwise() + params.b3.transpose();
  return y.colwise().mean().transpose();
}

EmbeddingCode encode(const EncoderParams& params, std::span<const Patch> patches,
                     int image_width, int image_height) {
  return encode(params, encoder_input(patches, image_width, image_height, params.patch_scale));
}

double cosine_similarity(const EmbeddingCode& a, const EmbeddingCode& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::DimMismatch, "embedding sizes differ");
  const double na = a.norm();
  const double nb = b.norm();
  if (!(na > 1e-12) || !(nb > 1e-12)) {
    throw Error(ErrorCode::ZeroNormEmbedding, "cosine similarity of a zero-norm embedding");
  }
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

double predicted_similarity(const EmbeddingCode& a, const EmbeddingCode& b) {
  return 0.5 * (1.0 + cosine_similarity(a, b));
}

double shrinkage_loss(double pred, double truth, double a, double c) {
  const double l = std::abs(pred - truth);
  return l * l / (1.0 + std::exp(a * (c - l)));
}

double shrinkage_loss_grad(double pred, double truth, double a, double c) {
  const double diff = pred - truth;
  const double l = std::abs(diff);
  if (l == 0.0) return 0.0;
  const double e = std::exp(a * (c - l));
  const double denom = 1.0 + e;
  const double dl = 2.0 * l / denom + l * l * a * e / (denom * denom);
  return diff > 0.0 ? dl : -dl;
}

void save_encoder(const std::filesystem::path& path, const EncoderParams& params) {
  detail::LittleEndianWriter w;
  w.bytes("S3EP", 4);
  w.u8(1);
  w.u32(static_cast<std::uint32_t>(params.dim));
  w.u32(static_cast<std::uint32_t>(params.hidden));
  w.u32(static_cast<std::uint32_t>(params.patch_scale));
  const Eigen::VectorXd flat = params.flatten();
  for (Eigen::Index i = 0; i < flat.size(); ++i) w.f32(static_cast<float>(flat[i]));
  w.save(path);
}

EncoderParams load_encoder(const std::filesystem::path& path) {
  detail::LittleEndianReader r(path);
  r.expect_magic("S3EP");
  const auto version = r.u8();
  if (version != 1) {
    throw Error(ErrorCode::ParseError, fmt::format("{}: unsupported version {}", r.name(), version));
  }
  const auto dim = static_cast<int>(r.u32());
  const auto hidden = static_cast<int>(r.u32());
  const auto scale = static_cast<int>(r.u32());
  if (dim <= 0 || hidden <= 0 || scale <= 0 || dim > 4096 || hidden > 4096 || scale > 1024) {
    throw Error(ErrorCode::ParseError, r.name() + ": implausible encoder dimensions");
  }
  EncoderParams p;
  p.dim = dim;
  p.hidden = hidden;
  p.patch_scale = scale;
  p.w1.resize(hidden, p.input_dim());
  p.b1.resize(hidden);
  p.w2.resize(hidden, hidden);
  p.b2.resize(hidden);
  p.w3.resize(dim, hidden);
  p.b3.resize(dim);
  Eigen::VectorXd flat(static_cast<Eigen::Index>(p.parameter_count()));
  for (Eigen::Index i = 0; i < flat.size(); ++i) flat[i] = r.f32();
  r.expect_end();
  p.assign(flat);
  return p;
}

}  // namespace reloc
