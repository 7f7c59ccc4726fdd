#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "reloc/keyframe.hpp"
#include "reloc/similarity.hpp"

namespace reloc {

using EmbeddingCode = Eigen::VectorXd;

/// Per-patch MLP followed by mean pooling over patches.
///
///   x  = [patch bytes / 255, u / width, v / height]
///   h1 = relu(W1 x + b1)
///   h2 = relu(W2 h1 + b2)
///   y  = W3 h2 + b3
///   code = mean over patches of y
struct EncoderParams {
  int patch_scale = 16;
  int hidden = 32;
  int dim = 16;

  Eigen::MatrixXd w1, w2, w3;
  Eigen::VectorXd b1, b2, b3;

  [[nodiscard]] int input_dim() const { return 3 * patch_scale * patch_scale + 2; }
  [[nodiscard]] std::size_t parameter_count() const;

  /// Glorot-uniform weights, small nonzero biases, seeded.
  [[nodiscard]] static EncoderParams initialize(int patch_scale, int hidden, int dim,
                                                std::uint64_t seed);

  /// Layer order: W1 (row-major), b1, W2, b2, W3, b3.
  [[nodiscard]] Eigen::VectorXd flatten() const;
  void assign(const Eigen::VectorXd& flat);
  [[nodiscard]] bool all_finite() const;
};

/// Encoder input rows, one per patch, in canonical (v, u) order.
/// Throws EmptyPatchSet, DimMismatch (patch scale differs from `scale`).
[[nodiscard]] Eigen::MatrixXd encoder_input(std::span<const Patch> patches, int image_width,
                                            int image_height, int scale);

[[nodiscard]] EmbeddingCode encode(const EncoderParams& params, const Eigen::MatrixXd& input);
[[nodiscard]] EmbeddingCode encode(const EncoderParams& params, std::span<const Patch> patches,
                                   int image_width, int image_height);

/// Standard cosine in [-1, 1]. Throws ZeroNormEmbedding if either norm <= 1e-12.
[[nodiscard]] double cosine_similarity(const EmbeddingCode& a, const EmbeddingCode& b);
/// (1 + cos) / 2, the encoder's similarity prediction in [0, 1].
[[nodiscard]] double predicted_similarity(const EmbeddingCode& a, const EmbeddingCode& b);

inline constexpr double kShrinkageSteepness = 10.0;
inline constexpr double kShrinkageThreshold = 0.2;

/// l^2 / (1 + exp(a (c - l))), l = |pred - truth|.
[[nodiscard]] double shrinkage_loss(double pred, double truth, double a = kShrinkageSteepness,
                                    double c = kShrinkageThreshold);
/// d loss / d pred.
[[nodiscard]] double shrinkage_loss_grad(double pred, double truth,
                                         double a = kShrinkageSteepness,
                                         double c = kShrinkageThreshold);

/// Encoder parameter file: "S3EP", version byte, uint32 D, H, patch scale,
/// then little-endian float32 in flatten() order.
void save_encoder(const std::filesystem::path& path, const EncoderParams& params);
[[nodiscard]] EncoderParams load_encoder(const std::filesystem::path& path);

struct PairIndex {
  int i = 0;
  int j = 0;
};

struct EncoderTrainConfig {
  int epochs = 200;
  double learning_rate = 1e-3;
  double momentum = 0.95;
  double weight_decay = 1e-5;
  int batch_size = 256;  // pairs per step
  double shrink_a = kShrinkageSteepness;
  double shrink_c = kShrinkageThreshold;
  int hidden = 32;
  int dim = 16;
  std::uint64_t seed = 1;
  int threads = 1;
};

struct EncoderTrainResult {
  EncoderParams params;
  std::vector<double> loss_history;  // mean pair loss per epoch
};

struct LossAndGradient {
  double loss = 0.0;
  Eigen::VectorXd gradient;  // flatten() order
};

/// Mean shrinkage loss over `pairs` and its analytic gradient (no weight decay).
[[nodiscard]] LossAndGradient encoder_loss_and_gradient(const EncoderParams& params,
                                                        std::span<const Eigen::MatrixXd> inputs,
                                                        const SimilarityMatrix& truth,
                                                        std::span<const PairIndex> pairs,
                                                        double shrink_a = kShrinkageSteepness,
                                                        double shrink_c = kShrinkageThreshold,
                                                        int threads = 1);

/// Training pairs for one epoch: all n^2 ordered pairs when n <= 64, else
/// min(n^2, 4096) pairs drawn uniformly.
[[nodiscard]] std::vector<PairIndex> epoch_pairs(int n, std::uint64_t seed);

/// Momentum SGD with L2 weight decay over keyframe pairs. Seed-deterministic.
/// Throws NonFiniteLoss naming the step.
[[nodiscard]] EncoderTrainResult train_encoder(std::span<const Keyframe> keyframes,
                                               int image_width, int image_height,
                                               const SimilarityMatrix& truth,
                                               const EncoderTrainConfig& config);

/// One momentum-SGD update: v = mu v + (g + wd theta); theta -= lr v.
void sgd_momentum_step(Eigen::VectorXd& theta, Eigen::VectorXd& velocity,
                       const Eigen::VectorXd& gradient, double learning_rate, double momentum,
                       double weight_decay);

}  // namespace reloc
