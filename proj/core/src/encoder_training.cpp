#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "reloc/encoder.hpp"
#include "reloc/error.hpp"
#include "reloc/parallel.hpp"

namespace reloc {

namespace {

struct ForwardCache {
  Eigen::MatrixXd z1, h1, z2, h2;
  EmbeddingCode code;
};

ForwardCache forward(const EncoderParams& p, const Eigen::MatrixXd& x) {
  ForwardCache c;
  c.z1 = (x * p.w1.transpose()).rowwise() + p.b1.transpose();
  c.h1 = c.z1.cwiseMax(0.0);
  c.z2 = (c.h1 * p.w2.transpose()).rowwise() + p.b2.transpose();
  c.h2 = c.z2.cwiseMax(0.0);
  const Eigen::MatrixXd y = (c.h2 * p.w3.transpose()).rowwise() + p.b3.transpose();
  c.code = y.colwise().mean().transpose();
  return c;
}

/// Gradient of the flat parameter vector given d loss / d code.
Eigen::VectorXd backward(const EncoderParams& p, const Eigen::MatrixXd& x,
                         const ForwardCache& c, const Eigen::VectorXd& dcode) {
  const double inv_p = 1.0 / static_cast<double>(x.rows());
  // Every patch row receives dcode / P.
  const Eigen::RowVectorXd dy = dcode.transpose() * inv_p;
  EncoderParams g;
  g.patch_scale = p.patch_scale;
  g.hidden = p.hidden;
  g.dim = p.dim;
  g.w3 = dcode * (c.h2.colwise().mean());
  g.b3 = dcode;
  const Eigen::RowVectorXd dh2_row = dy * p.w3;
  Eigen::MatrixXd dz2 = (c.z2.array() > 0.0).cast<double>().matrix();
  dz2.array().rowwise() *= dh2_row.array();
  g.w2 = dz2.transpose() * c.h1;
  g.b2 = dz2.colwise().sum().transpose();
  Eigen::MatrixXd dz1 = dz2 * p.w2;
  dz1.array() *= (c.z1.array() > 0.0).cast<double>();
  g.w1 = dz1.transpose() * x;
  g.b1 = dz1.colwise().sum().transpose();
  return g.flatten();
}

/// d s / d a for s = (1 + cos(a, b)) / 2.
Eigen::VectorXd similarity_grad(const EmbeddingCode& a, const EmbeddingCode& b, double cosine) {
  const double na = a.norm();
  const double nb = b.norm();
  return 0.5 * (b / (na * nb) - cosine * a / (na * na));
}

}  // namespace

LossAndGradient encoder_loss_and_gradient(const EncoderParams& params,
                                          std::span<const Eigen::MatrixXd> inputs,
                                          const SimilarityMatrix& truth,
                                          std::span<const PairIndex> pairs, double shrink_a,
                                          double shrink_c, int threads) {
  const int n = static_cast<int>(inputs.size());
  if (truth.n != n) throw Error(ErrorCode::DimMismatch, "similarity matrix size != keyframe count");
  LossAndGradient out;
  out.gradient = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(params.parameter_count()));
  if (pairs.empty()) return out;

  std::vector<char> used(n, 0);
  for (const auto& pr : pairs) {
    if (pr.i < 0 || pr.i >= n || pr.j < 0 || pr.j >= n) {
      throw Error(ErrorCode::IndexOutOfRange, "training pair references a missing keyframe");
    }
    used[pr.i] = used[pr.j] = 1;
  }
  std::vector<int> active;
  for (int k = 0; k < n; ++k)
    if (used[k]) active.push_back(k);

  std::vector<ForwardCache> cache(n);
  parallel_for(active.size(), threads,
               [&](std::size_t a) { cache[active[a]] = forward(params, inputs[active[a]]); });

  std::vector<Eigen::VectorXd> dcode(n, Eigen::VectorXd::Zero(params.dim));
  const double scale = 1.0 / static_cast<double>(pairs.size());
  double loss = 0.0;
  for (const auto& pr : pairs) {
    const auto& a = cache[pr.i].code;
    const auto& b = cache[pr.j].code;
    const double cosine = cosine_similarity(a, b);
    const double s = 0.5 * (1.0 + cosine);
    const double t = truth.at(pr.i, pr.j);
    loss += shrinkage_loss(s, t, shrink_a, shrink_c);
    const double dl = shrinkage_loss_grad(s, t, shrink_a, shrink_c) * scale;
    if (dl == 0.0) continue;
    if (pr.i == pr.j) continue;  // cos(a, a) is constant
    dcode[pr.i] += dl * similarity_grad(a, b, cosine);
    dcode[pr.j] += dl * similarity_grad(b, a, cosine);
  }
  out.loss = loss * scale;

  std::vector<Eigen::VectorXd> partial(active.size());
  parallel_for(active.size(), threads, [&](std::size_t a) {
    const int k = active[a];
    partial[a] = backward(params, inputs[k], cache[k], dcode[k]);
  });
  for (const auto& g : partial) out.gradient += g;
  return out;
}

std::vector<PairIndex> epoch_pairs(int n, std::uint64_t seed) {
  std::vector<PairIndex> pairs;
  if (n <= 64) {
    pairs.reserve(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) pairs.push_back({i, j});
    return pairs;
  }
  const long total = std::min<long>(static_cast<long>(n) * n, 4096);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, n - 1);
  pairs.reserve(total);
  for (long k = 0; k < total; ++k) pairs.push_back({pick(rng), pick(rng)});
  return pairs;
}

void sgd_momentum_step(Eigen::VectorXd& theta, Eigen::VectorXd& velocity,
                       const Eigen::VectorXd& gradient, double learning_rate, double momentum,
                       double weight_decay) {
  velocity = momentum * velocity + gradient + weight_decay * theta;
  theta -= learning_rate * velocity;
}

EncoderTrainResult train_encoder(std::span<const Keyframe> keyframes, int image_width,
                                 int image_height, const SimilarityMatrix& truth,
                                 const EncoderTrainConfig& config) {
  const int n = static_cast<int>(keyframes.size());
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "encoder training needs at least 2 keyframes");
  if (truth.n != n) throw Error(ErrorCode::DimMismatch, "similarity matrix size != keyframe count");
  if (keyframes.front().patches.empty()) {
    throw Error(ErrorCode::EmptyPatchSet, "keyframe 0 has no patches");
  }
  const int scale = keyframes.front().patches.front().scale;

  std::vector<Eigen::MatrixXd> inputs(n);
  for (int k = 0; k < n; ++k) {
    inputs[k] = encoder_input(keyframes[k].patches, image_width, image_height, scale);
  }

  EncoderTrainResult result;
  result.params = EncoderParams::initialize(scale, config.hidden, config.dim, config.seed);
  Eigen::VectorXd theta = result.params.flatten();
  Eigen::VectorXd velocity = Eigen::VectorXd::Zero(theta.size());
  std::mt19937_64 shuffle_rng(config.seed ^ 0x5eedULL);
  const int batch = std::max(1, config.batch_size);

  long step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    auto pairs = epoch_pairs(n, config.seed + 7919ULL * static_cast<std::uint64_t>(epoch));
    std::shuffle(pairs.begin(), pairs.end(), shuffle_rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < pairs.size(); start += batch) {
      const std::size_t count = std::min<std::size_t>(batch, pairs.size() - start);
      const std::span<const PairIndex> chunk(pairs.data() + start, count);
      result.params.assign(theta);
      const auto lg = encoder_loss_and_gradient(result.params, inputs, truth, chunk,
                                                config.shrink_a, config.shrink_c, config.threads);
      if (!std::isfinite(lg.loss) || !lg.gradient.allFinite()) {
        throw Error(ErrorCode::NonFiniteLoss,
                    fmt::format("encoder training diverged at step {} (epoch {})", step, epoch));
      }
      epoch_loss += lg.loss * static_cast<double>(count);
      sgd_momentum_step(theta, velocity, lg.gradient, config.learning_rate, config.momentum,
                        config.weight_decay);
      if (!theta.allFinite()) {
        throw Error(ErrorCode::NonFiniteLoss,
                    fmt::format("encoder parameters became non-finite at step {}", step));
      }
      ++step;
    }
    result.loss_history.push_back(epoch_loss / static_cast<double>(pairs.size()));
  }
  result.params.assign(theta);
  return result;
}

}  // namespace reloc
