#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "reloc/embedding_graph.hpp"
#include "reloc/gnn.hpp"
#include "reloc/query.hpp"

namespace reloc {

struct GnnTrainConfig {
  int steps = 500;
  double learning_rate = 1e-5;
  double momentum = 0.95;
  double weight_decay = 1e-5;
  double eta = kDefaultEta;
};

struct GnnLossAndGradient {
  double loss = 0.0;
  Eigen::VectorXd gradient;  // GnnParams::flatten() order
};

/// Reference and query graphs both pass through the GNN; the query features
/// then score against the reference via inverse_ce_multiply. Each U row and
/// each label row is normalized to sum one and the loss is the mean row
/// cross-entropy. Rows whose labels are all zero are skipped.
/// labels: Q x N (query nodes x reference nodes), nonnegative.
[[nodiscard]] double gnn_loss(const GnnParams& params, const EmbeddingGraph& reference,
                              const EmbeddingGraph& query, const Eigen::MatrixXd& labels,
                              double eta = kDefaultEta);

[[nodiscard]] GnnLossAndGradient gnn_loss_and_gradient(const GnnParams& params,
                                                       const EmbeddingGraph& reference,
                                                       const EmbeddingGraph& query,
                                                       const Eigen::MatrixXd& labels,
                                                       double eta = kDefaultEta);

/// Row-normalized U for the current parameters (the training prediction).
[[nodiscard]] Eigen::MatrixXd gnn_predicted_distribution(const GnnParams& params,
                                                         const EmbeddingGraph& reference,
                                                         const EmbeddingGraph& query,
                                                         double eta = kDefaultEta);

struct GnnTrainResult {
  GnnParams params;
  std::vector<double> loss_history;  // loss before each step, then the final loss
};

/// Full-batch momentum SGD. Throws NonFiniteLoss, DimMismatch.
[[nodiscard]] GnnTrainResult train_gnn(const GnnParams& initial, const EmbeddingGraph& reference,
                                       const EmbeddingGraph& query, const Eigen::MatrixXd& labels,
                                       const GnnTrainConfig& config = {});

}  // namespace reloc
