#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "reloc/gnn.hpp"

namespace reloc {

inline constexpr double kDefaultEta = 1e-3;
/// Reference entries are clamped to [kLogClamp, 1] before the logarithm.
inline constexpr double kLogClamp = 1e-7;
inline constexpr int kDefaultQueryWindow = 5;
inline constexpr double kDefaultScorePercentile = 0.9;

/// U_ij = 1 / (eta - sum_k q_ik log m_kj), with m clamped to [kLogClamp, 1].
/// q: Q x K, nonnegative. m: K x N. Throws NonPositiveEta, DimMismatch,
/// InvalidArgument (negative q entry).
[[nodiscard]] Eigen::MatrixXd inverse_ce_multiply(const Eigen::MatrixXd& q,
                                                  const Eigen::MatrixXd& m, double eta);

/// K x N reference matrix: column j is node j's feature vector normalized
/// to sum to one, so each column is a distribution over embedding dims and
/// the cross-entropy against a query row is minimized by an identical node.
[[nodiscard]] Eigen::MatrixXd reference_matrix(const Eigen::MatrixXd& node_features);

struct Match {
  int query = 0;      // row in the query window (or keyframe id once mapped)
  int reference = 0;  // reference node (or keyframe id once mapped)
  double score = 0.0;
  bool operator==(const Match&) const = default;
};

struct QueryResult {
  Eigen::MatrixXd similarity;  // U, Q x N
  std::vector<Match> matches;  // sorted by score, descending
};

struct QueryOptions {
  double eta = kDefaultEta;
  /// Absolute score threshold; when unset the percentile of U is used.
  std::optional<double> threshold;
  double percentile = kDefaultScorePercentile;
};

/// Linear-interpolated percentile, p in [0, 1]. Throws InvalidArgument if empty.
[[nodiscard]] double percentile(std::vector<double> values, double p);

/// Runs the GNN over a window of successive keyframe embeddings (W x D)
/// linked by chain edges. Throws EmptyWindow.
[[nodiscard]] Eigen::MatrixXd encode_query_window(const GnnParams& params,
                                                  const Eigen::MatrixXd& window_embeddings);

/// Scores already-aggregated query features (W x K) against the reference
/// graph, keeps each row's argmax if it clears the threshold.
[[nodiscard]] QueryResult match_query_features(const ReferenceGraph& reference,
                                               const Eigen::MatrixXd& query_features,
                                               const QueryOptions& options = {});

/// encode_query_window followed by match_query_features.
[[nodiscard]] QueryResult query_subgraph(const GnnParams& params, const ReferenceGraph& reference,
                                         const Eigen::MatrixXd& window_embeddings,
                                         const QueryOptions& options = {});

/// CSV `query_idx,ref_idx,score`.
void write_matches_csv(const std::filesystem::path& path, std::span<const Match> matches);
[[nodiscard]] std::vector<Match> read_matches_csv(const std::filesystem::path& path);

}  // namespace reloc
