#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <span>
#include <vector>

#include "reloc/encoder.hpp"

namespace reloc {

struct GraphEdge {
  int source = 0;
  int target = 0;
  bool operator==(const GraphEdge&) const = default;
};

/// Pose graph whose nodes carry embedding codes; each edge carries the
/// concatenation [node_source ; node_target].
struct EmbeddingGraph {
  Eigen::MatrixXd node_embeddings;  // N x D, row per node
  std::vector<GraphEdge> edges;
  std::vector<Eigen::VectorXd> edge_embeddings;

  [[nodiscard]] int node_count() const { return static_cast<int>(node_embeddings.rows()); }
  [[nodiscard]] int dim() const { return static_cast<int>(node_embeddings.cols()); }
};

/// Throws DanglingEdge if an edge references a node outside [0, N).
[[nodiscard]] EmbeddingGraph build_embedding_graph(std::span<const EmbeddingCode> codes,
                                                   std::span<const GraphEdge> edges);
[[nodiscard]] EmbeddingGraph build_embedding_graph(const Eigen::MatrixXd& node_embeddings,
                                                   std::span<const GraphEdge> edges);

/// Odometry chain 0-1-2-...-(n-1).
[[nodiscard]] std::vector<GraphEdge> chain_edges(int n);

/// Rows of `codes` as a matrix.
[[nodiscard]] Eigen::MatrixXd stack_codes(std::span<const EmbeddingCode> codes);

/// Embedding dump: one CSV row per keyframe, `id,e0,...,e{D-1}`, 9 significant digits.
void write_embeddings_csv(const std::filesystem::path& path, std::span<const EmbeddingCode> codes);
[[nodiscard]] std::vector<EmbeddingCode> read_embeddings_csv(const std::filesystem::path& path);

}  // namespace reloc
