#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "reloc/embedding_graph.hpp"

namespace reloc {

enum class Activation { Identity, Relu, Sigmoid };

/// Sigmoid pre-activations are clamped to +-kSigmoidClamp so outputs stay
/// strictly inside (0, 1) in double precision.
inline constexpr double kSigmoidClamp = 30.0;

/// Mean-aggregator SAGE layer:
///   out_i = act(W_self h_i + W_nbr mean_{j in nbr(i)} h_j + bias)
/// Weights are stored out x in.
struct SageLayer {
  Eigen::MatrixXd w_self;
  Eigen::MatrixXd w_nbr;
  Eigen::VectorXd bias;

  [[nodiscard]] int in_dim() const { return static_cast<int>(w_self.cols()); }
  [[nodiscard]] int out_dim() const { return static_cast<int>(w_self.rows()); }
};

/// Undirected neighbor lists without self loops or duplicates.
using Adjacency = std::vector<std::vector<int>>;

/// Throws DanglingEdge.
[[nodiscard]] Adjacency adjacency_from_edges(int n, std::span<const GraphEdge> edges);

/// Row i = mean of the neighbor rows of i (zero for isolated nodes).
[[nodiscard]] Eigen::MatrixXd neighbor_mean(const Eigen::MatrixXd& features,
                                            const Adjacency& adjacency);

[[nodiscard]] double apply_activation(double x, Activation act);

/// features: N x D_in, one row per node. Throws DimMismatch; InvalidArgument
/// for an asymmetric adjacency.
[[nodiscard]] Eigen::MatrixXd sage_layer(const Eigen::MatrixXd& features,
                                         const Adjacency& adjacency, const SageLayer& layer,
                                         Activation activation);

/// Three SAGE layers: ReLU, ReLU, sigmoid.
struct GnnParams {
  std::vector<SageLayer> layers;

  [[nodiscard]] static GnnParams initialize(std::span<const int> dims, std::uint64_t seed);
  [[nodiscard]] static GnnParams initialize(std::uint64_t seed, int dim = 16);
  [[nodiscard]] std::vector<int> dims() const;
  [[nodiscard]] std::size_t parameter_count() const;
  /// Per layer: W_self (row-major), W_nbr, bias.
  [[nodiscard]] Eigen::VectorXd flatten() const;
  void assign(const Eigen::VectorXd& flat);
  [[nodiscard]] bool all_finite() const;
  /// Throws DimMismatch unless layer dims chain.
  void validate() const;
};

[[nodiscard]] Activation layer_activation(std::size_t layer_index, std::size_t layer_count);

/// Aggregated graph used as the relocalization map.
struct ReferenceGraph {
  Eigen::MatrixXd node_features;  // N x D_out, entries in (0, 1)

  [[nodiscard]] int node_count() const { return static_cast<int>(node_features.rows()); }
};

[[nodiscard]] Eigen::MatrixXd gnn_forward(const GnnParams& params,
                                          const Eigen::MatrixXd& node_embeddings,
                                          const Adjacency& adjacency);
/// Throws DimMismatch, InvalidArgument (empty graph).
[[nodiscard]] ReferenceGraph gnn_forward(const GnnParams& params, const EmbeddingGraph& graph);

/// GNN parameter file: "S3EG", version byte, uint32 layer count, uint32 dims
/// (count + 1), then little-endian float32 in flatten() order.
void save_gnn(const std::filesystem::path& path, const GnnParams& params);
[[nodiscard]] GnnParams load_gnn(const std::filesystem::path& path);

}  // namespace reloc
