#include "reloc/gnn.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "binary_io.hpp"
#include "reloc/error.hpp"

namespace reloc {

Adjacency adjacency_from_edges(int n, std::span<const GraphEdge> edges) {
  Adjacency adj(static_cast<std::size_t>(std::max(0, n)));
  for (const auto& e : edges) {
    if (e.source < 0 || e.source >= n || e.target < 0 || e.target >= n) {
      throw Error(ErrorCode::DanglingEdge,
                  fmt::format("edge ({}, {}) outside [0, {})", e.source, e.target, n));
    }
    if (e.source == e.target) continue;
    adj[e.source].push_back(e.target);
    adj[e.target].push_back(e.source);
  }
  for (auto& nbrs : adj) {
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
  }
  return adj;
}

Eigen::MatrixXd neighbor_mean(const Eigen::MatrixXd& features, const Adjacency& adjacency) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(features.rows(), features.cols());
  for (std::size_t i = 0; i < adjacency.size(); ++i) {
    const auto& nbrs = adjacency[i];
    if (nbrs.empty()) continue;
    for (int j : nbrs) out.row(static_cast<Eigen::Index>(i)) += features.row(j);
    out.row(static_cast<Eigen::Index>(i)) /= static_cast<double>(nbrs.size());
  }
  return out;
}

double apply_activation(double x, Activation act) {
  switch (act) {
    case Activation::Identity: return x;
    case Activation::Relu: return x > 0.0 ? x : 0.0;
    case Activation::Sigmoid: {
      const double z = std::clamp(x, -kSigmoidClamp, kSigmoidClamp);
      return 1.0 / (1.0 + std::exp(-z));
    }
  }
  return x;
}

Eigen::MatrixXd sage_layer(const Eigen::MatrixXd& features, const Adjacency& adjacency,
                           const SageLayer& layer, Activation activation) {
  if (static_cast<std::size_t>(features.rows()) != adjacency.size()) {
    throw Error(ErrorCode::DimMismatch,
                fmt::format("{} feature rows but adjacency has {} nodes", features.rows(),
                            adjacency.size()));
  }
  if (features.cols() != layer.in_dim() || layer.w_nbr.cols() != layer.in_dim() ||
      layer.w_nbr.rows() != layer.out_dim() || layer.bias.size() != layer.out_dim()) {
    throw Error(ErrorCode::DimMismatch,
                fmt::format("SAGE layer expects {} input features, got {}", layer.in_dim(),
                            features.cols()));
  }
  for (std::size_t i = 0; i < adjacency.size(); ++i) {
    for (int j : adjacency[i]) {
      if (j < 0 || static_cast<std::size_t>(j) >= adjacency.size() ||
          !std::binary_search(adjacency[j].begin(), adjacency[j].end(), static_cast<int>(i))) {
        throw Error(ErrorCode::InvalidArgument, "adjacency must be symmetric and sorted");
      }
    }
  }
  const Eigen::MatrixXd nbr = neighbor_mean(features, adjacency);
  Eigen::MatrixXd z = features * layer.w_self.transpose() + nbr * layer.w_nbr.transpose();
  z.rowwise() += layer.bias.transpose();
  return z.unaryExpr([activation](double x) { return apply_activation(x, activation); });
}

Activation layer_activation(std::size_t layer_index, std::size_t layer_count) {
  return layer_index + 1 == layer_count ? Activation::Sigmoid : Activation::Relu;
}

GnnParams GnnParams::initialize(std::span<const int> dims, std::uint64_t seed) {
  if (dims.size() < 2) throw Error(ErrorCode::DimMismatch, "GNN needs at least one layer");
  GnnParams p;
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int in = dims[l];
    const int out = dims[l + 1];
    if (in <= 0 || out <= 0) throw Error(ErrorCode::DimMismatch, "GNN dims must be positive");
    const double limit = std::sqrt(6.0 / (in + out));
    std::uniform_real_distribution<double> u(-limit, limit);
    SageLayer layer;
    layer.w_self.resize(out, in);
    layer.w_nbr.resize(out, in);
    for (int r = 0; r < out; ++r)
      for (int c = 0; c < in; ++c) layer.w_self(r, c) = u(rng);
    for (int r = 0; r < out; ++r)
      for (int c = 0; c < in; ++c) layer.w_nbr(r, c) = u(rng);
    layer.bias = Eigen::VectorXd::Constant(out, 0.01);
    p.layers.push_back(std::move(layer));
  }
  return p;
}

GnnParams GnnParams::initialize(std::uint64_t seed, int dim) {
  const std::array<int, 4> dims{dim, dim, dim, dim};
  return initialize(dims, seed);
}

std::vector<int> GnnParams::dims() const {
  std::vector<int> d;
  if (layers.empty()) return d;
  d.push_back(layers.front().in_dim());
  for (const auto& l : layers) d.push_back(l.out_dim());
  return d;
}

std::size_t GnnParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) {
    n += static_cast<std::size_t>(l.w_self.size() + l.w_nbr.size() + l.bias.size());
  }
  return n;
}

Eigen::VectorXd GnnParams::flatten() const {
  Eigen::VectorXd flat(static_cast<Eigen::Index>(parameter_count()));
  Eigen::Index k = 0;
  for (const auto& l : layers) {
    for (Eigen::Index r = 0; r < l.w_self.rows(); ++r)
      for (Eigen::Index c = 0; c < l.w_self.cols(); ++c) flat[k++] = l.w_self(r, c);
    for (Eigen::Index r = 0; r < l.w_nbr.rows(); ++r)
      for (Eigen::Index c = 0; c < l.w_nbr.cols(); ++c) flat[k++] = l.w_nbr(r, c);
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) flat[k++] = l.bias[r];
  }
  return flat;
}

void GnnParams::assign(const Eigen::VectorXd& flat) {
  if (static_cast<std::size_t>(flat.size()) != parameter_count()) {
    throw Error(ErrorCode::DimMismatch, "flat GNN parameter vector has the wrong length");
  }
  Eigen::Index k = 0;
  for (auto& l : layers) {
    for (Eigen::Index r = 0; r < l.w_self.rows(); ++r)
      for (Eigen::Index c = 0; c < l.w_self.cols(); ++c) l.w_self(r, c) = flat[k++];
    for (Eigen::Index r = 0; r < l.w_nbr.rows(); ++r)
      for (Eigen::Index c = 0; c < l.w_nbr.cols(); ++c) l.w_nbr(r, c) = flat[k++];
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias[r] = flat[k++];
  }
}

bool GnnParams::all_finite() const {
  for (const auto& l : layers) {
    if (!l.w_self.allFinite() || !l.w_nbr.allFinite() || !l.bias.allFinite()) return false;
  }
  return true;
}

void GnnParams::validate() const {
  if (layers.empty()) throw Error(ErrorCode::DimMismatch, "GNN has no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    if (layer.w_nbr.rows() != layer.w_self.rows() || layer.w_nbr.cols() != layer.w_self.cols() ||
        layer.bias.size() != layer.w_self.rows()) {
      throw Error(ErrorCode::DimMismatch, fmt::format("GNN layer {} has inconsistent shapes", l));
    }
    if (l > 0 && layers[l - 1].out_dim() != layer.in_dim()) {
      throw Error(ErrorCode::DimMismatch,
                  fmt::format("GNN layer {} expects {} inputs but layer {} emits {}", l,
                              layer.in_dim(), l - 1, layers[l - 1].out_dim()));
    }
  }
}

Eigen::MatrixXd gnn_forward(const GnnParams& params, const Eigen::MatrixXd& node_embeddings,
                            const Adjacency& adjacency) {
  params.validate();
  if (node_embeddings.rows() == 0) throw Error(ErrorCode::InvalidArgument, "empty graph");
  Eigen::MatrixXd h = node_embeddings;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    h = sage_layer(h, adjacency, params.layers[l], layer_activation(l, params.layers.size()));
  }
  return h;
}

ReferenceGraph gnn_forward(const GnnParams& params, const EmbeddingGraph& graph) {
  const auto adj = adjacency_from_edges(graph.node_count(), graph.edges);
  return {gnn_forward(params, graph.node_embeddings, adj)};
}

void save_gnn(const std::filesystem::path& path, const GnnParams& params) {
  params.validate();
  detail::LittleEndianWriter w;
  w.bytes("S3EG", 4);
  w.u8(1);
  const auto dims = params.dims();
  w.u32(static_cast<std::uint32_t>(params.layers.size()));
  for (int d : dims) w.u32(static_cast<std::uint32_t>(d));
  const Eigen::VectorXd flat = params.flatten();
  for (Eigen::Index i = 0; i < flat.size(); ++i) w.f32(static_cast<float>(flat[i]));
  w.save(path);
}

GnnParams load_gnn(const std::filesystem::path& path) {
  detail::LittleEndianReader r(path);
  r.expect_magic("S3EG");
  const auto version = r.u8();
  if (version != 1) {
    throw Error(ErrorCode::ParseError, fmt::format("{}: unsupported version {}", r.name(), version));
  }
  const auto count = r.u32();
  if (count == 0 || count > 64) throw Error(ErrorCode::ParseError, r.name() + ": bad layer count");
  std::vector<int> dims;
  for (std::uint32_t i = 0; i <= count; ++i) {
    const auto d = r.u32();
    if (d == 0 || d > 4096) throw Error(ErrorCode::ParseError, r.name() + ": bad layer dim");
    dims.push_back(static_cast<int>(d));
  }
  GnnParams p = GnnParams::initialize(dims, 0);
  Eigen::VectorXd flat(static_cast<Eigen::Index>(p.parameter_count()));
  for (Eigen::Index i = 0; i < flat.size(); ++i) flat[i] = r.f32();
  r.expect_end();
  p.assign(flat);
  return p;
}

}  // namespace reloc
