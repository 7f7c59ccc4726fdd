#include "reloc/gnn_training.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "reloc/encoder.hpp"
#include "reloc/error.hpp"

namespace reloc {

namespace {

struct LayerCache {
  Eigen::MatrixXd input;  // H_l
  Eigen::MatrixXd nbr;    // mean neighbor rows of H_l
  Eigen::MatrixXd z;      // pre-activation
};

struct GraphForward {
  Adjacency adj;
  std::vector<LayerCache> layers;
  Eigen::MatrixXd output;
};

GraphForward forward(const GnnParams& p, const EmbeddingGraph& g) {
  GraphForward f;
  f.adj = adjacency_from_edges(g.node_count(), g.edges);
  Eigen::MatrixXd h = g.node_embeddings;
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const auto& layer = p.layers[l];
    if (h.cols() != layer.in_dim()) {
      throw Error(ErrorCode::DimMismatch,
                  fmt::format("GNN layer {} expects {} inputs, got {}", l, layer.in_dim(), h.cols()));
    }
    LayerCache c;
    c.input = h;
    c.nbr = neighbor_mean(h, f.adj);
    c.z = h * layer.w_self.transpose() + c.nbr * layer.w_nbr.transpose();
    c.z.rowwise() += layer.bias.transpose();
    const Activation act = layer_activation(l, p.layers.size());
    h = c.z.unaryExpr([act](double x) { return apply_activation(x, act); });
    f.layers.push_back(std::move(c));
  }
  f.output = h;
  return f;
}

double activation_grad(double z, double out, Activation act) {
  switch (act) {
    case Activation::Identity: return 1.0;
    case Activation::Relu: return z > 0.0 ? 1.0 : 0.0;
    case Activation::Sigmoid:
      return std::abs(z) > kSigmoidClamp ? 0.0 : out * (1.0 - out);
  }
  return 1.0;
}

/// Accumulates d loss / d params into `grad` (flatten order) given d loss / d output.
void backward(const GnnParams& p, const GraphForward& f, Eigen::MatrixXd d_out,
              std::vector<SageLayer>& grad) {
  const std::size_t count = p.layers.size();
  Eigen::MatrixXd h_next = f.output;
  for (std::size_t step = 0; step < count; ++step) {
    const std::size_t l = count - 1 - step;
    const auto& c = f.layers[l];
    const auto& layer = p.layers[l];
    const Activation act = layer_activation(l, count);
    Eigen::MatrixXd dz(c.z.rows(), c.z.cols());
    for (Eigen::Index i = 0; i < dz.rows(); ++i)
      for (Eigen::Index k = 0; k < dz.cols(); ++k)
        dz(i, k) = d_out(i, k) * activation_grad(c.z(i, k), h_next(i, k), act);
    grad[l].w_self += dz.transpose() * c.input;
    grad[l].w_nbr += dz.transpose() * c.nbr;
    grad[l].bias += dz.colwise().sum().transpose();
    if (l == 0) break;
    Eigen::MatrixXd dh = dz * layer.w_self;
    const Eigen::MatrixXd dm = dz * layer.w_nbr;
    for (std::size_t i = 0; i < f.adj.size(); ++i) {
      const auto& nbrs = f.adj[i];
      if (nbrs.empty()) continue;
      const double w = 1.0 / static_cast<double>(nbrs.size());
      for (int j : nbrs) dh.row(j) += w * dm.row(static_cast<Eigen::Index>(i));
    }
    d_out = std::move(dh);
    h_next = c.input;
  }
}

void check_inputs(const GnnParams& params, const EmbeddingGraph& reference,
                  const EmbeddingGraph& query, const Eigen::MatrixXd& labels) {
  params.validate();
  if (reference.node_count() == 0 || query.node_count() == 0) {
    throw Error(ErrorCode::InvalidArgument, "GNN training needs nonempty graphs");
  }
  if (labels.rows() != query.node_count() || labels.cols() != reference.node_count()) {
    throw Error(ErrorCode::DimMismatch,
                fmt::format("labels are {}x{} but graphs have {} query and {} reference nodes",
                            labels.rows(), labels.cols(), query.node_count(),
                            reference.node_count()));
  }
  if ((labels.array() < 0.0).any() || !labels.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "labels must be finite and nonnegative");
  }
}

struct Evaluation {
  GraphForward ref, qry;
  Eigen::MatrixXd m, u;
  double loss = 0.0;
  int rows_used = 0;
};

Evaluation evaluate(const GnnParams& params, const EmbeddingGraph& reference,
                    const EmbeddingGraph& query, const Eigen::MatrixXd& labels, double eta) {
  check_inputs(params, reference, query, labels);
  Evaluation e;
  e.ref = forward(params, reference);
  e.qry = forward(params, query);
  e.m = reference_matrix(e.ref.output);
  e.u = inverse_ce_multiply(e.qry.output, e.m, eta);
  for (Eigen::Index i = 0; i < labels.rows(); ++i) {
    const double ls = labels.row(i).sum();
    if (!(ls > 0.0)) continue;
    const double r = e.u.row(i).sum();
    double row_loss = 0.0;
    for (Eigen::Index j = 0; j < labels.cols(); ++j) {
      const double t = labels(i, j) / ls;
      if (t > 0.0) row_loss -= t * std::log(e.u(i, j) / r);
    }
    e.loss += row_loss;
    ++e.rows_used;
  }
  if (e.rows_used > 0) e.loss /= e.rows_used;
  return e;
}

Eigen::VectorXd flatten_layers(const std::vector<SageLayer>& layers) {
  GnnParams g;
  g.layers = layers;
  return g.flatten();
}

}  // namespace

double gnn_loss(const GnnParams& params, const EmbeddingGraph& reference,
                const EmbeddingGraph& query, const Eigen::MatrixXd& labels, double eta) {
  return evaluate(params, reference, query, labels, eta).loss;
}

Eigen::MatrixXd gnn_predicted_distribution(const GnnParams& params,
                                           const EmbeddingGraph& reference,
                                           const EmbeddingGraph& query, double eta) {
  params.validate();
  const auto f_r = gnn_forward(params, reference);
  const auto f_q = gnn_forward(params, query);
  Eigen::MatrixXd u =
      inverse_ce_multiply(f_q.node_features, reference_matrix(f_r.node_features), eta);
  for (Eigen::Index i = 0; i < u.rows(); ++i) u.row(i) /= u.row(i).sum();
  return u;
}

GnnLossAndGradient gnn_loss_and_gradient(const GnnParams& params, const EmbeddingGraph& reference,
                                         const EmbeddingGraph& query,
                                         const Eigen::MatrixXd& labels, double eta) {
  const Evaluation e = evaluate(params, reference, query, labels, eta);
  GnnLossAndGradient out;
  out.loss = e.loss;

  std::vector<SageLayer> grad(params.layers.size());
  for (std::size_t l = 0; l < grad.size(); ++l) {
    grad[l].w_self = Eigen::MatrixXd::Zero(params.layers[l].out_dim(), params.layers[l].in_dim());
    grad[l].w_nbr = grad[l].w_self;
    grad[l].bias = Eigen::VectorXd::Zero(params.layers[l].out_dim());
  }
  if (e.rows_used == 0) {
    out.gradient = flatten_layers(grad);
    return out;
  }

  const Eigen::Index nq = e.u.rows();
  const Eigen::Index nr = e.u.cols();
  const Eigen::Index k_dim = e.m.rows();
  const double inv_rows = 1.0 / e.rows_used;

  // d loss / d S where U = 1 / S.
  Eigen::MatrixXd ds = Eigen::MatrixXd::Zero(nq, nr);
  for (Eigen::Index i = 0; i < nq; ++i) {
    const double ls = labels.row(i).sum();
    if (!(ls > 0.0)) continue;
    const double r = e.u.row(i).sum();
    for (Eigen::Index j = 0; j < nr; ++j) {
      const double u = e.u(i, j);
      const double du = inv_rows * (-(labels(i, j) / ls) / u + 1.0 / r);
      ds(i, j) = -u * u * du;
    }
  }

  // S = eta - q * log(clamp(m)).
  Eigen::MatrixXd neg_log(k_dim, nr);
  Eigen::MatrixXd dm = Eigen::MatrixXd::Zero(k_dim, nr);
  for (Eigen::Index k = 0; k < k_dim; ++k)
    for (Eigen::Index j = 0; j < nr; ++j) neg_log(k, j) = -std::log(std::clamp(e.m(k, j), kLogClamp, 1.0));
  const Eigen::MatrixXd dq = ds * neg_log.transpose();
  const Eigen::MatrixXd& q = e.qry.output;
  const Eigen::MatrixXd dm_raw = -(q.transpose() * ds);  // sum_i ds_ij q_ik
  for (Eigen::Index k = 0; k < k_dim; ++k) {
    for (Eigen::Index j = 0; j < nr; ++j) {
      const double mk = e.m(k, j);
      if (mk >= kLogClamp) dm(k, j) = dm_raw(k, j) / mk;
    }
  }

  // m_kj = F_r[j, k] / s_j.
  const Eigen::MatrixXd& fr = e.ref.output;
  Eigen::MatrixXd dfr(fr.rows(), fr.cols());
  for (Eigen::Index j = 0; j < fr.rows(); ++j) {
    const double s = fr.row(j).sum();
    const double coupling = dm.col(j).dot(fr.row(j).transpose()) / (s * s);
    for (Eigen::Index k = 0; k < fr.cols(); ++k) dfr(j, k) = dm(k, j) / s - coupling;
  }

  backward(params, e.ref, dfr, grad);
  backward(params, e.qry, dq, grad);
  out.gradient = flatten_layers(grad);
  return out;
}

GnnTrainResult train_gnn(const GnnParams& initial, const EmbeddingGraph& reference,
                         const EmbeddingGraph& query, const Eigen::MatrixXd& labels,
                         const GnnTrainConfig& config) {
  if (config.steps < 0) throw Error(ErrorCode::InvalidArgument, "negative step count");
  GnnTrainResult result;
  result.params = initial;
  Eigen::VectorXd theta = initial.flatten();
  Eigen::VectorXd velocity = Eigen::VectorXd::Zero(theta.size());
  for (int step = 0; step < config.steps; ++step) {
    result.params.assign(theta);
    const auto lg = gnn_loss_and_gradient(result.params, reference, query, labels, config.eta);
    if (!std::isfinite(lg.loss) || !lg.gradient.allFinite()) {
      throw Error(ErrorCode::NonFiniteLoss, fmt::format("GNN training diverged at step {}", step));
    }
    result.loss_history.push_back(lg.loss);
    sgd_momentum_step(theta, velocity, lg.gradient, config.learning_rate, config.momentum,
                      config.weight_decay);
    if (!theta.allFinite()) {
      throw Error(ErrorCode::NonFiniteLoss,
                  fmt::format("GNN parameters became non-finite at step {}", step));
    }
  }
  result.params.assign(theta);
  const double final_loss = gnn_loss(result.params, reference, query, labels, config.eta);
  if (!std::isfinite(final_loss)) {
    throw Error(ErrorCode::NonFiniteLoss, "GNN training produced a non-finite final loss");
  }
  result.loss_history.push_back(final_loss);
  return result;
}

}  // namespace reloc
