#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "reloc/error.hpp"
#include "reloc/gnn_training.hpp"
#include "test_support.hpp"

namespace reloc {
namespace {

EmbeddingGraph random_chain(int n, int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
  return build_embedding_graph(x, chain_edges(n));
}

Eigen::MatrixXd random_labels(int q, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd l(q, n);
  for (Eigen::Index i = 0; i < l.size(); ++i) l.data()[i] = u(rng) < 0.3 ? 0.0 : u(rng);
  return l;
}

/// Loss written out elementwise from the GNN outputs.
double oracle_loss(const GnnParams& p, const EmbeddingGraph& ref, const EmbeddingGraph& query,
                   const Eigen::MatrixXd& labels, double eta) {
  const Eigen::MatrixXd fr = gnn_forward(p, ref).node_features;
  const Eigen::MatrixXd fq = gnn_forward(p, query).node_features;
  double total = 0.0;
  int rows = 0;
  for (Eigen::Index i = 0; i < fq.rows(); ++i) {
    const double lsum = labels.row(i).sum();
    if (lsum <= 0.0) continue;
    std::vector<double> u(static_cast<std::size_t>(fr.rows()));
    double usum = 0.0;
    for (Eigen::Index j = 0; j < fr.rows(); ++j) {
      const double colsum = fr.row(j).sum();
      double ce = 0.0;
      for (Eigen::Index k = 0; k < fr.cols(); ++k) {
        ce -= fq(i, k) * std::log(std::max(fr(j, k) / colsum, kLogClamp));
      }
      u[j] = 1.0 / (eta + ce);
      usum += u[j];
    }
    double row = 0.0;
    for (Eigen::Index j = 0; j < fr.rows(); ++j) {
      const double l = labels(i, j) / lsum;
      if (l > 0.0) row -= l * std::log(u[j] / usum);
    }
    total += row;
    ++rows;
  }
  return total / rows;
}

TEST(GnnLoss, MatchesElementwiseOracle) {
  const auto p = GnnParams::initialize(1, 4);
  const auto ref = random_chain(7, 4, 2);
  const auto query = random_chain(5, 4, 3);
  Eigen::MatrixXd labels = random_labels(5, 7, 4);
  labels.row(2).setZero();
  for (double eta : {1e-3, 0.5}) {
    EXPECT_NEAR(gnn_loss(p, ref, query, labels, eta), oracle_loss(p, ref, query, labels, eta),
                1e-12);
  }
}

TEST(GnnLoss, GradientMatchesFiniteDifference) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto p = GnnParams::initialize(seed, 4);
    const auto ref = random_chain(6, 4, 10 + seed);
    const auto query = random_chain(4, 4, 20 + seed);
    const auto labels = random_labels(4, 6, 30 + seed);
    const auto lg = gnn_loss_and_gradient(p, ref, query, labels, 0.1);
    EXPECT_NEAR(lg.loss, gnn_loss(p, ref, query, labels, 0.1), 1e-14);
    const Eigen::VectorXd theta = p.flatten();
    auto f = [&](const Eigen::VectorXd& t) {
      GnnParams q = p;
      q.assign(t);
      return gnn_loss(q, ref, query, labels, 0.1);
    };
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(theta.size()));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    const auto fd = test::central_difference(f, theta, idx, 1e-6);
    EXPECT_LT(test::relative_error(lg.gradient, fd), 1e-4) << "seed " << seed;
  }
}

TEST(GnnLoss, LabelsEqualToPredictionGiveZeroGradient) {
  const auto p = GnnParams::initialize(4, 4);
  const auto ref = random_chain(6, 4, 5);
  const auto query = random_chain(3, 4, 6);
  const auto labels = gnn_predicted_distribution(p, ref, query);
  EXPECT_LT(gnn_loss_and_gradient(p, ref, query, labels).gradient.cwiseAbs().maxCoeff(), 1e-8);
  for (Eigen::Index i = 0; i < labels.rows(); ++i) EXPECT_NEAR(labels.row(i).sum(), 1.0, 1e-14);
}

TEST(GnnLoss, InputValidation) {
  const auto p = GnnParams::initialize(4, 4);
  const auto ref = random_chain(6, 4, 5);
  const auto query = random_chain(3, 4, 6);
  EXPECT_THROW((void)gnn_loss(p, ref, query, Eigen::MatrixXd::Ones(2, 6)), Error);
  Eigen::MatrixXd neg = Eigen::MatrixXd::Ones(3, 6);
  neg(1, 1) = -1.0;
  EXPECT_THROW((void)gnn_loss(p, ref, query, neg), Error);
}

TEST(GnnTraining, ToyGraphLossHalvesIn500Steps) {
  // The query is the reference itself and each node should find itself.
  const auto graph = random_chain(10, 4, 7);
  const Eigen::MatrixXd labels = Eigen::MatrixXd::Identity(10, 10);
  GnnTrainConfig cfg;
  cfg.steps = 500;
  cfg.learning_rate = 0.05;
  cfg.momentum = 0.9;
  const auto result = train_gnn(GnnParams::initialize(8, 4), graph, graph, labels, cfg);
  ASSERT_EQ(result.loss_history.size(), 501u);
  EXPECT_LT(result.loss_history.back(), 0.5 * result.loss_history.front());
  EXPECT_NEAR(result.loss_history.back(), gnn_loss(result.params, graph, graph, labels), 1e-12);
}

TEST(GnnTraining, DeterministicAndZeroStepsIsIdentity) {
  const auto ref = random_chain(6, 4, 1);
  const auto query = random_chain(4, 4, 2);
  const auto labels = random_labels(4, 6, 3);
  GnnTrainConfig cfg;
  cfg.steps = 20;
  cfg.learning_rate = 1e-2;
  const auto init = GnnParams::initialize(5, 4);
  const auto a = train_gnn(init, ref, query, labels, cfg);
  const auto b = train_gnn(init, ref, query, labels, cfg);
  EXPECT_TRUE(a.params.flatten() == b.params.flatten());
  EXPECT_EQ(a.loss_history, b.loss_history);
  cfg.steps = 0;
  const auto z = train_gnn(init, ref, query, labels, cfg);
  EXPECT_TRUE(z.params.flatten() == init.flatten());
  EXPECT_EQ(z.loss_history.size(), 1u);
}

}  // namespace
}  // namespace reloc
