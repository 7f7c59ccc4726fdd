#include <gtest/gtest.h>

#include <random>

#include "reloc/error.hpp"
#include "reloc/query.hpp"
#include "test_support.hpp"

namespace reloc {
namespace {

Eigen::MatrixXd random_positive(int r, int c, std::uint64_t seed, double lo = 0.05) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, 1.0);
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::Io;
}

TEST(InverseCe, ZeroQueryOrUnitReferenceGivesInverseEta) {
  const Eigen::MatrixXd m = random_positive(3, 4, 1);
  const auto u0 = inverse_ce_multiply(Eigen::MatrixXd::Zero(2, 3), m, 0.25);
  EXPECT_TRUE((u0.array() == 4.0).all());
  const auto u1 = inverse_ce_multiply(random_positive(2, 3, 2), Eigen::MatrixXd::Ones(3, 4), 0.5);
  EXPECT_TRUE((u1.array() == 2.0).all());
}

TEST(InverseCe, WorkedTwoByTwo) {
  Eigen::MatrixXd q(1, 2), m(2, 1);
  q << 0.5, 1.0;
  m << 0.5, 0.5;
  const auto u = inverse_ce_multiply(q, m, 1.0);
  EXPECT_NEAR(u(0, 0), 1.0 / (1.0 + 1.5 * std::log(2.0)), 1e-15);
}

TEST(InverseCe, MatchesElementwiseFormula) {
  const auto q = random_positive(4, 5, 3, 0.0);
  Eigen::MatrixXd m = random_positive(5, 6, 4);
  m(0, 0) = 0.0;  // clamped before the log
  const auto u = inverse_ce_multiply(q, m, 1e-3);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 6; ++j) {
      double ce = 0.0;
      for (int k = 0; k < 5; ++k) ce -= q(i, k) * std::log(std::max(m(k, j), kLogClamp));
      EXPECT_NEAR(u(i, j), 1.0 / (1e-3 + ce), 1e-12 * u(i, j));
    }
  }
}

TEST(InverseCe, BoundsAndMonotonicity) {
  const double eta = 1e-3;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto q = random_positive(3, 4, 10 + s, 0.0);
    const auto m = random_positive(4, 5, 40 + s, 0.0);
    const auto u = inverse_ce_multiply(q, m, eta);
    EXPECT_GT(u.minCoeff(), 0.0);
    EXPECT_LE(u.maxCoeff(), 1.0 / eta);
    // More query mass can only raise the cross-entropy.
    EXPECT_TRUE((inverse_ce_multiply(q * 2.0, m, eta).array() <= u.array()).all());
    // Raising reference entries toward one can only lower it.
    const Eigen::MatrixXd m_up = (m.array() + 0.5 * (1.0 - m.array())).matrix();
    EXPECT_TRUE((inverse_ce_multiply(q, m_up, eta).array() >= u.array()).all());
  }
}

TEST(InverseCe, Errors) {
  const auto q = random_positive(2, 3, 1);
  const auto m = random_positive(3, 2, 2);
  EXPECT_EQ(code_of([&] { (void)inverse_ce_multiply(q, m, 0.0); }), ErrorCode::NonPositiveEta);
  EXPECT_EQ(code_of([&] { (void)inverse_ce_multiply(q, m, -1.0); }), ErrorCode::NonPositiveEta);
  EXPECT_EQ(code_of([&] { (void)inverse_ce_multiply(q, q, 1.0); }), ErrorCode::DimMismatch);
  Eigen::MatrixXd neg = q;
  neg(0, 0) = -0.1;
  EXPECT_EQ(code_of([&] { (void)inverse_ce_multiply(neg, m, 1.0); }), ErrorCode::InvalidArgument);
}

TEST(ReferenceMatrix, ColumnsAreDistributions) {
  const auto f = random_positive(6, 4, 5);
  const auto m = reference_matrix(f);
  ASSERT_EQ(m.rows(), 4);
  ASSERT_EQ(m.cols(), 6);
  for (int j = 0; j < 6; ++j) {
    EXPECT_NEAR(m.col(j).sum(), 1.0, 1e-15);
    EXPECT_LT((m.col(j) * f.row(j).sum() - f.row(j).transpose()).norm(), 1e-14);
  }
  EXPECT_THROW((void)reference_matrix(Eigen::MatrixXd::Zero(2, 3)), Error);
}

TEST(Query, SelfQueryRecoversIdentity) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    ReferenceGraph ref{random_positive(8, 6, 100 + s)};
    QueryOptions opt;
    opt.threshold = 0.0;
    const auto r = match_query_features(ref, ref.node_features, opt);
    ASSERT_EQ(r.matches.size(), 8u);
    for (const auto& m : r.matches) EXPECT_EQ(m.query, m.reference);
  }
}

TEST(Query, SelfQueryThroughGnn) {
  const auto p = GnnParams::initialize(3, 4);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd emb(10, 4);
  for (Eigen::Index i = 0; i < emb.size(); ++i) emb.data()[i] = g(rng);
  const auto ref = gnn_forward(p, build_embedding_graph(emb, chain_edges(10)));
  QueryOptions opt;
  opt.threshold = 0.0;
  const auto r = match_query_features(ref, ref.node_features, opt);
  for (const auto& m : r.matches) EXPECT_EQ(m.query, m.reference);
}

TEST(Query, MatchesAreSortedRowArgmaxesAboveThreshold) {
  ReferenceGraph ref{random_positive(7, 5, 7)};
  const auto qf = random_positive(6, 5, 8);
  const auto all = match_query_features(ref, qf, QueryOptions{kDefaultEta, 0.0, 0.9});
  ASSERT_EQ(all.matches.size(), 6u);
  for (std::size_t k = 1; k < all.matches.size(); ++k) {
    EXPECT_GE(all.matches[k - 1].score, all.matches[k].score);
  }
  for (const auto& m : all.matches) {
    EXPECT_EQ(m.score, all.similarity.row(m.query).maxCoeff());
    EXPECT_EQ(m.score, all.similarity(m.query, m.reference));
  }
  QueryOptions high;
  high.threshold = all.similarity.maxCoeff() * 1.0001;
  EXPECT_TRUE(match_query_features(ref, qf, high).matches.empty());

  // Default: the 90th percentile of U.
  const auto dflt = match_query_features(ref, qf);
  const auto& u = dflt.similarity;
  const double t = percentile(std::vector<double>(u.data(), u.data() + u.size()), 0.9);
  for (const auto& m : dflt.matches) EXPECT_GE(m.score, t);
  std::size_t expected = 0;
  for (int i = 0; i < 6; ++i) expected += u.row(i).maxCoeff() >= t;
  EXPECT_EQ(dflt.matches.size(), expected);
}

TEST(Query, WindowOfOneIsSupported) {
  const auto p = GnnParams::initialize(2, 4);
  ReferenceGraph ref{random_positive(5, 4, 3)};
  QueryOptions opt;
  opt.threshold = 0.0;
  const auto r = query_subgraph(p, ref, random_positive(1, 4, 4), opt);
  EXPECT_EQ(r.similarity.rows(), 1);
  EXPECT_EQ(r.matches.size(), 1u);
}

TEST(Query, EmptyWindowThrows) {
  const auto p = GnnParams::initialize(2, 4);
  EXPECT_EQ(code_of([&] { (void)encode_query_window(p, Eigen::MatrixXd(0, 4)); }),
            ErrorCode::EmptyWindow);
}

TEST(Percentile, LinearInterpolation) {
  EXPECT_EQ(percentile({3.0, 1.0, 2.0}, 0.5), 2.0);
  EXPECT_EQ(percentile({1.0, 2.0}, 0.25), 1.25);
  EXPECT_EQ(percentile({5.0}, 0.9), 5.0);
  EXPECT_EQ(percentile({0.0, 10.0}, 1.0), 10.0);
  EXPECT_THROW((void)percentile({}, 0.5), Error);
  EXPECT_THROW((void)percentile({1.0}, 1.5), Error);
}

TEST(MatchesCsv, RoundTripIsExact) {
  test::TempDir dir;
  const std::vector<Match> m{{3, 17, 0.1 + 0.2}, {0, 0, 1.0 / 3.0}, {9, 2, 123.456}};
  write_matches_csv(dir / "m.csv", m);
  EXPECT_EQ(read_matches_csv(dir / "m.csv"), m);
  EXPECT_EQ(test::slurp(dir / "m.csv").rfind("query_idx,ref_idx,score\n", 0), 0u);
  test::spit(dir / "bad.csv", "query_idx,ref_idx,score\n1;2;3\n");
  EXPECT_THROW((void)read_matches_csv(dir / "bad.csv"), Error);
}

}  // namespace
}  // namespace reloc
