#include "reloc/query.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "reloc/error.hpp"

namespace reloc {

Eigen::MatrixXd inverse_ce_multiply(const Eigen::MatrixXd& q, const Eigen::MatrixXd& m,
                                    double eta) {
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw Error(ErrorCode::NonPositiveEta, fmt::format("eta must be positive, got {}", eta));
  }
  if (q.cols() != m.rows()) {
    throw Error(ErrorCode::DimMismatch,
                fmt::format("query width {} != reference height {}", q.cols(), m.rows()));
  }
  if ((q.array() < 0.0).any() || !q.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "query weights must be finite and nonnegative");
  }
  const Eigen::MatrixXd neg_log =
      m.unaryExpr([](double x) { return -std::log(std::clamp(x, kLogClamp, 1.0)); });
  const Eigen::MatrixXd ce = q * neg_log;
  return (eta + ce.array()).inverse().matrix();
}

Eigen::MatrixXd reference_matrix(const Eigen::MatrixXd& node_features) {
  Eigen::MatrixXd m = node_features.transpose();
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const double s = m.col(j).sum();
    if (!(s > 0.0) || (m.col(j).array() < 0.0).any()) {
      throw Error(ErrorCode::InvalidArgument,
                  fmt::format("reference node {} has no positive mass", j));
    }
    m.col(j) /= s;
  }
  return m;
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "percentile of an empty set");
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidArgument, "percentile outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double t = pos - static_cast<double>(lo);
  return values[lo] + t * (values[hi] - values[lo]);
}

Eigen::MatrixXd encode_query_window(const GnnParams& params,
                                    const Eigen::MatrixXd& window_embeddings) {
  if (window_embeddings.rows() == 0) throw Error(ErrorCode::EmptyWindow, "query window is empty");
  const auto edges = chain_edges(static_cast<int>(window_embeddings.rows()));
  const auto adj = adjacency_from_edges(static_cast<int>(window_embeddings.rows()), edges);
  return gnn_forward(params, window_embeddings, adj);
}

QueryResult match_query_features(const ReferenceGraph& reference,
                                 const Eigen::MatrixXd& query_features,
                                 const QueryOptions& options) {
  if (query_features.rows() == 0) throw Error(ErrorCode::EmptyWindow, "query window is empty");
  if (reference.node_count() == 0) throw Error(ErrorCode::InvalidArgument, "empty reference graph");
  QueryResult result;
  result.similarity =
      inverse_ce_multiply(query_features, reference_matrix(reference.node_features), options.eta);
  const auto& u = result.similarity;

  double threshold = 0.0;
  if (options.threshold) {
    threshold = *options.threshold;
  } else {
    threshold = percentile(std::vector<double>(u.data(), u.data() + u.size()), options.percentile);
  }
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    Eigen::Index best = 0;
    const double score = u.row(i).maxCoeff(&best);
    if (score >= threshold) {
      result.matches.push_back({static_cast<int>(i), static_cast<int>(best), score});
    }
  }
  std::stable_sort(result.matches.begin(), result.matches.end(),
                   [](const Match& a, const Match& b) { return a.score > b.score; });
  return result;
}

QueryResult query_subgraph(const GnnParams& params, const ReferenceGraph& reference,
                           const Eigen::MatrixXd& window_embeddings, const QueryOptions& options) {
  return match_query_features(reference, encode_query_window(params, window_embeddings), options);
}

void write_matches_csv(const std::filesystem::path& path, std::span<const Match> matches) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, fmt::format("cannot write {}", path.string()));
  out << "query_idx,ref_idx,score\n";
  for (const auto& m : matches) out << fmt::format("{},{},{:.17g}\n", m.query, m.reference, m.score);
  if (!out) throw Error(ErrorCode::Io, fmt::format("write failed: {}", path.string()));
}

std::vector<Match> read_matches_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, fmt::format("cannot open {}", path.string()));
  std::vector<Match> matches;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (lineno == 1 && line.rfind("query_idx", 0) == 0) continue;
    std::istringstream ss(line);
    Match m;
    char c1 = 0, c2 = 0;
    if (!(ss >> m.query >> c1 >> m.reference >> c2 >> m.score) || c1 != ',' || c2 != ',') {
      throw Error(ErrorCode::ParseError, fmt::format("{}:{}: bad match row", path.string(), lineno));
    }
    std::string rest;
    if (ss >> rest) {
      throw Error(ErrorCode::ParseError,
                  fmt::format("{}:{}: trailing data", path.string(), lineno));
    }
    matches.push_back(m);
  }
  return matches;
}

}  // namespace reloc
