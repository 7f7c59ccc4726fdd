#include "reloc/embedding_graph.hpp"

#include <fmt/format.h>

#include <fstream>
#include <sstream>
#include <string>

#include "reloc/error.hpp"

namespace reloc {

EmbeddingGraph build_embedding_graph(const Eigen::MatrixXd& node_embeddings,
                                     std::span<const GraphEdge> edges) {
  EmbeddingGraph g;
  g.node_embeddings = node_embeddings;
  const int n = g.node_count();
  const int d = g.dim();
  g.edges.assign(edges.begin(), edges.end());
  g.edge_embeddings.reserve(edges.size());
  for (const auto& e : edges) {
    if (e.source < 0 || e.source >= n || e.target < 0 || e.target >= n) {
      throw Error(ErrorCode::DanglingEdge,
                  fmt::format("edge ({}, {}) references a node outside [0, {})", e.source,
                              e.target, n));
    }
    Eigen::VectorXd cat(2 * d);
    cat << node_embeddings.row(e.source).transpose(), node_embeddings.row(e.target).transpose();
    g.edge_embeddings.push_back(std::move(cat));
  }
  return g;
}

Eigen::MatrixXd stack_codes(std::span<const EmbeddingCode> codes) {
  if (codes.empty()) return {};
  const auto d = codes.front().size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(codes.size()), d);
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (codes[i].size() != d) throw Error(ErrorCode::DimMismatch, "embedding sizes differ");
    m.row(static_cast<Eigen::Index>(i)) = codes[i].transpose();
  }
  return m;
}

EmbeddingGraph build_embedding_graph(std::span<const EmbeddingCode> codes,
                                     std::span<const GraphEdge> edges) {
  return build_embedding_graph(stack_codes(codes), edges);
}

std::vector<GraphEdge> chain_edges(int n) {
  std::vector<GraphEdge> out;
  for (int i = 0; i + 1 < n; ++i) out.push_back({i, i + 1});
  return out;
}

void write_embeddings_csv(const std::filesystem::path& path,
                          std::span<const EmbeddingCode> codes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  for (std::size_t i = 0; i < codes.size(); ++i) {
    out << i;
    for (Eigen::Index k = 0; k < codes[i].size(); ++k) out << fmt::format(",{:.9g}", codes[i][k]);
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

std::vector<EmbeddingCode> read_embeddings_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::vector<EmbeddingCode> codes;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> values;
    bool first = true;
    while (std::getline(ss, cell, ',')) {
      try {
        const double v = std::stod(cell);
        if (first) {
          if (static_cast<std::size_t>(v) != codes.size()) {
            throw Error(ErrorCode::ParseError,
                        fmt::format("{}:{}: expected keyframe id {}", path.string(), line_no,
                                    codes.size()));
          }
          first = false;
        } else {
          values.push_back(v);
        }
      } catch (const std::invalid_argument&) {
        throw Error(ErrorCode::ParseError,
                    fmt::format("{}:{}: bad number '{}'", path.string(), line_no, cell));
      } catch (const std::out_of_range&) {
        throw Error(ErrorCode::ParseError,
                    fmt::format("{}:{}: number out of range '{}'", path.string(), line_no, cell));
      }
    }
    if (values.empty() || (!codes.empty() && codes.front().size() != static_cast<Eigen::Index>(values.size()))) {
      throw Error(ErrorCode::ParseError,
                  fmt::format("{}:{}: inconsistent embedding width", path.string(), line_no));
    }
    codes.push_back(Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size())));
  }
  return codes;
}

}  // namespace reloc
