#include <benchmark/benchmark.h>

#include <random>

#include "reloc/dataset.hpp"
#include "reloc/encoder.hpp"
#include "reloc/gnn.hpp"
#include "reloc/pose_graph.hpp"
#include "reloc/query.hpp"
#include "reloc/scene.hpp"
#include "reloc/similarity.hpp"

namespace {

using namespace reloc;

const Dataset& corridor() {
  static const Dataset d = build_dataset(generate_scene(SceneSpec{}, 1));
  return d;
}

void BM_ReprojectionIou(benchmark::State& state) {
  const auto& d = corridor();
  const auto gt = d.ground_truth();
  const bool occlusion = state.range(0) != 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        reprojection_iou(d.keyframes[3], d.keyframes[36], gt[3], gt[36], d.intrinsics, occlusion));
  }
}
BENCHMARK(BM_ReprojectionIou)->Arg(0)->Arg(1);

void BM_SimilarityMatrix(benchmark::State& state) {
  const auto& d = corridor();
  const auto gt = d.ground_truth();
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_similarity_matrix(d.keyframes, gt, d.intrinsics));
  }
}
BENCHMARK(BM_SimilarityMatrix)->Unit(benchmark::kMillisecond);

void BM_EncodeKeyframe(benchmark::State& state) {
  const auto& d = corridor();
  const auto params = EncoderParams::initialize(16, 32, 16, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(encode(params, d.keyframes[0].patches, 64, 64));
  }
}
BENCHMARK(BM_EncodeKeyframe);

void BM_GnnForward(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd x(n, 16);
  for (Eigen::Index k = 0; k < x.size(); ++k) x.data()[k] = g(rng);
  const auto graph = build_embedding_graph(x, chain_edges(n));
  const auto params = GnnParams::initialize(1, 16);
  for (auto _ : state) benchmark::DoNotOptimize(gnn_forward(params, graph));
}
BENCHMARK(BM_GnnForward)->Arg(40)->Arg(400);

void BM_Query(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  ReferenceGraph ref{Eigen::MatrixXd::NullaryExpr(400, 16, [&] { return u(rng); })};
  const Eigen::MatrixXd q = Eigen::MatrixXd::NullaryExpr(kDefaultQueryWindow, 16, [&] { return u(rng); });
  for (auto _ : state) benchmark::DoNotOptimize(match_query_features(ref, q));
}
BENCHMARK(BM_Query);

void BM_OptimizeCircle(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Pose> truth, odo;
  for (int k = 0; k < n; ++k) {
    const double a = 6.283185307179586 * k / n;
    truth.emplace_back(so3_exp(Vec3(0, 0, a)), Vec3(2 * std::cos(a), 2 * std::sin(a), 0));
  }
  odo.push_back(truth[0]);
  for (int k = 1; k < n; ++k) {
    const Twist noise(0.02 * Vec3(g(rng), g(rng), g(rng)), 0.01 * Vec3(g(rng), g(rng), g(rng)));
    odo.push_back(odo.back() * truth[k - 1].inverse() * truth[k] * se3_exp(noise));
  }
  PoseGraphProblem p{odo, odometry_edges(odo), 0};
  p.edges.push_back({n - 1, 0, relative_measurement(truth[n - 1], truth[0]), 1.0});
  for (auto _ : state) benchmark::DoNotOptimize(optimize(p));
}
BENCHMARK(BM_OptimizeCircle)->Arg(20)->Arg(80)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
