#include "reloc/evaluation.hpp"

#include <fmt/format.h>

#include <Eigen/LU>
#include <Eigen/SVD>
#include <cmath>
#include <fstream>

#include "reloc/error.hpp"

namespace reloc {

Pose align_rigid(std::span<const Vec3> a, std::span<const Vec3> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::LengthMismatch, "point sets differ in size");
  if (a.empty()) return Pose::identity();
  Vec3 ca = Vec3::Zero();
  Vec3 cb = Vec3::Zero();
  for (std::size_t k = 0; k < a.size(); ++k) {
    ca += a[k];
    cb += b[k];
  }
  ca /= static_cast<double>(a.size());
  cb /= static_cast<double>(b.size());
  Mat3 cov = Mat3::Zero();
  for (std::size_t k = 0; k < a.size(); ++k) cov += (b[k] - cb) * (a[k] - ca).transpose();
  Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) d(2, 2) = -1.0;
  const Mat3 r = svd.matrixU() * d * svd.matrixV().transpose();
  return {r, cb - r * ca};
}

AteReport evaluate_ate(const Trajectory& estimated, const Trajectory& ground_truth, bool align) {
  if (estimated.size() != ground_truth.size()) {
    throw Error(ErrorCode::LengthMismatch,
                fmt::format("estimated trajectory has {} poses, ground truth {}", estimated.size(),
                            ground_truth.size()));
  }
  for (std::size_t k = 0; k < estimated.size(); ++k) {
    if (std::abs(estimated[k].timestamp - ground_truth[k].timestamp) > 1e-6) {
      throw Error(ErrorCode::TimestampMismatch,
                  fmt::format("pose {}: timestamps {} and {} differ", k, estimated[k].timestamp,
                              ground_truth[k].timestamp));
    }
  }
  AteReport report;
  if (estimated.empty()) return report;

  std::vector<Vec3> est, gt;
  for (std::size_t k = 0; k < estimated.size(); ++k) {
    est.push_back(estimated[k].pose.translation);
    gt.push_back(ground_truth[k].pose.translation);
  }
  const Pose t = align ? align_rigid(est, gt) : Pose::identity();

  double sum_sq = 0.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < est.size(); ++k) {
    const double e = (t.apply(est[k]) - gt[k]).norm();
    report.errors.push_back(e);
    sum_sq += e * e;
    sum += e;
    report.max_err = std::max(report.max_err, e);
  }
  const double n = static_cast<double>(est.size());
  report.rmse = std::sqrt(sum_sq / n);
  const double mean = sum / n;
  double var = 0.0;
  for (double e : report.errors) var += (e - mean) * (e - mean);
  const double stdev = std::sqrt(var / n);

  double extent = 0.0;
  for (std::size_t a = 0; a < gt.size(); ++a)
    for (std::size_t b = a + 1; b < gt.size(); ++b) extent = std::max(extent, (gt[a] - gt[b]).norm());
  report.sigma_rmse = extent > 0.0 ? stdev / extent : 0.0;
  return report;
}

HeatmapError heatmap_error(const SimilarityMatrix& pred, const SimilarityMatrix& truth) {
  if (pred.n != truth.n || pred.values.size() != truth.values.size()) {
    throw Error(ErrorCode::DimMismatch,
                fmt::format("heatmaps are {}x{} and {}x{}", pred.n, pred.n, truth.n, truth.n));
  }
  HeatmapError out;
  out.error = SimilarityMatrix(pred.n);
  for (std::size_t k = 0; k < pred.values.size(); ++k) {
    const double e = std::abs(pred.values[k] - truth.values[k]);
    out.error.values[k] = e;
    out.max_abs_error = std::max(out.max_abs_error, e);
  }
  return out;
}

void write_ate_report(const std::filesystem::path& path, const AteReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << "# absolute translational error after rigid alignment, meters\n"
      << "# sigma_rmse = stdev(per-frame error) / largest ground-truth position distance\n";
  out << fmt::format("frames {}\nrmse {:.9g}\nsigma_rmse {:.9g}\nmax_err {:.9g}\n",
                     report.errors.size(), report.rmse, report.sigma_rmse, report.max_err);
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

}  // namespace reloc
