#include "chainspec/metrics.hpp"

#include <stdexcept>
#include <string>

namespace chainspec {

namespace {

template <int D>
void check_pairs(const std::vector<DiscreteCurve<D>>& truth,
                 const std::vector<DiscreteCurve<D>>& pred) {
  if (truth.empty() || truth.size() != pred.size())
    throw std::invalid_argument("curve collections must match and be nonempty");
  for (std::size_t i = 0; i < truth.size(); ++i)
    if (truth[i].atoms() != pred[i].atoms())
      throw std::invalid_argument("atom count mismatch in pair " +
                                  std::to_string(i));
}

}  // namespace

template <int D>
ErrorReport error_report(const std::vector<DiscreteCurve<D>>& truth,
                         const std::vector<DiscreteCurve<D>>& pred) {
  check_pairs(truth, pred);
  const int n = int(truth.size());
  ErrorReport report;
  report.per_particle_max.resize(n);
  double sum_max = 0.0, sum_all = 0.0;
  std::size_t atom_count = 0;
  for (int i = 0; i < n; ++i) {
    const auto dist =
        (truth[i].points - pred[i].points).colwise().norm().eval();
    report.per_particle_max[i] = dist.maxCoeff();
    sum_max += report.per_particle_max[i];
    sum_all += dist.sum();
    atom_count += std::size_t(truth[i].atoms());
  }
  report.max_error = sum_max / n;
  report.avg_error = sum_all / double(atom_count);
  return report;
}

template <int D>
double max_pointcloud_error(const std::vector<DiscreteCurve<D>>& truth,
                            const std::vector<DiscreteCurve<D>>& pred) {
  return error_report(truth, pred).max_error;
}

template <int D>
double avg_pointcloud_error(const std::vector<DiscreteCurve<D>>& truth,
                            const std::vector<DiscreteCurve<D>>& pred) {
  return error_report(truth, pred).avg_error;
}

template <int D>
ErrorReport aligned_error_report(const std::vector<DiscreteCurve<D>>& truth,
                                 const std::vector<DiscreteCurve<D>>& pred) {
  check_pairs(truth, pred);
  std::vector<DiscreteCurve<D>> aligned(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const Vec<D> ct = truth[i].points.rowwise().mean();
    const Vec<D> cp = pred[i].points.rowwise().mean();
    const auto pt = (truth[i].points.colwise() - ct).eval();
    const auto pp = (pred[i].points.colwise() - cp).eval();
    // Kabsch: rotation minimizing |pt - R pp| with det(R) = +1
    Mat<D> cov = pt * pp.transpose();
    Eigen::JacobiSVD<Mat<D>> svd(cov,
                                 Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat<D> s = Mat<D>::Identity();
    s(D - 1, D - 1) =
        (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0 ? -1.0
                                                                      : 1.0;
    Mat<D> rot = svd.matrixU() * s * svd.matrixV().transpose();
    aligned[i].delta = pred[i].delta;
    aligned[i].points = (rot * pp).colwise() + ct;
  }
  return error_report(truth, aligned);
}

template ErrorReport error_report<2>(const std::vector<DiscreteCurve<2>>&,
                                     const std::vector<DiscreteCurve<2>>&);
template ErrorReport error_report<3>(const std::vector<DiscreteCurve<3>>&,
                                     const std::vector<DiscreteCurve<3>>&);
template double max_pointcloud_error<2>(const std::vector<DiscreteCurve<2>>&,
                                        const std::vector<DiscreteCurve<2>>&);
template double max_pointcloud_error<3>(const std::vector<DiscreteCurve<3>>&,
                                        const std::vector<DiscreteCurve<3>>&);
template double avg_pointcloud_error<2>(const std::vector<DiscreteCurve<2>>&,
                                        const std::vector<DiscreteCurve<2>>&);
template double avg_pointcloud_error<3>(const std::vector<DiscreteCurve<3>>&,
                                        const std::vector<DiscreteCurve<3>>&);
template ErrorReport aligned_error_report<2>(
    const std::vector<DiscreteCurve<2>>&, const std::vector<DiscreteCurve<2>>&);
template ErrorReport aligned_error_report<3>(
    const std::vector<DiscreteCurve<3>>&, const std::vector<DiscreteCurve<3>>&);

}  // namespace chainspec
