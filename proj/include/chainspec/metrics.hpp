#pragma once

#include <vector>

#include "chainspec/types.hpp"

namespace chainspec {

struct ErrorReport {
  double max_error = 0.0;  // mean over particles of the worst atom distance
  double avg_error = 0.0;  // mean over particles and atoms
  Eigen::VectorXd per_particle_max;
};

// (1/n) sum_i max_j |z_ij - z~_ij|. Curves are compared in place; poses are
// assumed known, so no alignment happens.
template <int D>
double max_pointcloud_error(const std::vector<DiscreteCurve<D>>& truth,
                            const std::vector<DiscreteCurve<D>>& pred);

// (1/(n m)) sum_ij |z_ij - z~_ij|
template <int D>
double avg_pointcloud_error(const std::vector<DiscreteCurve<D>>& truth,
                            const std::vector<DiscreteCurve<D>>& pred);

template <int D>
ErrorReport error_report(const std::vector<DiscreteCurve<D>>& truth,
                         const std::vector<DiscreteCurve<D>>& pred);

// Variant for pose-error studies: rigidly aligns each predicted curve to its
// truth (least squares over rotations and translations) before scoring.
template <int D>
ErrorReport aligned_error_report(const std::vector<DiscreteCurve<D>>& truth,
                                 const std::vector<DiscreteCurve<D>>& pred);

}  // namespace chainspec
