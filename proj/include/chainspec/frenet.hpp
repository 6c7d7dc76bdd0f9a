#pragma once

#include <utility>
#include <vector>

#include "chainspec/types.hpp"

namespace chainspec {

// Frame-to-frame transitions: F_{j+1} = R(angles_j) * F_j, with frames stored
// as row blocks (normal(s) first, tangent last). In 2D a single turning angle
// drives the step; in 3D theta twists about the tangent and psi bends it.
Eigen::Matrix2d rotation_matrix(double theta);
Eigen::Matrix3d rotation_matrix(double theta, double psi);

// Derivatives of the transitions, used by the fit adjoints.
Eigen::Matrix2d rotation_matrix_dtheta(double theta);
Eigen::Matrix3d rotation_matrix_dtheta(double theta, double psi);
Eigen::Matrix3d rotation_matrix_dpsi(double theta, double psi);

// Points plus the per-atom frames F_0..F_{m-2} produced while synthesizing.
template <int D>
struct ChainState {
  Eigen::Matrix<double, D, Eigen::Dynamic> points;
  std::vector<Mat<D>> frames;
};

// Runs the recursion z_{j+1} = z_j + delta * t_j outward from the pose's
// reference atom in both directions (the backward side inverts the frame
// steps). angles.theta/psi must hold m-2 entries; delta must be positive.
template <int D>
ChainState<D> synthesize_chain(const ChainAngles<D>& angles,
                               const Pose<D>& pose, double delta);

template <int D>
DiscreteCurve<D> synthesize_curve(const ChainAngles<D>& angles,
                                  const Pose<D>& pose, double delta);

struct ExtractOptions {
  // Largest tolerated relative deviation of consecutive spacings from their
  // mean. Loaders of measured chains pass something looser than the default.
  double spacing_tolerance = 1e-6;
};

// Recovers (angles, pose-at-ref_index) from atom positions. Binormals follow
// the cross-product convention with the previous one carried across
// near-collinear steps (cross norm < 1e-10), so recovered 3D bond angles land
// in (0, pi) and the first turning angle is 0 by construction.
template <int D>
std::pair<ChainAngles<D>, Pose<D>> extract_angles(
    const DiscreteCurve<D>& curve, int ref_index,
    const ExtractOptions& options = {});

// Throws unless frame is orthogonal within 1e-12 with determinant +1.
template <int D>
void validate_frame(const Mat<D>& frame);

}  // namespace chainspec
