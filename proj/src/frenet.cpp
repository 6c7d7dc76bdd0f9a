#include "chainspec/frenet.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace chainspec {

Eigen::Matrix2d rotation_matrix(double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  Eigen::Matrix2d r;
  r << c, -s, s, c;
  return r;
}

Eigen::Matrix3d rotation_matrix(double theta, double psi) {
  const double ct = std::cos(theta), st = std::sin(theta);
  const double cp = std::cos(psi), sp = std::sin(psi);
  Eigen::Matrix3d r;
  r << cp * ct, cp * st, -sp,
       -st,     ct,      0.0,
       sp * ct, sp * st, cp;
  return r;
}

Eigen::Matrix2d rotation_matrix_dtheta(double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  Eigen::Matrix2d r;
  r << -s, -c, c, -s;
  return r;
}

Eigen::Matrix3d rotation_matrix_dtheta(double theta, double psi) {
  const double ct = std::cos(theta), st = std::sin(theta);
  const double cp = std::cos(psi), sp = std::sin(psi);
  Eigen::Matrix3d r;
  r << -cp * st, cp * ct, 0.0,
       -ct,      -st,     0.0,
       -sp * st, sp * ct, 0.0;
  return r;
}

Eigen::Matrix3d rotation_matrix_dpsi(double theta, double psi) {
  const double ct = std::cos(theta), st = std::sin(theta);
  const double cp = std::cos(psi), sp = std::sin(psi);
  Eigen::Matrix3d r;
  r << -sp * ct, -sp * st, -cp,
       0.0,      0.0,      0.0,
       cp * ct,  cp * st,  -sp;
  return r;
}

template <int D>
void validate_frame(const Mat<D>& frame) {
  const Mat<D> gram = frame * frame.transpose();
  if ((gram - Mat<D>::Identity()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("frame is not orthogonal");
  if (std::abs(frame.determinant() - 1.0) > 1e-12)
    throw std::invalid_argument("frame determinant is not +1");
}

namespace {

template <int D>
Mat<D> step_rotation(const ChainAngles<D>& angles, int j) {
  if constexpr (D == 2)
    return rotation_matrix(angles.theta[j]);
  else
    return rotation_matrix(angles.theta[j], angles.psi[j]);
}

template <int D>
void check_synthesis_args(const ChainAngles<D>& angles, const Pose<D>& pose,
                          double delta) {
  if (angles.theta.size() < 1)
    throw std::invalid_argument("need at least one turning angle (m >= 3)");
  if constexpr (D == 3) {
    if (angles.psi.size() != angles.theta.size())
      throw std::invalid_argument("psi and theta lengths differ");
  }
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  const int m = angles.atoms();
  if (pose.ref_index < 0 || pose.ref_index > m - 2)
    throw std::invalid_argument("reference index outside [0, m-2]");
  validate_frame<D>(pose.frame);
}

}  // namespace

template <int D>
ChainState<D> synthesize_chain(const ChainAngles<D>& angles,
                               const Pose<D>& pose, double delta) {
  check_synthesis_args(angles, pose, delta);
  const int m = angles.atoms();
  const int r = pose.ref_index;

  ChainState<D> state;
  state.frames.assign(m - 1, Mat<D>::Zero());
  state.frames[r] = pose.frame;
  for (int j = r; j < m - 2; ++j)
    state.frames[j + 1] = step_rotation(angles, j) * state.frames[j];
  for (int j = r - 1; j >= 0; --j)
    state.frames[j] = step_rotation(angles, j).transpose() * state.frames[j + 1];

  state.points.resize(D, m);
  state.points.col(r) = pose.position;
  for (int j = r; j < m - 1; ++j)
    state.points.col(j + 1) =
        state.points.col(j) + delta * state.frames[j].row(D - 1).transpose();
  for (int j = r - 1; j >= 0; --j)
    state.points.col(j) =
        state.points.col(j + 1) - delta * state.frames[j].row(D - 1).transpose();
  return state;
}

template <int D>
DiscreteCurve<D> synthesize_curve(const ChainAngles<D>& angles,
                                  const Pose<D>& pose, double delta) {
  DiscreteCurve<D> curve;
  curve.points = synthesize_chain(angles, pose, delta).points;
  curve.delta = delta;
  return curve;
}

namespace {

// Tangents from consecutive differences, each normalized by its own length so
// slightly uneven measured chains still yield unit frames.
template <int D>
Eigen::Matrix<double, D, Eigen::Dynamic> unit_tangents(
    const DiscreteCurve<D>& curve, double tolerance) {
  const int m = curve.atoms();
  Eigen::VectorXd lengths(m - 1);
  for (int j = 0; j < m - 1; ++j)
    lengths[j] = (curve.points.col(j + 1) - curve.points.col(j)).norm();
  const double mean = lengths.mean();
  if (!(mean > 0.0)) throw std::invalid_argument("degenerate chain");
  for (int j = 0; j < m - 1; ++j) {
    if (std::abs(lengths[j] - mean) > tolerance * mean)
      throw std::invalid_argument(
          "spacing between atoms " + std::to_string(j) + " and " +
          std::to_string(j + 1) + " deviates from the common delta");
  }
  Eigen::Matrix<double, D, Eigen::Dynamic> t(D, m - 1);
  for (int j = 0; j < m - 1; ++j)
    t.col(j) = (curve.points.col(j + 1) - curve.points.col(j)) / lengths[j];
  return t;
}

}  // namespace

template <>
std::pair<ChainAngles<2>, Pose<2>> extract_angles(
    const DiscreteCurve<2>& curve, int ref_index,
    const ExtractOptions& options) {
  const int m = curve.atoms();
  if (m < 3) throw std::invalid_argument("need at least 3 atoms");
  if (ref_index < 0 || ref_index > m - 2)
    throw std::invalid_argument("reference index outside [0, m-2]");
  const auto t = unit_tangents(curve, options.spacing_tolerance);

  ChainAngles<2> angles;
  angles.theta.resize(m - 2);
  for (int j = 0; j < m - 2; ++j) {
    const double cross =
        t(0, j) * t(1, j + 1) - t(1, j) * t(0, j + 1);
    angles.theta[j] = std::atan2(-cross, t.col(j).dot(t.col(j + 1)));
  }

  Pose<2> pose;
  pose.ref_index = ref_index;
  pose.position = curve.points.col(ref_index);
  pose.frame.row(0) << t(1, ref_index), -t(0, ref_index);
  pose.frame.row(1) = t.col(ref_index).transpose();
  return {angles, pose};
}

template <>
std::pair<ChainAngles<3>, Pose<3>> extract_angles(
    const DiscreteCurve<3>& curve, int ref_index,
    const ExtractOptions& options) {
  const int m = curve.atoms();
  if (m < 3) throw std::invalid_argument("need at least 3 atoms");
  if (ref_index < 0 || ref_index > m - 2)
    throw std::invalid_argument("reference index outside [0, m-2]");
  const auto t = unit_tangents(curve, options.spacing_tolerance);

  // Binormals: fresh from the cross product where consecutive tangents are
  // independent, carried over collinear steps, backfilled at the head. A
  // fully straight chain takes an arbitrary but deterministic normal.
  Eigen::Matrix<double, 3, Eigen::Dynamic> b(3, m - 1);
  std::vector<bool> fresh(m - 1, false);
  int first_fresh = -1;
  for (int j = 1; j < m - 1; ++j) {
    const Vec<3> c = t.col(j - 1).cross(t.col(j));
    if (c.norm() >= 1e-10) {
      b.col(j) = c.normalized();
      fresh[j] = true;
      if (first_fresh < 0) first_fresh = j;
    } else {
      if (first_fresh >= 0)
        b.col(j) = b.col(j - 1);
      else
        b.col(j).setZero();
    }
  }
  if (first_fresh < 0) {
    Eigen::Index axis = 0;
    t.col(0).cwiseAbs().minCoeff(&axis);
    const Vec<3> seed = t.col(0).cross(Vec<3>::Unit(axis)).normalized();
    for (int j = 0; j < m - 1; ++j) b.col(j) = seed;
  } else {
    for (int j = 0; j < first_fresh; ++j) b.col(j) = b.col(first_fresh);
  }
  for (int j = 0; j < m - 1; ++j) {
    if (!fresh[j]) {
      // Carried binormals are only orthogonal to the local tangent up to the
      // collinearity threshold; project and renormalize.
      b.col(j) -= b.col(j).dot(t.col(j)) * t.col(j);
      b.col(j).normalize();
    }
  }

  std::vector<Mat<3>> frames(m - 1);
  for (int j = 0; j < m - 1; ++j) {
    frames[j].row(0) = b.col(j).cross(t.col(j)).transpose();
    frames[j].row(1) = b.col(j).transpose();
    frames[j].row(2) = t.col(j).transpose();
  }

  ChainAngles<3> angles;
  angles.theta.resize(m - 2);
  angles.psi.resize(m - 2);
  for (int j = 0; j < m - 2; ++j) {
    const Mat<3> r = frames[j + 1] * frames[j].transpose();
    angles.theta[j] = std::atan2(-r(1, 0), r(1, 1));
    angles.psi[j] = std::atan2(-r(0, 2), r(2, 2));
  }

  Pose<3> pose;
  pose.ref_index = ref_index;
  pose.position = curve.points.col(ref_index);
  pose.frame = frames[ref_index];
  return {angles, pose};
}

template void validate_frame<2>(const Mat<2>&);
template void validate_frame<3>(const Mat<3>&);
template ChainState<2> synthesize_chain(const ChainAngles<2>&, const Pose<2>&,
                                        double);
template ChainState<3> synthesize_chain(const ChainAngles<3>&, const Pose<3>&,
                                        double);
template DiscreteCurve<2> synthesize_curve(const ChainAngles<2>&,
                                           const Pose<2>&, double);
template DiscreteCurve<3> synthesize_curve(const ChainAngles<3>&,
                                           const Pose<3>&, double);

}  // namespace chainspec
