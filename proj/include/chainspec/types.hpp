#pragma once

#include <Eigen/Dense>

namespace chainspec {

template <int D>
using Vec = Eigen::Matrix<double, D, 1>;
template <int D>
using Mat = Eigen::Matrix<double, D, D>;

// Chain of m atoms with (nominally) constant spacing delta; atoms are columns.
template <int D>
struct DiscreteCurve {
  Eigen::Matrix<double, D, Eigen::Dynamic> points;
  double delta = 0.0;

  int atoms() const { return static_cast<int>(points.cols()); }
};

// Turning angles of an m-atom chain. theta holds m-2 entries; psi is the bond
// angle sequence used in 3D (same length there, empty in 2D). Canonical values
// lie in [-pi, pi], but the struct itself does not clamp: the optimizer is
// allowed to push entries out of range between steps.
template <int D>
struct ChainAngles {
  Eigen::VectorXd theta;
  Eigen::VectorXd psi;

  int atoms() const { return static_cast<int>(theta.size()) + 2; }
};

// State of the reference atom anchoring the recursion. ref_index is 0-based
// and must be < m-1, so the reference atom carries a frame. The frame's rows
// are the local axes with the tangent last.
template <int D>
struct Pose {
  Vec<D> position = Vec<D>::Zero();
  Mat<D> frame = Mat<D>::Identity();
  int ref_index = 0;
};

}  // namespace chainspec
