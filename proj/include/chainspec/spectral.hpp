#pragma once

#include <Eigen/Dense>

namespace chainspec {

struct GraphConfig {
  enum class Kernel { Gaussian, Knn };
  Kernel kernel = Kernel::Gaussian;
  double sigma = 1.0;  // gaussian kernel width
  int k = 1;           // neighbour count for knn
  // weights strictly below this are zeroed after kernel evaluation
  double sparsify_threshold = 0.0;
};

// Pairwise similarity matrix over particles; betas holds one vector per
// column. Gaussian: W_ij = exp(-|b_i - b_j|^2 / (2 sigma^2)) with a zero
// diagonal. Knn: symmetric binary adjacency (i among j's k nearest or vice
// versa), distance ties broken by index.
Eigen::MatrixXd build_weights(const Eigen::MatrixXd& betas,
                              const GraphConfig& cfg);

// L = D^{-1/2} (D - W) D^{-1/2}. Throws on an isolated vertex, naming it.
Eigen::MatrixXd normalized_laplacian(const Eigen::MatrixXd& weights);

struct SpectralBasis {
  Eigen::VectorXd eigenvalues;  // ascending, length K
  Eigen::MatrixXd phi;          // n x K, orthonormal columns

  int n() const { return int(phi.rows()); }
  int K() const { return int(phi.cols()); }
};

// K smallest eigenpairs of a symmetric matrix via a dense decomposition.
// Column signs are fixed: the first entry of largest magnitude is positive.
SpectralBasis smallest_eigenpairs(const Eigen::MatrixXd& laplacian, int K);

}  // namespace chainspec
