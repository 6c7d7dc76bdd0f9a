#include "chainspec/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "chainspec/kernels.hpp"
#include "chainspec/runtime.hpp"

namespace chainspec {

namespace {

// squared pairwise distances via the Gram matrix, clamped against the small
// negatives cancellation produces
Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& betas) {
  const Eigen::Index n = betas.cols();
  Eigen::MatrixXd gram(n, n);
  parallel_chunks(std::size_t(n), [&](std::size_t b, std::size_t e, int) {
    const Eigen::Index cols = Eigen::Index(e - b);
    gram.middleCols(Eigen::Index(b), cols).noalias() =
        betas.transpose() * betas.middleCols(Eigen::Index(b), cols);
  });
  Eigen::VectorXd sq = gram.diagonal();
  Eigen::MatrixXd d2 =
      ((-2.0 * gram).colwise() + sq).rowwise() + sq.transpose();
  return d2.cwiseMax(0.0);
}

}  // namespace

Eigen::MatrixXd build_weights(const Eigen::MatrixXd& betas,
                              const GraphConfig& cfg) {
  const Eigen::Index n = betas.cols();
  if (n < 2) throw std::invalid_argument("need at least 2 particles");
  if (cfg.sparsify_threshold < 0.0)
    throw std::invalid_argument("sparsify threshold must be >= 0");

  Eigen::MatrixXd w;
  if (cfg.kernel == GraphConfig::Kernel::Gaussian) {
    if (!(cfg.sigma > 0.0))
      throw std::invalid_argument("gaussian kernel sigma must be > 0");
    Eigen::MatrixXd d2 = squared_distances(betas);
    const double scale = -1.0 / (2.0 * cfg.sigma * cfg.sigma);
    w.resize(n, n);
    parallel_chunks(std::size_t(n), [&](std::size_t b, std::size_t e, int) {
      for (std::size_t c = b; c < e; ++c) {
        Eigen::VectorXd ex = d2.col(Eigen::Index(c)) * scale;
        kernels::active().vexp(w.col(Eigen::Index(c)).data(), ex.data(),
                               std::size_t(n));
      }
    });
    w.diagonal().setZero();
  } else {
    if (cfg.k < 1 || cfg.k >= n)
      throw std::invalid_argument("knn k must satisfy 1 <= k < n");
    Eigen::MatrixXd d2 = squared_distances(betas);
    w = Eigen::MatrixXd::Zero(n, n);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) {
      std::iota(order.begin(), order.end(), Eigen::Index(0));
      std::sort(order.begin(), order.end(),
                [&](Eigen::Index a, Eigen::Index b) {
                  if (d2(a, j) != d2(b, j)) return d2(a, j) < d2(b, j);
                  return a < b;
                });
      int taken = 0;
      for (Eigen::Index idx : order) {
        if (idx == j) continue;
        w(idx, j) = 1.0;
        if (++taken == cfg.k) break;
      }
    }
    // symmetric OR: a neighbour in either direction keeps the edge
    w = w.cwiseMax(w.transpose().eval());
  }

  if (cfg.sparsify_threshold > 0.0)
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i)
        if (w(i, j) < cfg.sparsify_threshold) w(i, j) = 0.0;
  return w;
}

Eigen::MatrixXd normalized_laplacian(const Eigen::MatrixXd& weights) {
  const Eigen::Index n = weights.rows();
  if (weights.cols() != n) throw std::invalid_argument("weights must be square");
  Eigen::VectorXd degree = weights.rowwise().sum();
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(degree[i] > 0.0))
      throw std::invalid_argument("vertex " + std::to_string(i) +
                                  " is isolated (zero degree)");
  Eigen::VectorXd inv_sqrt = degree.array().rsqrt();
  Eigen::MatrixXd lap =
      -(inv_sqrt * inv_sqrt.transpose()).cwiseProduct(weights);
  for (Eigen::Index i = 0; i < n; ++i)
    lap(i, i) = 1.0 - weights(i, i) / degree[i];
  return lap;
}

SpectralBasis smallest_eigenpairs(const Eigen::MatrixXd& laplacian, int K) {
  const Eigen::Index n = laplacian.rows();
  if (laplacian.cols() != n)
    throw std::invalid_argument("laplacian must be square");
  if (K < 1 || Eigen::Index(K) > n)
    throw std::invalid_argument("K must satisfy 1 <= K <= n");
  const double asym = (laplacian - laplacian.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10)
    throw std::invalid_argument("matrix is not symmetric (max asymmetry " +
                                std::to_string(asym) + ")");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("eigendecomposition failed to converge");

  SpectralBasis basis;
  basis.eigenvalues = solver.eigenvalues().head(K);
  basis.phi = solver.eigenvectors().leftCols(K);
  for (int k = 0; k < K; ++k) {
    Eigen::Index pivot = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double mag = std::abs(basis.phi(i, k));
      if (mag > best) {
        best = mag;
        pivot = i;
      }
    }
    if (basis.phi(pivot, k) < 0.0) basis.phi.col(k) = -basis.phi.col(k);
  }
  return basis;
}

}  // namespace chainspec
