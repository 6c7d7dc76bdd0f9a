#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "chainspec/datasets.hpp"
#include "chainspec/spectral.hpp"

namespace chainspec {

// Expansion coefficients mapping spectral coordinates to angle deviations.
// When mask is set, only the listed (0-based) angle rows may vary; all other
// rows stay exactly zero through initialization, gradients and updates.
template <int D>
struct CoefficientMatrices {
  Eigen::MatrixXd A;  // (m-2) x K torsion rows
  Eigen::MatrixXd B;  // (m-2) x K bond rows, empty in 2D
  std::optional<std::vector<int>> mask;
};

template <int D>
CoefficientMatrices<D> zero_coefficients(
    int m, int K, std::optional<std::vector<int>> mask = std::nullopt);

// theta = theta0 + A phi, psi = psi0 + B phi. Values are not wrapped; the
// rotation matrices are periodic and the optimizer may roam.
template <int D>
ChainAngles<D> angles_for_particle(const CoefficientMatrices<D>& coeffs,
                                   const ChainAngles<D>& ref_angles,
                                   const Eigen::VectorXd& phi_i);

template <int D>
DiscreteCurve<D> predict_curve(const ParticleRecord<D>& particle,
                               const CoefficientMatrices<D>& coeffs,
                               const SpectralBasis& basis,
                               const ChainAngles<D>& ref_angles, double delta);

template <int D>
ProjectionImage predict_image(const ParticleRecord<D>& particle,
                              const CoefficientMatrices<D>& coeffs,
                              const SpectralBasis& basis,
                              const ChainAngles<D>& ref_angles, double delta,
                              const ForwardModelConfig& fwd_cfg);

enum class ImageKind { Noisy, Clean };

// (1/|batch|) sum_i |Yhat_i - Y_i|^2, against noisy measurements by default
// or the clean images for test evaluation.
template <int D>
double loss(const CoefficientMatrices<D>& coeffs,
            const std::vector<int>& batch, const Dataset<D>& dataset,
            const SpectralBasis& basis, const ChainAngles<D>& ref_angles,
            const ForwardModelConfig& fwd_cfg,
            ImageKind kind = ImageKind::Noisy);

// Exact reverse-mode gradient of loss with respect to (A, B); masked rows are
// returned as zero.
template <int D>
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> gradient(
    const CoefficientMatrices<D>& coeffs, const std::vector<int>& batch,
    const Dataset<D>& dataset, const SpectralBasis& basis,
    const ChainAngles<D>& ref_angles, const ForwardModelConfig& fwd_cfg,
    ImageKind kind = ImageKind::Noisy);

struct FitConfig {
  int epochs = 1;
  int batch_size = 1;
  double learning_rate = 0.1;
  std::uint64_t seed = 0;
  bool shuffle = true;
};

// Row 0 is the A = B = 0 baseline, then one row per completed epoch. steps
// counts cumulative mini-batch updates so epoch-based and iteration-based
// experiment descriptions can both be read off. Point-cloud errors are NaN
// when the test set is empty or lacks ground truth.
struct FitHistory {
  std::vector<int> epoch;
  std::vector<std::int64_t> steps;
  std::vector<double> train_loss;  // noisy images
  std::vector<double> test_loss;   // clean images
  std::vector<double> max_error;
  std::vector<double> avg_error;
};

template <int D>
std::pair<CoefficientMatrices<D>, FitHistory> sgd_fit(
    const Dataset<D>& dataset, const SpectralBasis& basis,
    const ChainAngles<D>& ref_angles, const ForwardModelConfig& fwd_cfg,
    const FitConfig& fit_cfg,
    std::optional<std::vector<int>> mask = std::nullopt);

}  // namespace chainspec
