#include "chainspec/recon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "chainspec/frenet.hpp"
#include "chainspec/kernels.hpp"
#include "chainspec/metrics.hpp"
#include "chainspec/runtime.hpp"

namespace chainspec {

namespace {

constexpr double kSqrt2Pi = 2.5066282746310002;
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::vector<char> allowed_rows(int rows,
                               const std::optional<std::vector<int>>& mask) {
  std::vector<char> allowed(std::size_t(rows), mask ? char(0) : char(1));
  if (mask)
    for (int r : *mask) {
      if (r < 0 || r >= rows)
        throw std::invalid_argument("mask row out of range");
      allowed[std::size_t(r)] = 1;
    }
  return allowed;
}

void zero_disallowed(Eigen::MatrixXd& mat, const std::vector<char>& allowed) {
  for (Eigen::Index r = 0; r < mat.rows(); ++r)
    if (!allowed[std::size_t(r)]) mat.row(r).setZero();
}

template <int D>
void check_fit_inputs(const CoefficientMatrices<D>& coeffs,
                      const Dataset<D>& dataset, const SpectralBasis& basis,
                      const ChainAngles<D>& ref_angles,
                      const ForwardModelConfig& fwd_cfg) {
  const Eigen::Index rows = ref_angles.theta.size();
  if (ref_angles.atoms() != dataset.atoms())
    throw std::invalid_argument("reference angles do not match dataset atoms");
  if (coeffs.A.rows() != rows || coeffs.A.cols() != basis.K())
    throw std::invalid_argument("coefficient matrix A has the wrong shape");
  if (D == 3 && (coeffs.B.rows() != rows || coeffs.B.cols() != basis.K()))
    throw std::invalid_argument("coefficient matrix B has the wrong shape");
  if (basis.n() != dataset.n())
    throw std::invalid_argument("basis rows do not match particle count");
  validate_forward_config(fwd_cfg);
  if (fwd_cfg.grid.dim != D - 1)
    throw std::invalid_argument("projection grid dim must be D-1");
  if (!(dataset.delta > 0.0))
    throw std::invalid_argument("dataset spacing must be > 0");
}

template <int D>
void check_batch(const std::vector<int>& batch, const Dataset<D>& dataset,
                 ImageKind kind, Eigen::Index total) {
  if (batch.empty()) throw std::invalid_argument("batch is empty");
  for (int idx : batch) {
    if (idx < 0 || idx >= dataset.n())
      throw std::invalid_argument("batch index out of range");
    const auto& p = dataset.particles[std::size_t(idx)];
    const Eigen::VectorXd& target =
        kind == ImageKind::Noisy ? p.image.values : p.clean_image.values;
    if (target.size() != total)
      throw std::invalid_argument("stored image does not match grid");
  }
}

template <int D>
const Eigen::VectorXd& target_values(const ParticleRecord<D>& p,
                                     ImageKind kind) {
  return kind == ImageKind::Noisy ? p.image.values : p.clean_image.values;
}

std::vector<double> grid_coords(const ProjectionGrid& grid, int axis) {
  std::vector<double> c(std::size_t(grid.samples));
  for (int i = 0; i < grid.samples; ++i) c[std::size_t(i)] = grid.coord(axis, i);
  return c;
}

// Forward pass that keeps every atom's per-axis weight row so the backward
// pass can turn an image adjoint into per-atom position adjoints without
// recomputing exponentials.
template <int D>
struct CachedForward {
  ChainState<D> state;
  std::vector<double> w0, w1;  // atoms x samples, row-major
  Eigen::VectorXd raw;         // pre-PSF image
};

template <int D>
CachedForward<D> forward_cached(const ChainAngles<D>& angles,
                                const Pose<D>& pose, double delta,
                                const ForwardModelConfig& cfg,
                                const std::vector<double>& c0,
                                const std::vector<double>& c1) {
  const auto& k = kernels::active();
  const int n = cfg.grid.samples;
  const double inv2s2 = 1.0 / (2.0 * cfg.sigma * cfg.sigma);
  const double amp = cfg.nu * cfg.sigma * kSqrt2Pi;

  CachedForward<D> fw;
  fw.state = synthesize_chain(angles, pose, delta);
  const int m = int(fw.state.points.cols());
  fw.raw = Eigen::VectorXd::Zero(Eigen::Index(cfg.grid.total()));
  fw.w0.resize(std::size_t(m) * std::size_t(n));
  if (D == 3) fw.w1.resize(std::size_t(m) * std::size_t(n));

  for (int j = 0; j < m; ++j) {
    double* w0j = fw.w0.data() + std::size_t(j) * std::size_t(n);
    k.gauss_weights(w0j, c0.data(), std::size_t(n), fw.state.points(0, j),
                    inv2s2);
    if constexpr (D == 2) {
      k.axpy(fw.raw.data(), w0j, std::size_t(n), amp);
    } else {
      double* w1j = fw.w1.data() + std::size_t(j) * std::size_t(n);
      k.gauss_weights(w1j, c1.data(), std::size_t(n), fw.state.points(1, j),
                      inv2s2);
      k.outer_add(fw.raw.data(), w0j, w1j, std::size_t(n), std::size_t(n), amp);
    }
  }
  return fw;
}

// Reverse pass: image adjoint -> per-atom adjoints -> tangent adjoints ->
// angle adjoints, walking the frame recursion back toward the reference atom
// from both chain ends.
template <int D>
void backprop_angles(const CachedForward<D>& fw, const ChainAngles<D>& angles,
                     int ref_index, double delta,
                     const ForwardModelConfig& cfg,
                     const std::vector<double>& c0,
                     const std::vector<double>& c1, const Eigen::VectorXd& g,
                     Eigen::VectorXd& dtheta, Eigen::VectorXd& dpsi) {
  const auto& k = kernels::active();
  const int n = cfg.grid.samples;
  const int m = int(fw.state.points.cols());
  const double inv_s2 = 1.0 / (cfg.sigma * cfg.sigma);
  const double amp = cfg.nu * cfg.sigma * kSqrt2Pi;

  Eigen::MatrixXd gatoms = Eigen::MatrixXd::Zero(D, m);
  std::vector<double> u(static_cast<std::size_t>(n));
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int j = 0; j < m; ++j) {
    const double* w0j = fw.w0.data() + std::size_t(j) * std::size_t(n);
    double s0 = 0.0, s1 = 0.0;
    if constexpr (D == 2) {
      k.moment01(g.data(), w0j, c0.data(), std::size_t(n), fw.state.points(0, j),
                 &s0, &s1);
      gatoms(0, j) = amp * inv_s2 * s1;
    } else {
      const double* w1j = fw.w1.data() + std::size_t(j) * std::size_t(n);
      k.matvec_rows(g.data(), std::size_t(n), std::size_t(n), w1j, u.data());
      k.moment01(u.data(), w0j, c0.data(), std::size_t(n),
                 fw.state.points(0, j), &s0, &s1);
      gatoms(0, j) = amp * inv_s2 * s1;
      k.matvec_cols(g.data(), std::size_t(n), std::size_t(n), w0j, v.data());
      k.moment01(v.data(), w1j, c1.data(), std::size_t(n),
                 fw.state.points(1, j), &s0, &s1);
      gatoms(1, j) = amp * inv_s2 * s1;
    }
  }

  // dL/dt_l = delta * G_l: tangent l carries every atom past it, away from
  // the reference.
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(D, m - 1);
  {
    Vec<D> acc = Vec<D>::Zero();
    for (int l = m - 2; l >= ref_index; --l) {
      acc += gatoms.col(l + 1);
      G.col(l) = acc;
    }
    acc.setZero();
    for (int l = 0; l < ref_index; ++l) {
      acc -= gatoms.col(l);
      G.col(l) = acc;
    }
  }

  dtheta.setZero(m - 2);
  if constexpr (D == 3) dpsi.setZero(m - 2);

  // Above the reference F_{l} = R(angles_{l-1}) F_{l-1}; accumulate dL/dF_l
  // and peel one rotation per step.
  Mat<D> acc = Mat<D>::Zero();
  for (int l = m - 2; l >= ref_index + 1; --l) {
    acc.row(D - 1) += delta * G.col(l).transpose();
    const int a = l - 1;
    const Mat<D> dR = acc * fw.state.frames[std::size_t(a)].transpose();
    if constexpr (D == 2) {
      dtheta[a] += dR.cwiseProduct(rotation_matrix_dtheta(angles.theta[a])).sum();
      acc = rotation_matrix(angles.theta[a]).transpose() * acc;
    } else {
      const double th = angles.theta[a], ps = angles.psi[a];
      dtheta[a] += dR.cwiseProduct(rotation_matrix_dtheta(th, ps)).sum();
      dpsi[a] += dR.cwiseProduct(rotation_matrix_dpsi(th, ps)).sum();
      acc = rotation_matrix(th, ps).transpose() * acc;
    }
  }
  // Below it F_l = R(angles_l)^T F_{l+1}.
  acc.setZero();
  for (int l = 0; l <= ref_index - 1; ++l) {
    acc.row(D - 1) += delta * G.col(l).transpose();
    const Mat<D> dR = fw.state.frames[std::size_t(l) + 1] * acc.transpose();
    if constexpr (D == 2) {
      dtheta[l] += dR.cwiseProduct(rotation_matrix_dtheta(angles.theta[l])).sum();
      acc = rotation_matrix(angles.theta[l]) * acc;
    } else {
      const double th = angles.theta[l], ps = angles.psi[l];
      dtheta[l] += dR.cwiseProduct(rotation_matrix_dtheta(th, ps)).sum();
      dpsi[l] += dR.cwiseProduct(rotation_matrix_dpsi(th, ps)).sum();
      acc = rotation_matrix(th, ps) * acc;
    }
  }
}

}  // namespace

template <int D>
CoefficientMatrices<D> zero_coefficients(int m, int K,
                                         std::optional<std::vector<int>> mask) {
  if (m < 3) throw std::invalid_argument("need at least three atoms");
  if (K < 1) throw std::invalid_argument("need at least one basis column");
  CoefficientMatrices<D> coeffs;
  coeffs.A = Eigen::MatrixXd::Zero(m - 2, K);
  if (D == 3) coeffs.B = Eigen::MatrixXd::Zero(m - 2, K);
  if (mask) {
    std::sort(mask->begin(), mask->end());
    mask->erase(std::unique(mask->begin(), mask->end()), mask->end());
    allowed_rows(m - 2, mask);  // range check
  }
  coeffs.mask = std::move(mask);
  return coeffs;
}

template <int D>
ChainAngles<D> angles_for_particle(const CoefficientMatrices<D>& coeffs,
                                   const ChainAngles<D>& ref_angles,
                                   const Eigen::VectorXd& phi_i) {
  if (coeffs.A.rows() != ref_angles.theta.size())
    throw std::invalid_argument("coefficient rows do not match angle count");
  if (coeffs.A.cols() != phi_i.size())
    throw std::invalid_argument("coefficient columns do not match phi size");
  ChainAngles<D> angles;
  angles.theta = ref_angles.theta + coeffs.A * phi_i;
  if constexpr (D == 3) angles.psi = ref_angles.psi + coeffs.B * phi_i;
  return angles;
}

template <int D>
DiscreteCurve<D> predict_curve(const ParticleRecord<D>& particle,
                               const CoefficientMatrices<D>& coeffs,
                               const SpectralBasis& basis,
                               const ChainAngles<D>& ref_angles, double delta) {
  if (particle.index < 0 || particle.index >= basis.n())
    throw std::invalid_argument("particle index outside basis");
  const Eigen::VectorXd phi_i = basis.phi.row(particle.index).transpose();
  const ChainAngles<D> angles =
      angles_for_particle(coeffs, ref_angles, phi_i);
  return synthesize_curve(angles, particle.pose, delta);
}

template <int D>
ProjectionImage predict_image(const ParticleRecord<D>& particle,
                              const CoefficientMatrices<D>& coeffs,
                              const SpectralBasis& basis,
                              const ChainAngles<D>& ref_angles, double delta,
                              const ForwardModelConfig& fwd_cfg) {
  return project(predict_curve(particle, coeffs, basis, ref_angles, delta),
                 fwd_cfg);
}

template <int D>
double loss(const CoefficientMatrices<D>& coeffs, const std::vector<int>& batch,
            const Dataset<D>& dataset, const SpectralBasis& basis,
            const ChainAngles<D>& ref_angles,
            const ForwardModelConfig& fwd_cfg, ImageKind kind) {
  check_fit_inputs(coeffs, dataset, basis, ref_angles, fwd_cfg);
  const auto& k = kernels::active();
  const Eigen::Index total = Eigen::Index(fwd_cfg.grid.total());
  check_batch(batch, dataset, kind, total);

  std::vector<double> partial(batch.size(), 0.0);
  parallel_chunks(batch.size(), [&](std::size_t begin, std::size_t end, int) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto& p = dataset.particles[std::size_t(batch[i])];
      const Eigen::VectorXd& target = target_values(p, kind);
      const ProjectionImage pred =
          predict_image(p, coeffs, basis, ref_angles, dataset.delta, fwd_cfg);
      partial[i] = k.sqdiff_sum(pred.values.data(), target.data(),
                                std::size_t(total));
    }
  });
  double sum = 0.0;
  for (double s : partial) sum += s;
  return sum / double(batch.size());
}

template <int D>
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> gradient(
    const CoefficientMatrices<D>& coeffs, const std::vector<int>& batch,
    const Dataset<D>& dataset, const SpectralBasis& basis,
    const ChainAngles<D>& ref_angles, const ForwardModelConfig& fwd_cfg,
    ImageKind kind) {
  check_fit_inputs(coeffs, dataset, basis, ref_angles, fwd_cfg);
  const Eigen::Index total = Eigen::Index(fwd_cfg.grid.total());
  check_batch(batch, dataset, kind, total);
  const double gscale = 2.0 / double(batch.size());

  const std::vector<double> c0 = grid_coords(fwd_cfg.grid, 0);
  const std::vector<double> c1 =
      fwd_cfg.grid.dim >= 2 ? grid_coords(fwd_cfg.grid, 1)
                            : std::vector<double>();

  std::vector<Eigen::VectorXd> dth(batch.size()), dps(batch.size());
  parallel_chunks(batch.size(), [&](std::size_t begin, std::size_t end, int) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto& p = dataset.particles[std::size_t(batch[i])];
      const Eigen::VectorXd& target = target_values(p, kind);
      const Eigen::VectorXd phi_i = basis.phi.row(batch[i]).transpose();
      const ChainAngles<D> angles =
          angles_for_particle(coeffs, ref_angles, phi_i);
      const CachedForward<D> fw =
          forward_cached(angles, p.pose, dataset.delta, fwd_cfg, c0, c1);

      Eigen::VectorXd pred = fw.raw;
      if (fwd_cfg.psf.size() > 0)
        pred = convolve_same(fw.raw, fwd_cfg.grid, fwd_cfg.psf);
      Eigen::VectorXd g = gscale * (pred - target);
      if (fwd_cfg.psf.size() > 0)
        g = convolve_adjoint_same(g, fwd_cfg.grid, fwd_cfg.psf);

      backprop_angles(fw, angles, p.pose.ref_index, dataset.delta, fwd_cfg, c0,
                      c1, g, dth[i], dps[i]);
    }
  });

  Eigen::MatrixXd dA = Eigen::MatrixXd::Zero(coeffs.A.rows(), coeffs.A.cols());
  Eigen::MatrixXd dB;
  if (D == 3) dB = Eigen::MatrixXd::Zero(coeffs.B.rows(), coeffs.B.cols());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Eigen::VectorXd phi_i = basis.phi.row(batch[i]).transpose();
    dA += dth[i] * phi_i.transpose();
    if (D == 3) dB += dps[i] * phi_i.transpose();
  }
  const std::vector<char> allowed =
      allowed_rows(int(coeffs.A.rows()), coeffs.mask);
  zero_disallowed(dA, allowed);
  if (D == 3) zero_disallowed(dB, allowed);
  return {std::move(dA), std::move(dB)};
}

template <int D>
std::pair<CoefficientMatrices<D>, FitHistory> sgd_fit(
    const Dataset<D>& dataset, const SpectralBasis& basis,
    const ChainAngles<D>& ref_angles, const ForwardModelConfig& fwd_cfg,
    const FitConfig& fit_cfg, std::optional<std::vector<int>> mask) {
  if (fit_cfg.epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (fit_cfg.batch_size < 1)
    throw std::invalid_argument("batch size must be >= 1");
  if (!(fit_cfg.learning_rate > 0.0))
    throw std::invalid_argument("learning rate must be > 0");

  const std::vector<int> train = dataset.indices(Split::Train);
  const std::vector<int> test = dataset.indices(Split::Test);
  if (train.empty()) throw std::invalid_argument("training split is empty");
  if (std::size_t(fit_cfg.batch_size) > train.size())
    throw std::invalid_argument("batch size exceeds the training set");

  CoefficientMatrices<D> coeffs =
      zero_coefficients<D>(dataset.atoms(), basis.K(), std::move(mask));
  check_fit_inputs(coeffs, dataset, basis, ref_angles, fwd_cfg);

  FitHistory hist;
  std::int64_t steps = 0;
  const auto record = [&](int epoch) {
    hist.epoch.push_back(epoch);
    hist.steps.push_back(steps);
    hist.train_loss.push_back(loss(coeffs, train, dataset, basis, ref_angles,
                                   fwd_cfg, ImageKind::Noisy));
    double test_loss = kNan, max_err = kNan, avg_err = kNan;
    if (!test.empty()) {
      test_loss = loss(coeffs, test, dataset, basis, ref_angles, fwd_cfg,
                       ImageKind::Clean);
      std::vector<DiscreteCurve<D>> truth, pred;
      for (int idx : test) {
        const auto& p = dataset.particles[std::size_t(idx)];
        if (!p.ground_truth) continue;
        truth.push_back(*p.ground_truth);
        pred.push_back(
            predict_curve(p, coeffs, basis, ref_angles, dataset.delta));
      }
      if (!truth.empty()) {
        const ErrorReport rep = error_report<D>(truth, pred);
        max_err = rep.max_error;
        avg_err = rep.avg_error;
      }
    }
    hist.test_loss.push_back(test_loss);
    hist.max_error.push_back(max_err);
    hist.avg_error.push_back(avg_err);
  };

  record(0);
  std::mt19937_64 rng(fit_cfg.seed);
  std::vector<int> order = train;
  for (int epoch = 1; epoch <= fit_cfg.epochs; ++epoch) {
    if (fit_cfg.shuffle) std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t at = 0; at < order.size();
         at += std::size_t(fit_cfg.batch_size)) {
      const std::size_t stop =
          std::min(order.size(), at + std::size_t(fit_cfg.batch_size));
      const std::vector<int> batch(order.begin() + Eigen::Index(at),
                                   order.begin() + Eigen::Index(stop));
      const auto [dA, dB] = gradient(coeffs, batch, dataset, basis, ref_angles,
                                     fwd_cfg, ImageKind::Noisy);
      coeffs.A -= fit_cfg.learning_rate * dA;
      if (D == 3) coeffs.B -= fit_cfg.learning_rate * dB;
      ++steps;
    }
    record(epoch);
  }
  return {std::move(coeffs), std::move(hist)};
}

template struct CoefficientMatrices<2>;
template struct CoefficientMatrices<3>;

template CoefficientMatrices<2> zero_coefficients<2>(
    int, int, std::optional<std::vector<int>>);
template CoefficientMatrices<3> zero_coefficients<3>(
    int, int, std::optional<std::vector<int>>);

template ChainAngles<2> angles_for_particle<2>(const CoefficientMatrices<2>&,
                                               const ChainAngles<2>&,
                                               const Eigen::VectorXd&);
template ChainAngles<3> angles_for_particle<3>(const CoefficientMatrices<3>&,
                                               const ChainAngles<3>&,
                                               const Eigen::VectorXd&);

template DiscreteCurve<2> predict_curve<2>(const ParticleRecord<2>&,
                                           const CoefficientMatrices<2>&,
                                           const SpectralBasis&,
                                           const ChainAngles<2>&, double);
template DiscreteCurve<3> predict_curve<3>(const ParticleRecord<3>&,
                                           const CoefficientMatrices<3>&,
                                           const SpectralBasis&,
                                           const ChainAngles<3>&, double);

template ProjectionImage predict_image<2>(const ParticleRecord<2>&,
                                          const CoefficientMatrices<2>&,
                                          const SpectralBasis&,
                                          const ChainAngles<2>&, double,
                                          const ForwardModelConfig&);
template ProjectionImage predict_image<3>(const ParticleRecord<3>&,
                                          const CoefficientMatrices<3>&,
                                          const SpectralBasis&,
                                          const ChainAngles<3>&, double,
                                          const ForwardModelConfig&);

template double loss<2>(const CoefficientMatrices<2>&, const std::vector<int>&,
                        const Dataset<2>&, const SpectralBasis&,
                        const ChainAngles<2>&, const ForwardModelConfig&,
                        ImageKind);
template double loss<3>(const CoefficientMatrices<3>&, const std::vector<int>&,
                        const Dataset<3>&, const SpectralBasis&,
                        const ChainAngles<3>&, const ForwardModelConfig&,
                        ImageKind);

template std::pair<Eigen::MatrixXd, Eigen::MatrixXd> gradient<2>(
    const CoefficientMatrices<2>&, const std::vector<int>&, const Dataset<2>&,
    const SpectralBasis&, const ChainAngles<2>&, const ForwardModelConfig&,
    ImageKind);
template std::pair<Eigen::MatrixXd, Eigen::MatrixXd> gradient<3>(
    const CoefficientMatrices<3>&, const std::vector<int>&, const Dataset<3>&,
    const SpectralBasis&, const ChainAngles<3>&, const ForwardModelConfig&,
    ImageKind);

template std::pair<CoefficientMatrices<2>, FitHistory> sgd_fit<2>(
    const Dataset<2>&, const SpectralBasis&, const ChainAngles<2>&,
    const ForwardModelConfig&, const FitConfig&,
    std::optional<std::vector<int>>);
template std::pair<CoefficientMatrices<3>, FitHistory> sgd_fit<3>(
    const Dataset<3>&, const SpectralBasis&, const ChainAngles<3>&,
    const ForwardModelConfig&, const FitConfig&,
    std::optional<std::vector<int>>);

}  // namespace chainspec
