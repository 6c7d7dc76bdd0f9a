#include "chainspec/forward.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "chainspec/kernels.hpp"

namespace chainspec {

namespace {
constexpr double kSqrt2Pi = 2.5066282746310002;
}

void validate_grid(const ProjectionGrid& grid) {
  if (grid.dim < 1 || grid.dim > 3)
    throw std::invalid_argument("grid dim must be 1, 2 or 3");
  if (grid.samples < 2) throw std::invalid_argument("grid needs >= 2 samples");
  for (int a = 0; a < grid.dim; ++a)
    if (!(grid.max[a] > grid.min[a]))
      throw std::invalid_argument("grid extent must have max > min");
}

bool grids_equal(const ProjectionGrid& a, const ProjectionGrid& b) {
  if (a.dim != b.dim || a.samples != b.samples) return false;
  for (int ax = 0; ax < a.dim; ++ax)
    if (a.min[ax] != b.min[ax] || a.max[ax] != b.max[ax]) return false;
  return true;
}

void validate_forward_config(const ForwardModelConfig& cfg) {
  if (!(cfg.nu > 0.0)) throw std::invalid_argument("nu must be > 0");
  if (!(cfg.sigma > 0.0)) throw std::invalid_argument("sigma must be > 0");
  validate_grid(cfg.grid);
  if (cfg.psf.size() > 0) {
    if (cfg.psf.rows() % 2 == 0 || cfg.psf.cols() % 2 == 0)
      throw std::invalid_argument("psf side lengths must be odd");
    if (!cfg.psf.allFinite())
      throw std::invalid_argument("psf entries must be finite");
  }
}

template <int D>
double density_at(const DiscreteCurve<D>& curve, const ForwardModelConfig& cfg,
                  const Vec<D>& x) {
  const double inv2s2 = 1.0 / (2.0 * cfg.sigma * cfg.sigma);
  double sum = 0.0;
  for (int j = 0; j < curve.atoms(); ++j)
    sum += std::exp(-(x - curve.points.col(j)).squaredNorm() * inv2s2);
  return cfg.nu * sum;
}

namespace {

// Per-axis Gaussian weights of one atom; products over axes reproduce the
// isotropic exponential exactly.
void axis_weights(std::vector<double>& w, const std::vector<double>& coords,
                  double center, double inv2s2) {
  kernels::active().gauss_weights(w.data(), coords.data(), coords.size(),
                                  center, inv2s2);
}

std::vector<double> grid_coords(const ProjectionGrid& grid, int axis) {
  std::vector<double> c(grid.samples);
  for (int i = 0; i < grid.samples; ++i) c[i] = grid.coord(axis, i);
  return c;
}

}  // namespace

template <int D>
ProjectionImage project(const DiscreteCurve<D>& curve,
                        const ForwardModelConfig& cfg) {
  validate_forward_config(cfg);
  if (cfg.grid.dim != D - 1)
    throw std::invalid_argument("projection grid dim must be D-1");
  const auto& k = kernels::active();
  const int n = cfg.grid.samples;
  const double inv2s2 = 1.0 / (2.0 * cfg.sigma * cfg.sigma);
  const double amp = cfg.nu * cfg.sigma * kSqrt2Pi;

  ProjectionImage img;
  img.grid = cfg.grid;
  img.values = Eigen::VectorXd::Zero(Eigen::Index(cfg.grid.total()));

  if constexpr (D == 2) {
    const auto c0 = grid_coords(cfg.grid, 0);
    std::vector<double> w0(n);
    for (int j = 0; j < curve.atoms(); ++j) {
      axis_weights(w0, c0, curve.points(0, j), inv2s2);
      k.axpy(img.values.data(), w0.data(), w0.size(), amp);
    }
  } else {
    const auto c0 = grid_coords(cfg.grid, 0);
    const auto c1 = grid_coords(cfg.grid, 1);
    std::vector<double> w0(n), w1(n);
    for (int j = 0; j < curve.atoms(); ++j) {
      axis_weights(w0, c0, curve.points(0, j), inv2s2);
      axis_weights(w1, c1, curve.points(1, j), inv2s2);
      k.outer_add(img.values.data(), w0.data(), w1.data(), n, n, amp);
    }
  }
  if (cfg.psf.size() > 0)
    img.values = convolve_same(img.values, img.grid, cfg.psf);
  return img;
}

template <int D>
ProjectionImage density_image(const DiscreteCurve<D>& curve,
                              const ForwardModelConfig& cfg) {
  validate_forward_config(cfg);
  if (cfg.grid.dim != D)
    throw std::invalid_argument("density grid dim must equal D");
  const auto& k = kernels::active();
  const int n = cfg.grid.samples;
  const double inv2s2 = 1.0 / (2.0 * cfg.sigma * cfg.sigma);

  ProjectionImage img;
  img.grid = cfg.grid;
  img.values = Eigen::VectorXd::Zero(Eigen::Index(cfg.grid.total()));

  if constexpr (D == 2) {
    const auto c0 = grid_coords(cfg.grid, 0);
    const auto c1 = grid_coords(cfg.grid, 1);
    std::vector<double> w0(n), w1(n);
    for (int j = 0; j < curve.atoms(); ++j) {
      axis_weights(w0, c0, curve.points(0, j), inv2s2);
      axis_weights(w1, c1, curve.points(1, j), inv2s2);
      k.outer_add(img.values.data(), w0.data(), w1.data(), n, n, cfg.nu);
    }
  } else {
    const auto c0 = grid_coords(cfg.grid, 0);
    const auto c1 = grid_coords(cfg.grid, 1);
    const auto c2 = grid_coords(cfg.grid, 2);
    std::vector<double> w0(n), w1(n), w2(n);
    for (int j = 0; j < curve.atoms(); ++j) {
      axis_weights(w0, c0, curve.points(0, j), inv2s2);
      axis_weights(w1, c1, curve.points(1, j), inv2s2);
      axis_weights(w2, c2, curve.points(2, j), inv2s2);
      for (int r = 0; r < n; ++r)
        k.outer_add(img.values.data() + std::size_t(r) * n * n, w1.data(),
                    w2.data(), n, n, cfg.nu * w0[r]);
    }
  }
  return img;
}

ProjectionImage add_noise(const ProjectionImage& image, double variance,
                          std::mt19937_64& rng) {
  if (variance < 0.0) throw std::invalid_argument("noise variance < 0");
  ProjectionImage out = image;
  if (variance == 0.0) return out;
  std::normal_distribution<double> noise(0.0, std::sqrt(variance));
  for (Eigen::Index i = 0; i < out.values.size(); ++i)
    out.values[i] += noise(rng);
  return out;
}

double snr(const std::vector<ProjectionImage>& clean_images,
           double noise_variance) {
  if (clean_images.empty())
    throw std::invalid_argument("snr needs at least one image");
  if (!(noise_variance > 0.0))
    throw std::invalid_argument("noise variance must be > 0");
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& img : clean_images) {
    sum += img.values.sum();
    count += std::size_t(img.values.size());
  }
  const double mean = sum / double(count);
  double ss = 0.0;
  for (const auto& img : clean_images)
    ss += (img.values.array() - mean).square().sum();
  return ss / double(count) / noise_variance;
}

namespace {

// shapes[0] is the slowest-varying axis
void image_shape(const ProjectionGrid& grid, int shape[3]) {
  shape[0] = shape[1] = shape[2] = 1;
  for (int a = 0; a < grid.dim; ++a) shape[3 - grid.dim + a] = grid.samples;
}

Eigen::VectorXd psf_pass(const Eigen::VectorXd& values,
                         const ProjectionGrid& grid, const Eigen::MatrixXd& psf,
                         bool adjoint) {
  if (psf.size() == 0) return values;
  if (grid.dim == 1 && psf.rows() != 1)
    throw std::invalid_argument("1D images need a single-row psf");
  int sh[3];
  image_shape(grid, sh);
  // kernel rows act on the image's second-slowest axis in 2D, on the only
  // axis in 1D (via the single-row layout)
  const int kr = int(psf.rows()), kc = int(psf.cols());
  const int cr = (kr - 1) / 2, cc = (kc - 1) / 2;
  const int nr = grid.dim == 2 ? sh[1] : 1;
  const int nc = sh[2];
  Eigen::VectorXd out = Eigen::VectorXd::Zero(values.size());
  for (int r = 0; r < nr; ++r) {
    for (int c = 0; c < nc; ++c) {
      double acc = 0.0;
      for (int u = 0; u < kr; ++u) {
        for (int v = 0; v < kc; ++v) {
          const int sr = adjoint ? r + (u - cr) : r - (u - cr);
          const int sc = adjoint ? c + (v - cc) : c - (v - cc);
          if (sr < 0 || sr >= nr || sc < 0 || sc >= nc) continue;
          acc += psf(u, v) * values[Eigen::Index(sr) * nc + sc];
        }
      }
      out[Eigen::Index(r) * nc + c] = acc;
    }
  }
  return out;
}

}  // namespace

Eigen::VectorXd convolve_same(const Eigen::VectorXd& values,
                              const ProjectionGrid& grid,
                              const Eigen::MatrixXd& psf) {
  return psf_pass(values, grid, psf, false);
}

Eigen::VectorXd convolve_adjoint_same(const Eigen::VectorXd& values,
                                      const ProjectionGrid& grid,
                                      const Eigen::MatrixXd& psf) {
  return psf_pass(values, grid, psf, true);
}

template double density_at<2>(const DiscreteCurve<2>&,
                              const ForwardModelConfig&, const Vec<2>&);
template double density_at<3>(const DiscreteCurve<3>&,
                              const ForwardModelConfig&, const Vec<3>&);
template ProjectionImage project<2>(const DiscreteCurve<2>&,
                                    const ForwardModelConfig&);
template ProjectionImage project<3>(const DiscreteCurve<3>&,
                                    const ForwardModelConfig&);
template ProjectionImage density_image<2>(const DiscreteCurve<2>&,
                                          const ForwardModelConfig&);
template ProjectionImage density_image<3>(const DiscreteCurve<3>&,
                                          const ForwardModelConfig&);

}  // namespace chainspec
