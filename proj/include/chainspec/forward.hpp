#pragma once

#include <random>
#include <vector>

#include "chainspec/types.hpp"

namespace chainspec {

// Regular sampling grid. dim is 1 for projections of planar chains, 2 for
// projections of spatial chains, and may equal the ambient dimension when the
// grid samples a density volume instead of a projection.
struct ProjectionGrid {
  int dim = 1;
  int samples = 2;  // per axis
  double min[3] = {0.0, 0.0, 0.0};
  double max[3] = {0.0, 0.0, 0.0};

  double coord(int axis, int index) const {
    return min[axis] + index * (max[axis] - min[axis]) / (samples - 1);
  }
  double spacing(int axis) const {
    return (max[axis] - min[axis]) / (samples - 1);
  }
  std::size_t total() const {
    std::size_t t = 1;
    for (int a = 0; a < dim; ++a) t *= std::size_t(samples);
    return t;
  }
};

void validate_grid(const ProjectionGrid& grid);
bool grids_equal(const ProjectionGrid& a, const ProjectionGrid& b);

struct ForwardModelConfig {
  double nu = 1.0;
  double sigma = 1.0;
  ProjectionGrid grid;
  // Optional point-spread kernel with odd side lengths; empty means identity.
  // For 1D images use a single-row kernel.
  Eigen::MatrixXd psf;
};

void validate_forward_config(const ForwardModelConfig& cfg);

// Sample layout: 1D images are indexed [i0], 2D row-major [i0*N + i1] and 3D
// [ (i0*N + i1)*N + i2 ], where axis a runs over grid.coord(a, ·).
struct ProjectionImage {
  Eigen::VectorXd values;
  ProjectionGrid grid;
};

template <int D>
double density_at(const DiscreteCurve<D>& curve, const ForwardModelConfig& cfg,
                  const Vec<D>& x);

// Line integral of the density along the last coordinate axis, sampled on
// cfg.grid (which must have dim = D-1): each atom contributes a Gaussian of
// the same sigma scaled by nu * sigma * sqrt(2*pi). PSF applied afterwards.
template <int D>
ProjectionImage project(const DiscreteCurve<D>& curve,
                        const ForwardModelConfig& cfg);

// Density sampled on a dim = D grid (no PSF); used for the low-dimensional
// particle representations.
template <int D>
ProjectionImage density_image(const DiscreteCurve<D>& curve,
                              const ForwardModelConfig& cfg);

ProjectionImage add_noise(const ProjectionImage& image, double variance,
                          std::mt19937_64& rng);

// Pooled sample variance of all clean values divided by the noise variance.
double snr(const std::vector<ProjectionImage>& clean_images,
           double noise_variance);

// Same-size zero-padded convolution with the kernel centered, and its adjoint
// (correlation); shapes follow the image layout above.
Eigen::VectorXd convolve_same(const Eigen::VectorXd& values,
                              const ProjectionGrid& grid,
                              const Eigen::MatrixXd& psf);
Eigen::VectorXd convolve_adjoint_same(const Eigen::VectorXd& values,
                                      const ProjectionGrid& grid,
                                      const Eigen::MatrixXd& psf);

}  // namespace chainspec
