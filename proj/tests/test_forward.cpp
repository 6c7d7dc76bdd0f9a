#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "chainspec/forward.hpp"
#include "support/oracles.hpp"

using namespace chainspec;

namespace {

constexpr double kSqrt2Pi = 2.5066282746310002;

ProjectionGrid grid1d(int samples, double lo, double hi) {
  ProjectionGrid g;
  g.dim = 1;
  g.samples = samples;
  g.min[0] = lo;
  g.max[0] = hi;
  return g;
}

ProjectionGrid grid2d(int samples, double lo, double hi) {
  ProjectionGrid g;
  g.dim = 2;
  g.samples = samples;
  g.min[0] = g.min[1] = lo;
  g.max[0] = g.max[1] = hi;
  return g;
}

ProjectionGrid grid3d(int samples, double lo, double hi) {
  ProjectionGrid g;
  g.dim = 3;
  g.samples = samples;
  g.min[0] = g.min[1] = g.min[2] = lo;
  g.max[0] = g.max[1] = g.max[2] = hi;
  return g;
}

template <int D>
DiscreteCurve<D> curve_from(const std::vector<double>& coords) {
  DiscreteCurve<D> c;
  c.delta = 1.0;
  const int m = int(coords.size()) / D;
  c.points.resize(D, m);
  for (int j = 0; j < m; ++j)
    for (int d = 0; d < D; ++d) c.points(d, j) = coords[std::size_t(j * D + d)];
  return c;
}

template <int D>
DiscreteCurve<D> random_walk(std::mt19937_64& rng, int m, double delta,
                             double spread) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(-spread, spread);
  DiscreteCurve<D> c;
  c.delta = delta;
  c.points.resize(D, m);
  for (int d = 0; d < D; ++d) c.points(d, 0) = u(rng);
  for (int j = 1; j < m; ++j) {
    Vec<D> step;
    for (int d = 0; d < D; ++d) step[d] = g(rng);
    step.normalize();
    c.points.col(j) = c.points.col(j - 1) + delta * step;
  }
  return c;
}

}  // namespace

TEST_CASE("density peak and half maximum") {
  ForwardModelConfig cfg;
  cfg.nu = 1.0;
  cfg.sigma = 1.0;
  cfg.grid = grid2d(4, -1.0, 1.0);

  auto c3 = curve_from<3>({0.0, 0.0, 0.0});
  CHECK(density_at<3>(c3, cfg, Vec<3>{0.0, 0.0, 0.0}) == doctest::Approx(1.0));
  const double half = 1.0 * std::sqrt(2.0 * std::log(2.0));
  CHECK(density_at<3>(c3, cfg, Vec<3>{0.0, 0.0, half}) ==
        doctest::Approx(0.5).epsilon(1e-12));

  cfg.nu = 2.5;
  cfg.sigma = 0.7;
  CHECK(density_at<3>(c3, cfg, Vec<3>{0.0, 0.0, 0.0}) == doctest::Approx(2.5));
  CHECK(density_at<3>(c3, cfg,
                      Vec<3>{0.0, 0.7 * std::sqrt(2.0 * std::log(2.0)), 0.0}) ==
        doctest::Approx(1.25).epsilon(1e-12));
}

TEST_CASE("density of three collinear atoms matches direct sum") {
  ForwardModelConfig cfg;
  cfg.nu = 1.3;
  cfg.sigma = 2.0;
  cfg.grid = grid1d(4, -1.0, 1.0);
  auto c = curve_from<2>({-1.0, 0.0, 0.0, 0.0, 1.0, 0.0});
  const Vec<2> x{0.0, 0.4};
  double expected = 0.0;
  for (int j = 0; j < 3; ++j) {
    const double dx = x[0] - c.points(0, j);
    const double dy = x[1] - c.points(1, j);
    expected += 1.3 * std::exp(-(dx * dx + dy * dy) / (2.0 * 4.0));
  }
  CHECK(density_at<2>(c, cfg, x) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("projection of a single atom peaks at sigma sqrt(2 pi)") {
  ForwardModelConfig cfg;
  cfg.nu = 1.0;
  cfg.sigma = 1.0;
  cfg.grid = grid1d(9, -4.0, 4.0);  // grid point exactly at 0
  auto c = curve_from<2>({0.0, 0.3});
  const ProjectionImage img = project<2>(c, cfg);
  REQUIRE(img.values.size() == 9);
  CHECK(img.values(4) == doctest::Approx(kSqrt2Pi).epsilon(1e-12));
  // the same value appears wherever the transverse offset matches
  CHECK(img.values(5) ==
        doctest::Approx(kSqrt2Pi * std::exp(-0.5)).epsilon(1e-12));
}

TEST_CASE("projection matches quadrature in 2D and 3D") {
  std::mt19937_64 rng(901);
  ForwardModelConfig cfg;
  cfg.nu = 0.8;
  cfg.sigma = 1.0;
  cfg.grid = grid1d(17, -6.0, 6.0);
  for (int rep = 0; rep < 6; ++rep) {
    const auto c = random_walk<2>(rng, 7, 1.1, 2.0);
    const ProjectionImage img = project<2>(c, cfg);
    for (int i = 0; i < 17; i += 4) {
      Eigen::VectorXd xperp(1);
      xperp << cfg.grid.coord(0, i);
      const double q =
          testing::quadrature_projection(c.points, xperp, cfg.nu, cfg.sigma);
      CHECK(std::abs(img.values(i) - q) < 1e-6);
    }
  }

  cfg.grid = grid2d(9, -5.0, 5.0);
  for (int rep = 0; rep < 4; ++rep) {
    const auto c = random_walk<3>(rng, 5, 1.0, 1.5);
    const ProjectionImage img = project<3>(c, cfg);
    for (int i0 = 0; i0 < 9; i0 += 3)
      for (int i1 = 1; i1 < 9; i1 += 3) {
        Eigen::VectorXd xperp(2);
        xperp << cfg.grid.coord(0, i0), cfg.grid.coord(1, i1);
        const double q =
            testing::quadrature_projection(c.points, xperp, cfg.nu, cfg.sigma);
        CHECK(std::abs(img.values(i0 * 9 + i1) - q) < 1e-6);
      }
  }
}

TEST_CASE("projection quadrature agreement with sigma=3 per the stated oracle") {
  std::mt19937_64 rng(77);
  ForwardModelConfig cfg;
  cfg.nu = 1.0;
  cfg.sigma = 3.0;
  cfg.grid = grid1d(11, -8.0, 8.0);
  const auto c = random_walk<2>(rng, 3, 2.0, 3.0);
  const ProjectionImage img = project<2>(c, cfg);
  for (int i = 0; i < 11; ++i) {
    Eigen::VectorXd xperp(1);
    xperp << cfg.grid.coord(0, i);
    const double q = testing::quadrature_projection(c.points, xperp, cfg.nu,
                                                    cfg.sigma, 1.0 / 50.0, 8.0);
    CHECK(std::abs(img.values(i) - q) < 1e-6);
  }
}

TEST_CASE("projection is linear in the atom set") {
  std::mt19937_64 rng(42);
  ForwardModelConfig cfg;
  cfg.nu = 1.1;
  cfg.sigma = 0.9;
  cfg.grid = grid1d(21, -5.0, 5.0);
  const auto a = random_walk<2>(rng, 6, 0.8, 2.0);
  const auto b = random_walk<2>(rng, 4, 0.8, 2.0);
  DiscreteCurve<2> both;
  both.delta = 0.8;
  both.points.resize(2, 10);
  both.points << a.points, b.points;
  const Eigen::VectorXd sum =
      project<2>(a, cfg).values + project<2>(b, cfg).values;
  const Eigen::VectorXd joint = project<2>(both, cfg).values;
  CHECK((joint - sum).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("projection shifts with in-plane translation by grid multiples") {
  std::mt19937_64 rng(7);
  ForwardModelConfig cfg;
  cfg.nu = 1.0;
  cfg.sigma = 1.0;
  cfg.grid = grid1d(41, -10.0, 10.0);
  const double h = cfg.grid.spacing(0);
  const auto c = random_walk<2>(rng, 8, 0.9, 1.0);
  DiscreteCurve<2> shifted = c;
  shifted.points.row(0).array() += 3.0 * h;
  const ProjectionImage base = project<2>(c, cfg);
  const ProjectionImage moved = project<2>(shifted, cfg);
  for (int i = 3; i < 41; ++i)
    CHECK(std::abs(moved.values(i) - base.values(i - 3)) < 1e-10);

  // and along both axes of a 3D projection
  ForwardModelConfig cfg3;
  cfg3.nu = 1.0;
  cfg3.sigma = 1.0;
  cfg3.grid = grid2d(15, -7.0, 7.0);
  const double h3 = cfg3.grid.spacing(0);
  const auto c3 = random_walk<3>(rng, 6, 1.0, 1.0);
  DiscreteCurve<3> s3 = c3;
  s3.points.row(0).array() += 2.0 * h3;
  s3.points.row(1).array() += 1.0 * h3;
  const ProjectionImage b3 = project<3>(c3, cfg3);
  const ProjectionImage m3 = project<3>(s3, cfg3);
  for (int r = 2; r < 15; ++r)
    for (int col = 1; col < 15; ++col)
      CHECK(std::abs(m3.values(r * 15 + col) -
                     b3.values((r - 2) * 15 + (col - 1))) < 1e-10);
}

TEST_CASE("projection ignores translation along the integration axis") {
  std::mt19937_64 rng(11);
  ForwardModelConfig cfg;
  cfg.nu = 1.0;
  cfg.sigma = 1.2;
  cfg.grid = grid1d(15, -4.0, 4.0);
  const auto c = random_walk<2>(rng, 5, 1.0, 1.0);
  DiscreteCurve<2> lifted = c;
  lifted.points.row(1).array() += 17.5;
  CHECK((project<2>(c, cfg).values - project<2>(lifted, cfg).values)
            .cwiseAbs()
            .maxCoeff() < 1e-12);
}

TEST_CASE("density image equals pointwise density on the grid") {
  std::mt19937_64 rng(5);
  ForwardModelConfig cfg;
  cfg.nu = 0.9;
  cfg.sigma = 1.4;

  cfg.grid = grid2d(7, -3.0, 3.0);
  const auto c2 = random_walk<2>(rng, 5, 1.0, 1.0);
  const ProjectionImage img2 = density_image<2>(c2, cfg);
  for (int i0 = 0; i0 < 7; ++i0)
    for (int i1 = 0; i1 < 7; ++i1) {
      const Vec<2> x{cfg.grid.coord(0, i0), cfg.grid.coord(1, i1)};
      CHECK(img2.values(i0 * 7 + i1) ==
            doctest::Approx(density_at<2>(c2, cfg, x)).epsilon(1e-12));
    }

  cfg.grid = grid3d(5, -2.0, 2.0);
  const auto c3 = random_walk<3>(rng, 4, 0.8, 1.0);
  const ProjectionImage img3 = density_image<3>(c3, cfg);
  for (int i0 = 0; i0 < 5; ++i0)
    for (int i1 = 0; i1 < 5; ++i1)
      for (int i2 = 0; i2 < 5; ++i2) {
        const Vec<3> x{cfg.grid.coord(0, i0), cfg.grid.coord(1, i1),
                       cfg.grid.coord(2, i2)};
        CHECK(img3.values((i0 * 5 + i1) * 5 + i2) ==
              doctest::Approx(density_at<3>(c3, cfg, x)).epsilon(1e-12));
      }
}

TEST_CASE("noise injection honors variance zero, seeds and magnitude") {
  ProjectionImage img;
  img.grid = grid2d(1000, -1.0, 1.0);
  img.values = Eigen::VectorXd::Constant(1000 * 1000, 3.25);

  std::mt19937_64 rng(99);
  const ProjectionImage same = add_noise(img, 0.0, rng);
  CHECK((same.values - img.values).cwiseAbs().maxCoeff() == 0.0);

  std::mt19937_64 r1(123), r2(123), r3(456);
  const ProjectionImage a = add_noise(img, 2500.0, r1);
  const ProjectionImage b = add_noise(img, 2500.0, r2);
  const ProjectionImage c = add_noise(img, 2500.0, r3);
  CHECK((a.values - b.values).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.values - c.values).cwiseAbs().maxCoeff() > 0.0);

  const Eigen::VectorXd noise = a.values.array() - 3.25;
  const double mean = noise.mean();
  const double var = (noise.array() - mean).square().mean();
  CHECK(std::abs(var - 2500.0) < 25.0);  // 1% on 1e6 samples

  std::mt19937_64 r4(1);
  CHECK_THROWS_AS(add_noise(img, -1.0, r4), std::invalid_argument);
}

TEST_CASE("snr pools variance over all samples") {
  ProjectionGrid g = grid1d(2, 0.0, 1.0);
  ProjectionImage a, b;
  a.grid = b.grid = g;
  a.values = Eigen::VectorXd(2);
  a.values << 0.0, 2.0;
  b.values = Eigen::VectorXd(2);
  b.values << 0.0, 2.0;
  // pooled mean 1, pooled variance 1
  CHECK(snr({a, b}, 4.0) == doctest::Approx(0.25).epsilon(1e-14));

  ProjectionImage flat;
  flat.grid = g;
  flat.values = Eigen::VectorXd::Constant(2, 7.0);
  CHECK(snr({flat}, 10.0) == doctest::Approx(0.0));

  CHECK_THROWS_AS(snr({}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(snr({a}, 0.0), std::invalid_argument);
}

TEST_CASE("identity psf leaves projections unchanged") {
  std::mt19937_64 rng(3);
  ForwardModelConfig cfg;
  cfg.nu = 1.0;
  cfg.sigma = 1.0;
  cfg.grid = grid1d(13, -3.0, 3.0);
  const auto c = random_walk<2>(rng, 5, 1.0, 1.0);
  const ProjectionImage plain = project<2>(c, cfg);
  cfg.psf = Eigen::MatrixXd::Constant(1, 1, 1.0);
  const ProjectionImage with = project<2>(c, cfg);
  CHECK((plain.values - with.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("convolution matches a hand-rolled small case") {
  ProjectionGrid g = grid1d(4, 0.0, 3.0);
  Eigen::VectorXd v(4);
  v << 1.0, 2.0, 3.0, 4.0;
  Eigen::MatrixXd k(1, 3);
  k << 0.5, 1.0, 0.25;
  // true convolution, zero padded: out[i] = 0.25 v[i-1] + v[i] + 0.5 v[i+1]
  const Eigen::VectorXd out = convolve_same(v, g, k);
  CHECK(out(0) == doctest::Approx(1.0 * 1.0 + 0.5 * 2.0));
  CHECK(out(1) == doctest::Approx(0.25 * 1.0 + 1.0 * 2.0 + 0.5 * 3.0));
  CHECK(out(2) == doctest::Approx(0.25 * 2.0 + 1.0 * 3.0 + 0.5 * 4.0));
  CHECK(out(3) == doctest::Approx(0.25 * 3.0 + 1.0 * 4.0));

  ProjectionGrid g2 = grid2d(3, 0.0, 2.0);
  Eigen::VectorXd w(9);
  w << 1, 0, 0, 0, 2, 0, 0, 0, 0;
  Eigen::MatrixXd k2(3, 3);
  k2 << 1, 2, 3, 4, 5, 6, 7, 8, 9;
  const Eigen::VectorXd out2 = convolve_same(w, g2, k2);
  // the centered kernel stamped at (0,0) with weight 1 and (1,1) with 2
  CHECK(out2(0) == doctest::Approx(1.0 * 5 + 2.0 * 1));
  CHECK(out2(4) == doctest::Approx(1.0 * 9 + 2.0 * 5));
  CHECK(out2(8) == doctest::Approx(2.0 * 9));
}

TEST_CASE("convolution adjoint satisfies the dot product identity") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int dim = 1; dim <= 2; ++dim) {
    ProjectionGrid grid = dim == 1 ? grid1d(12, 0.0, 1.0) : grid2d(6, 0.0, 1.0);
    Eigen::MatrixXd k = dim == 1 ? Eigen::MatrixXd(1, 5) : Eigen::MatrixXd(3, 3);
    for (Eigen::Index i = 0; i < k.size(); ++i) k(i) = g(rng);
    const Eigen::Index n = Eigen::Index(grid.total());
    Eigen::VectorXd x(n), y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      x(i) = g(rng);
      y(i) = g(rng);
    }
    const double lhs = convolve_same(x, grid, k).dot(y);
    const double rhs = x.dot(convolve_adjoint_same(y, grid, k));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("config and grid validation rejects bad inputs") {
  ForwardModelConfig cfg;
  cfg.grid = grid1d(8, -1.0, 1.0);
  cfg.nu = 0.0;
  CHECK_THROWS_AS(validate_forward_config(cfg), std::invalid_argument);
  cfg.nu = 1.0;
  cfg.sigma = -1.0;
  CHECK_THROWS_AS(validate_forward_config(cfg), std::invalid_argument);
  cfg.sigma = 1.0;
  cfg.psf = Eigen::MatrixXd::Ones(2, 3);
  CHECK_THROWS_AS(validate_forward_config(cfg), std::invalid_argument);
  cfg.psf.resize(0, 0);

  ProjectionGrid g;
  g.dim = 0;
  CHECK_THROWS_AS(validate_grid(g), std::invalid_argument);
  g.dim = 1;
  g.samples = 1;
  CHECK_THROWS_AS(validate_grid(g), std::invalid_argument);
  g.samples = 4;
  g.min[0] = 1.0;
  g.max[0] = 1.0;
  CHECK_THROWS_AS(validate_grid(g), std::invalid_argument);

  auto c2 = curve_from<2>({0.0, 0.0});
  ForwardModelConfig wrong;
  wrong.grid = grid2d(4, -1.0, 1.0);
  CHECK_THROWS_AS(project<2>(c2, wrong), std::invalid_argument);
  ForwardModelConfig wrong3;
  wrong3.grid = grid1d(4, -1.0, 1.0);
  CHECK_THROWS_AS(density_image<2>(c2, wrong3), std::invalid_argument);

  // 1D images pair with single-row kernels only
  ForwardModelConfig tall;
  tall.grid = grid1d(8, -1.0, 1.0);
  tall.psf = Eigen::MatrixXd::Ones(3, 3);
  CHECK_THROWS_AS(project<2>(c2, tall), std::invalid_argument);
}
