#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "chainspec/kernels.hpp"

using chainspec::kernels::Table;

namespace {

std::vector<const Table*> available_tables() {
  std::vector<const Table*> t{&chainspec::kernels::scalar_table()};
  if (const Table* a = chainspec::kernels::avx2_table()) t.push_back(a);
  if (const Table* n = chainspec::kernels::neon_table()) t.push_back(n);
  return t;
}

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n, double lo,
                               double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

double rel_diff(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

// odd lengths exercise the vector remainders
const std::size_t kLengths[] = {1, 2, 3, 4, 5, 7, 8, 13, 16, 33, 100, 257};

}  // namespace

TEST_CASE("vexp matches std::exp") {
  std::mt19937_64 rng(11);
  for (const Table* t : available_tables()) {
    CAPTURE(t->name);
    for (std::size_t n : kLengths) {
      auto x = random_vec(rng, n, -690.0, 690.0);
      // sprinkle in the values the forward model actually produces
      if (n >= 4) {
        x[0] = 0.0;
        x[1] = -1e-12;
        x[2] = -35.0;
        x[3] = -0.5;
      }
      std::vector<double> y(n);
      t->vexp(y.data(), x.data(), n);
      for (std::size_t i = 0; i < n; ++i) {
        CAPTURE(x[i]);
        CHECK(rel_diff(y[i], std::exp(x[i])) < 1e-13);
      }
    }
    // saturation far outside the representable range
    double extremes[] = {-1000.0, -750.0, 710.0, 1000.0};
    double out[4];
    t->vexp(out, extremes, 4);
    CHECK(out[0] == 0.0);
    CHECK(out[1] == 0.0);
    CHECK(std::isinf(out[2]));
    CHECK(std::isinf(out[3]));
  }
}

TEST_CASE("gauss_weights matches direct formula") {
  std::mt19937_64 rng(12);
  for (const Table* t : available_tables()) {
    CAPTURE(t->name);
    for (std::size_t n : kLengths) {
      auto coords = random_vec(rng, n, -60.0, 60.0);
      const double center = 3.25;
      const double its = 1.0 / (2.0 * 7.0 * 7.0);
      std::vector<double> w(n);
      t->gauss_weights(w.data(), coords.data(), n, center, its);
      for (std::size_t i = 0; i < n; ++i) {
        const double d = coords[i] - center;
        CHECK(rel_diff(w[i], std::exp(-d * d * its)) < 1e-13);
      }
    }
  }
}

TEST_CASE("axpy, dot, sqdiff_sum agree with scalar reference") {
  std::mt19937_64 rng(13);
  const Table& ref = chainspec::kernels::scalar_table();
  for (const Table* t : available_tables()) {
    CAPTURE(t->name);
    for (std::size_t n : kLengths) {
      auto x = random_vec(rng, n, -3.0, 3.0);
      auto y0 = random_vec(rng, n, -3.0, 3.0);
      auto y1 = y0;
      ref.axpy(y0.data(), x.data(), n, 0.7);
      t->axpy(y1.data(), x.data(), n, 0.7);
      for (std::size_t i = 0; i < n; ++i) CHECK(rel_diff(y0[i], y1[i]) < 1e-12);

      CHECK(rel_diff(ref.dot(x.data(), y0.data(), n),
                     t->dot(x.data(), y0.data(), n)) < 1e-12);
      CHECK(rel_diff(ref.sqdiff_sum(x.data(), y0.data(), n),
                     t->sqdiff_sum(x.data(), y0.data(), n)) < 1e-12);
    }
  }
}

TEST_CASE("outer_add accumulates amp * rw * cw") {
  std::mt19937_64 rng(14);
  for (const Table* t : available_tables()) {
    CAPTURE(t->name);
    for (std::size_t nr : {1u, 3u, 8u}) {
      for (std::size_t nc : {1u, 5u, 16u, 33u}) {
        auto rw = random_vec(rng, nr, -2.0, 2.0);
        auto cw = random_vec(rng, nc, -2.0, 2.0);
        auto img = random_vec(rng, nr * nc, -1.0, 1.0);
        auto want = img;
        t->outer_add(img.data(), rw.data(), cw.data(), nr, nc, 1.3);
        for (std::size_t r = 0; r < nr; ++r)
          for (std::size_t c = 0; c < nc; ++c) {
            want[r * nc + c] += 1.3 * rw[r] * cw[c];
            CHECK(rel_diff(img[r * nc + c], want[r * nc + c]) < 1e-12);
          }
      }
    }
  }
}

TEST_CASE("moment01 matches direct sums") {
  std::mt19937_64 rng(15);
  const Table& ref = chainspec::kernels::scalar_table();
  for (const Table* t : available_tables()) {
    CAPTURE(t->name);
    for (std::size_t n : kLengths) {
      auto tt = random_vec(rng, n, -2.0, 2.0);
      auto w = random_vec(rng, n, 0.0, 1.0);
      auto coords = random_vec(rng, n, -50.0, 50.0);
      double s0r, s1r, s0, s1;
      ref.moment01(tt.data(), w.data(), coords.data(), n, 4.5, &s0r, &s1r);
      t->moment01(tt.data(), w.data(), coords.data(), n, 4.5, &s0, &s1);
      CHECK(rel_diff(s0, s0r) < 1e-12);
      CHECK(rel_diff(s1, s1r) < 1e-12);
    }
  }
}

TEST_CASE("matvec kernels agree with scalar reference") {
  std::mt19937_64 rng(16);
  const Table& ref = chainspec::kernels::scalar_table();
  for (const Table* t : available_tables()) {
    CAPTURE(t->name);
    for (std::size_t nr : {1u, 4u, 9u}) {
      for (std::size_t nc : {1u, 6u, 31u, 64u}) {
        auto m = random_vec(rng, nr * nc, -2.0, 2.0);
        auto vc = random_vec(rng, nc, -2.0, 2.0);
        auto vr = random_vec(rng, nr, -2.0, 2.0);
        std::vector<double> a(nr), b(nr), ac(nc), bc(nc);
        ref.matvec_rows(m.data(), nr, nc, vc.data(), a.data());
        t->matvec_rows(m.data(), nr, nc, vc.data(), b.data());
        for (std::size_t i = 0; i < nr; ++i) CHECK(rel_diff(a[i], b[i]) < 1e-12);
        ref.matvec_cols(m.data(), nr, nc, vr.data(), ac.data());
        t->matvec_cols(m.data(), nr, nc, vr.data(), bc.data());
        for (std::size_t i = 0; i < nc; ++i)
          CHECK(rel_diff(ac[i], bc[i]) < 1e-12);
      }
    }
  }
}

TEST_CASE("mode selection falls back gracefully") {
  using chainspec::kernels::Mode;
  chainspec::kernels::set_mode(Mode::Scalar);
  CHECK(std::strcmp(chainspec::kernels::active().name, "scalar") == 0);
  chainspec::kernels::set_mode(Mode::Auto);
  CHECK(chainspec::kernels::active().name != nullptr);
  // requesting an unavailable table must not crash
  if (!chainspec::kernels::neon_table()) {
    chainspec::kernels::set_mode(Mode::Neon);
    CHECK(std::strcmp(chainspec::kernels::active().name, "scalar") == 0);
  }
  if (!chainspec::kernels::avx2_table()) {
    chainspec::kernels::set_mode(Mode::Avx2);
    CHECK(std::strcmp(chainspec::kernels::active().name, "scalar") == 0);
  }
  chainspec::kernels::set_mode(Mode::Auto);
}
