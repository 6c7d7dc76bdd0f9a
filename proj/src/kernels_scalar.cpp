#include "chainspec/kernels.hpp"

#include <cmath>

namespace chainspec::kernels {
namespace {

void vexp_scalar(double* dst, const double* src, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = std::exp(src[i]);
}

void gauss_weights_scalar(double* w, const double* coords, std::size_t n,
                          double center, double inv_two_sigma_sq) {
  for (std::size_t i = 0; i < n; ++i) {
    const double d = coords[i] - center;
    w[i] = std::exp(-d * d * inv_two_sigma_sq);
  }
}

void axpy_scalar(double* y, const double* x, std::size_t n, double a) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void outer_add_scalar(double* img, const double* rw, const double* cw,
                      std::size_t nr, std::size_t nc, double amp) {
  for (std::size_t r = 0; r < nr; ++r) {
    const double arw = amp * rw[r];
    double* row = img + r * nc;
    for (std::size_t c = 0; c < nc; ++c) row[c] += arw * cw[c];
  }
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void moment01_scalar(const double* t, const double* w, const double* coords,
                     std::size_t n, double center, double* s0, double* s1) {
  double a = 0.0, b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double tw = t[i] * w[i];
    a += tw;
    b += tw * (coords[i] - center);
  }
  *s0 = a;
  *s1 = b;
}

void matvec_rows_scalar(const double* m, std::size_t nr, std::size_t nc,
                        const double* v, double* out) {
  for (std::size_t r = 0; r < nr; ++r) out[r] = dot_scalar(m + r * nc, v, nc);
}

void matvec_cols_scalar(const double* m, std::size_t nr, std::size_t nc,
                        const double* v, double* out) {
  for (std::size_t c = 0; c < nc; ++c) out[c] = 0.0;
  for (std::size_t r = 0; r < nr; ++r) axpy_scalar(out, m + r * nc, nc, v[r]);
}

double sqdiff_sum_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace

const Table& scalar_table() {
  static const Table t = {
      vexp_scalar,        gauss_weights_scalar, axpy_scalar,
      outer_add_scalar,   dot_scalar,           moment01_scalar,
      matvec_rows_scalar, matvec_cols_scalar,   sqdiff_sum_scalar,
      "scalar",
  };
  return t;
}

}  // namespace chainspec::kernels
