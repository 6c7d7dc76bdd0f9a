#pragma once

#include <cstddef>

// Low-level array kernels used by the forward model, the gradient adjoints and
// the graph builder. Every operation has a scalar reference implementation and,
// where the target CPU supports it, a vectorized variant selected at runtime.
// The vectorized variants may reorder additions, so results can differ from the
// scalar path by a few ulp; tests pin the allowed divergence.

namespace chainspec::kernels {

struct Table {
  // dst[i] = exp(src[i])
  void (*vexp)(double* dst, const double* src, std::size_t n);
  // w[i] = exp(-(coords[i] - center)^2 * inv_two_sigma_sq)
  void (*gauss_weights)(double* w, const double* coords, std::size_t n,
                        double center, double inv_two_sigma_sq);
  // y[i] += a * x[i]
  void (*axpy)(double* y, const double* x, std::size_t n, double a);
  // img[r*nc + c] += amp * rw[r] * cw[c]
  void (*outer_add)(double* img, const double* rw, const double* cw,
                    std::size_t nr, std::size_t nc, double amp);
  double (*dot)(const double* x, const double* y, std::size_t n);
  // s0 = sum_i t[i]*w[i], s1 = sum_i t[i]*w[i]*(coords[i] - center)
  void (*moment01)(const double* t, const double* w, const double* coords,
                   std::size_t n, double center, double* s0, double* s1);
  // out[r] = sum_c M[r*nc + c] * v[c]
  void (*matvec_rows)(const double* m, std::size_t nr, std::size_t nc,
                      const double* v, double* out);
  // out[c] = sum_r M[r*nc + c] * v[r]   (out must be zeroed by the kernel)
  void (*matvec_cols)(const double* m, std::size_t nr, std::size_t nc,
                      const double* v, double* out);
  double (*sqdiff_sum)(const double* a, const double* b, std::size_t n);
  const char* name;
};

enum class Mode { Auto, Scalar, Avx2, Neon };

// Active table. Resolved once from CHAINSPEC_SIMD (auto|scalar|avx2|neon) and
// CPU capabilities; set_mode overrides, mainly for equivalence tests.
const Table& active();
void set_mode(Mode mode);

const Table& scalar_table();
// Null when the build or the running CPU lacks the instruction set.
const Table* avx2_table();
const Table* neon_table();

}  // namespace chainspec::kernels
