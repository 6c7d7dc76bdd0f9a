// AVX2+FMA kernel variants. This translation unit is compiled with
// -mavx2 -mfma and must only be entered after a runtime CPU check.

#include "chainspec/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <cmath>

namespace chainspec::kernels {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  const __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

// exp() for 4 doubles: reduce x = n*ln2 + r, rational approximation of exp(r)
// on |r| <= ln2/2 (Cephes coefficients), scale by 2^n through the exponent
// bits. Inputs below -708.396 flush to zero, above 709.436 saturate to +inf;
// in between the error stays within a few ulp of std::exp.
inline __m256d exp_pd(__m256d x) {
  const __m256d max_x = _mm256_set1_pd(709.436);
  const __m256d min_x = _mm256_set1_pd(-708.396);
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
  const __m256d ln2_hi = _mm256_set1_pd(6.93145751953125e-1);
  const __m256d ln2_lo = _mm256_set1_pd(1.42860682030941723212e-6);

  const __m256d p0 = _mm256_set1_pd(1.26177193074810590878e-4);
  const __m256d p1 = _mm256_set1_pd(3.02994407707441961300e-2);
  const __m256d p2 = _mm256_set1_pd(9.99999999999999999910e-1);
  const __m256d q0 = _mm256_set1_pd(3.00198505138664455042e-6);
  const __m256d q1 = _mm256_set1_pd(2.52448340349684104192e-3);
  const __m256d q2 = _mm256_set1_pd(2.27265548208155028766e-1);
  const __m256d q3 = _mm256_set1_pd(2.00000000000000000005e0);

  const __m256d under = _mm256_cmp_pd(x, min_x, _CMP_LT_OQ);
  const __m256d over = _mm256_cmp_pd(x, max_x, _CMP_GT_OQ);
  const __m256d xc = _mm256_min_pd(_mm256_max_pd(x, min_x), max_x);

  const __m256d nf =
      _mm256_round_pd(_mm256_mul_pd(xc, log2e),
                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(nf, ln2_hi, xc);
  r = _mm256_fnmadd_pd(nf, ln2_lo, r);

  const __m256d rr = _mm256_mul_pd(r, r);
  __m256d px = _mm256_fmadd_pd(p0, rr, p1);
  px = _mm256_fmadd_pd(px, rr, p2);
  px = _mm256_mul_pd(px, r);
  __m256d qx = _mm256_fmadd_pd(q0, rr, q1);
  qx = _mm256_fmadd_pd(qx, rr, q2);
  qx = _mm256_fmadd_pd(qx, rr, q3);
  const __m256d e = _mm256_fmadd_pd(
      _mm256_set1_pd(2.0), _mm256_div_pd(px, _mm256_sub_pd(qx, px)),
      _mm256_set1_pd(1.0));

  const __m128i n32 = _mm256_cvtpd_epi32(nf);
  __m256i n64 = _mm256_cvtepi32_epi64(n32);
  n64 = _mm256_add_epi64(n64, _mm256_set1_epi64x(1023));
  n64 = _mm256_slli_epi64(n64, 52);
  __m256d y = _mm256_mul_pd(e, _mm256_castsi256_pd(n64));

  y = _mm256_andnot_pd(under, y);
  y = _mm256_blendv_pd(y, _mm256_set1_pd(HUGE_VAL), over);
  return y;
}

void vexp_avx2(double* dst, const double* src, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(dst + i, exp_pd(_mm256_loadu_pd(src + i)));
  if (i < n) {
    double buf[4] = {0.0, 0.0, 0.0, 0.0};
    for (std::size_t k = i; k < n; ++k) buf[k - i] = src[k];
    double out[4];
    _mm256_storeu_pd(out, exp_pd(_mm256_loadu_pd(buf)));
    for (std::size_t k = i; k < n; ++k) dst[k] = out[k - i];
  }
}

void gauss_weights_avx2(double* w, const double* coords, std::size_t n,
                        double center, double inv_two_sigma_sq) {
  const __m256d c = _mm256_set1_pd(center);
  const __m256d nits = _mm256_set1_pd(-inv_two_sigma_sq);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(coords + i), c);
    const __m256d arg = _mm256_mul_pd(_mm256_mul_pd(d, d), nits);
    _mm256_storeu_pd(w + i, exp_pd(arg));
  }
  for (; i < n; ++i) {
    const double d = coords[i] - center;
    w[i] = std::exp(-d * d * inv_two_sigma_sq);
  }
}

void axpy_avx2(double* y, const double* x, std::size_t n, double a) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d yi = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), yi));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void outer_add_avx2(double* img, const double* rw, const double* cw,
                    std::size_t nr, std::size_t nc, double amp) {
  for (std::size_t r = 0; r < nr; ++r) axpy_avx2(img + r * nc, cw, nc, amp * rw[r]);
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void moment01_avx2(const double* t, const double* w, const double* coords,
                   std::size_t n, double center, double* s0, double* s1) {
  const __m256d c = _mm256_set1_pd(center);
  __m256d a0 = _mm256_setzero_pd();
  __m256d a1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d tw =
        _mm256_mul_pd(_mm256_loadu_pd(t + i), _mm256_loadu_pd(w + i));
    a0 = _mm256_add_pd(a0, tw);
    a1 = _mm256_fmadd_pd(tw, _mm256_sub_pd(_mm256_loadu_pd(coords + i), c), a1);
  }
  double r0 = hsum(a0), r1 = hsum(a1);
  for (; i < n; ++i) {
    const double tw = t[i] * w[i];
    r0 += tw;
    r1 += tw * (coords[i] - center);
  }
  *s0 = r0;
  *s1 = r1;
}

void matvec_rows_avx2(const double* m, std::size_t nr, std::size_t nc,
                      const double* v, double* out) {
  for (std::size_t r = 0; r < nr; ++r) out[r] = dot_avx2(m + r * nc, v, nc);
}

void matvec_cols_avx2(const double* m, std::size_t nr, std::size_t nc,
                      const double* v, double* out) {
  for (std::size_t c = 0; c < nc; ++c) out[c] = 0.0;
  for (std::size_t r = 0; r < nr; ++r) axpy_avx2(out, m + r * nc, nc, v[r]);
}

double sqdiff_sum_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d =
        _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace

const Table* avx2_table_impl() {
  static const Table t = {
      vexp_avx2,        gauss_weights_avx2, axpy_avx2,
      outer_add_avx2,   dot_avx2,           moment01_avx2,
      matvec_rows_avx2, matvec_cols_avx2,   sqdiff_sum_avx2,
      "avx2",
  };
  return &t;
}

}  // namespace chainspec::kernels

#endif  // __AVX2__ && __FMA__
