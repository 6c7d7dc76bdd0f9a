// NEON (aarch64) kernel variants, mirroring the AVX2 file two lanes at a time.

#include "chainspec/kernels.hpp"

#if defined(__aarch64__) && defined(__ARM_NEON)

#include <arm_neon.h>

#include <cmath>

namespace chainspec::kernels {
namespace {

// Same range reduction and rational approximation as the AVX2 exp_pd.
inline float64x2_t exp_f64(float64x2_t x) {
  const float64x2_t max_x = vdupq_n_f64(709.436);
  const float64x2_t min_x = vdupq_n_f64(-708.396);
  const float64x2_t log2e = vdupq_n_f64(1.4426950408889634073599);
  const float64x2_t ln2_hi = vdupq_n_f64(6.93145751953125e-1);
  const float64x2_t ln2_lo = vdupq_n_f64(1.42860682030941723212e-6);

  const float64x2_t p0 = vdupq_n_f64(1.26177193074810590878e-4);
  const float64x2_t p1 = vdupq_n_f64(3.02994407707441961300e-2);
  const float64x2_t p2 = vdupq_n_f64(9.99999999999999999910e-1);
  const float64x2_t q0 = vdupq_n_f64(3.00198505138664455042e-6);
  const float64x2_t q1 = vdupq_n_f64(2.52448340349684104192e-3);
  const float64x2_t q2 = vdupq_n_f64(2.27265548208155028766e-1);
  const float64x2_t q3 = vdupq_n_f64(2.00000000000000000005e0);

  const uint64x2_t under = vcltq_f64(x, min_x);
  const uint64x2_t over = vcgtq_f64(x, max_x);
  const float64x2_t xc = vminq_f64(vmaxq_f64(x, min_x), max_x);

  const float64x2_t nf = vrndnq_f64(vmulq_f64(xc, log2e));
  float64x2_t r = vfmsq_f64(xc, nf, ln2_hi);
  r = vfmsq_f64(r, nf, ln2_lo);

  const float64x2_t rr = vmulq_f64(r, r);
  float64x2_t px = vfmaq_f64(p1, p0, rr);
  px = vfmaq_f64(p2, px, rr);
  px = vmulq_f64(px, r);
  float64x2_t qx = vfmaq_f64(q1, q0, rr);
  qx = vfmaq_f64(q2, qx, rr);
  qx = vfmaq_f64(q3, qx, rr);
  const float64x2_t e = vfmaq_f64(vdupq_n_f64(1.0), vdupq_n_f64(2.0),
                                  vdivq_f64(px, vsubq_f64(qx, px)));

  int64x2_t n64 = vcvtq_s64_f64(nf);  // nf is integral, conversion is exact
  n64 = vaddq_s64(n64, vdupq_n_s64(1023));
  n64 = vshlq_n_s64(n64, 52);
  float64x2_t y = vmulq_f64(e, vreinterpretq_f64_s64(n64));

  y = vbslq_f64(under, vdupq_n_f64(0.0), y);
  y = vbslq_f64(over, vdupq_n_f64(HUGE_VAL), y);
  return y;
}

void vexp_neon(double* dst, const double* src, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(dst + i, exp_f64(vld1q_f64(src + i)));
  for (; i < n; ++i) {
    const double buf[2] = {src[i], 0.0};
    double out[2];
    vst1q_f64(out, exp_f64(vld1q_f64(buf)));
    dst[i] = out[0];
  }
}

void gauss_weights_neon(double* w, const double* coords, std::size_t n,
                        double center, double inv_two_sigma_sq) {
  const float64x2_t c = vdupq_n_f64(center);
  const float64x2_t nits = vdupq_n_f64(-inv_two_sigma_sq);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(coords + i), c);
    vst1q_f64(w + i, exp_f64(vmulq_f64(vmulq_f64(d, d), nits)));
  }
  for (; i < n; ++i) {
    const double d = coords[i] - center;
    w[i] = std::exp(-d * d * inv_two_sigma_sq);
  }
}

void axpy_neon(double* y, const double* x, std::size_t n, double a) {
  const float64x2_t av = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), av, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

void outer_add_neon(double* img, const double* rw, const double* cw,
                    std::size_t nr, std::size_t nc, double amp) {
  for (std::size_t r = 0; r < nr; ++r) axpy_neon(img + r * nc, cw, nc, amp * rw[r]);
}

double dot_neon(const double* x, const double* y, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    acc = vfmaq_f64(acc, vld1q_f64(x + i), vld1q_f64(y + i));
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void moment01_neon(const double* t, const double* w, const double* coords,
                   std::size_t n, double center, double* s0, double* s1) {
  const float64x2_t c = vdupq_n_f64(center);
  float64x2_t a0 = vdupq_n_f64(0.0);
  float64x2_t a1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t tw = vmulq_f64(vld1q_f64(t + i), vld1q_f64(w + i));
    a0 = vaddq_f64(a0, tw);
    a1 = vfmaq_f64(a1, tw, vsubq_f64(vld1q_f64(coords + i), c));
  }
  double r0 = vaddvq_f64(a0), r1 = vaddvq_f64(a1);
  for (; i < n; ++i) {
    const double tw = t[i] * w[i];
    r0 += tw;
    r1 += tw * (coords[i] - center);
  }
  *s0 = r0;
  *s1 = r1;
}

void matvec_rows_neon(const double* m, std::size_t nr, std::size_t nc,
                      const double* v, double* out) {
  for (std::size_t r = 0; r < nr; ++r) out[r] = dot_neon(m + r * nc, v, nc);
}

void matvec_cols_neon(const double* m, std::size_t nr, std::size_t nc,
                      const double* v, double* out) {
  for (std::size_t c = 0; c < nc; ++c) out[c] = 0.0;
  for (std::size_t r = 0; r < nr; ++r) axpy_neon(out, m + r * nc, nc, v[r]);
}

double sqdiff_sum_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    acc = vfmaq_f64(acc, d, d);
  }
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace

const Table* neon_table_impl() {
  static const Table t = {
      vexp_neon,        gauss_weights_neon, axpy_neon,
      outer_add_neon,   dot_neon,           moment01_neon,
      matvec_rows_neon, matvec_cols_neon,   sqdiff_sum_neon,
      "neon",
  };
  return &t;
}

}  // namespace chainspec::kernels

#endif  // __aarch64__ && __ARM_NEON
