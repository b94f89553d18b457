// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "coxsde/simd/kernels.hpp"

namespace coxsde::simd {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// exp(x) for x in roughly [-700, 700]; rational approximation on the
// reduced argument after x = n ln2 + r, then scaling by 2^n.
inline __m256d exp_pd(__m256d x) {
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
  const __m256d c1 = _mm256_set1_pd(6.93145751953125E-1);
  const __m256d c2 = _mm256_set1_pd(1.42860682030941723212E-6);
  const __m256d p0 = _mm256_set1_pd(1.26177193074810590878E-4);
  const __m256d p1 = _mm256_set1_pd(3.02994407707441961300E-2);
  const __m256d p2 = _mm256_set1_pd(9.99999999999999999910E-1);
  const __m256d q0 = _mm256_set1_pd(3.00198505138664455042E-6);
  const __m256d q1 = _mm256_set1_pd(2.52448340349684104192E-3);
  const __m256d q2 = _mm256_set1_pd(2.27265548208155028766E-1);
  const __m256d q3 = _mm256_set1_pd(2.00000000000000000009E0);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d two = _mm256_set1_pd(2.0);

  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, log2e), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, c1, x);
  r = _mm256_fnmadd_pd(n, c2, r);
  const __m256d rr = _mm256_mul_pd(r, r);
  __m256d p = _mm256_fmadd_pd(p0, rr, p1);
  p = _mm256_fmadd_pd(p, rr, p2);
  p = _mm256_mul_pd(p, r);
  __m256d q = _mm256_fmadd_pd(q0, rr, q1);
  q = _mm256_fmadd_pd(q, rr, q2);
  q = _mm256_fmadd_pd(q, rr, q3);
  __m256d e = _mm256_div_pd(p, _mm256_sub_pd(q, p));
  e = _mm256_fmadd_pd(two, e, one);

  const __m128i ni = _mm256_cvtpd_epi32(n);
  __m256i bits = _mm256_cvtepi32_epi64(ni);
  bits = _mm256_add_epi64(bits, _mm256_set1_epi64x(1023));
  bits = _mm256_slli_epi64(bits, 52);
  return _mm256_mul_pd(e, _mm256_castsi256_pd(bits));
}

inline __m256d tanh_pd(__m256d x) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  const __m256d ax = _mm256_andnot_pd(sign_mask, x);
  const __m256d sign = _mm256_and_pd(sign_mask, x);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d two = _mm256_set1_pd(2.0);

  // |x| >= 0.625: 1 - 2 / (exp(2|x|) + 1); beyond 22 the result is 1 in double.
  const __m256d az = _mm256_min_pd(ax, _mm256_set1_pd(22.0));
  const __m256d s = exp_pd(_mm256_add_pd(az, az));
  __m256d big = _mm256_sub_pd(one, _mm256_div_pd(two, _mm256_add_pd(s, one)));
  big = _mm256_or_pd(big, sign);

  // |x| < 0.625: x + x^3 P(x^2) / Q(x^2)
  const __m256d p0 = _mm256_set1_pd(-9.64399179425052238628E-1);
  const __m256d p1 = _mm256_set1_pd(-9.92877231001918586564E1);
  const __m256d p2 = _mm256_set1_pd(-1.61468768441708447952E3);
  const __m256d q0 = _mm256_set1_pd(1.12811678491632931402E2);
  const __m256d q1 = _mm256_set1_pd(2.23548839060100448583E3);
  const __m256d q2 = _mm256_set1_pd(4.84406305325125486048E3);
  const __m256d xx = _mm256_mul_pd(x, x);
  __m256d p = _mm256_fmadd_pd(p0, xx, p1);
  p = _mm256_fmadd_pd(p, xx, p2);
  __m256d q = _mm256_add_pd(xx, q0);
  q = _mm256_fmadd_pd(q, xx, q1);
  q = _mm256_fmadd_pd(q, xx, q2);
  const __m256d small = _mm256_fmadd_pd(_mm256_mul_pd(x, xx), _mm256_div_pd(p, q), x);

  const __m256d use_big = _mm256_cmp_pd(ax, _mm256_set1_pd(0.625), _CMP_GE_OQ);
  return _mm256_blendv_pd(small, big, use_big);
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void axpby(double a, const double* x, double b, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d by = _mm256_mul_pd(vb, _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), by));
  }
  for (; i < n; ++i) y[i] = a * x[i] + b * y[i];
}

double squared_distance(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void tanh_array(const double* x, double* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(y + i, tanh_pd(_mm256_loadu_pd(x + i)));
  for (; i < n; ++i) y[i] = std::tanh(x[i]);
}

void gemv(const double* w, const double* x, const double* bias, double* y, std::size_t rows,
          std::size_t cols) {
  if (cols < 8) {
    for (std::size_t r = 0; r < rows; ++r) {
      double s = bias ? bias[r] : 0.0;
      const double* row = w + r * cols;
      for (std::size_t c = 0; c < cols; ++c) s += row[c] * x[c];
      y[r] = s;
    }
    return;
  }
  for (std::size_t r = 0; r < rows; ++r) y[r] = (bias ? bias[r] : 0.0) + dot(w + r * cols, x, cols);
}

void gemv_t(const double* w, const double* g, double* x, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) axpy(g[r], w + r * cols, x, cols);
}

void rank1(double* w, const double* g, const double* h, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) axpy(g[r], h, w + r * cols, cols);
}

void pool_tanh(const PoolTanhArgs& a) {
  const bool derivs = a.d_sum != nullptr;
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d vx = _mm256_set1_pd(a.x);
  std::size_t i = 0;
  for (; i + 4 <= a.width; i += 4) {
    const __m256d shift = _mm256_mul_pd(_mm256_loadu_pd(a.slope + i), vx);
    __m256d s = _mm256_setzero_pd();
    __m256d ds = _mm256_setzero_pd();
    __m256d d0 = _mm256_setzero_pd();
    __m256d d1 = _mm256_setzero_pd();
    for (std::size_t k = 0; k < a.rows; ++k) {
      const __m256d h = tanh_pd(_mm256_add_pd(_mm256_loadu_pd(a.pre + k * a.width + i), shift));
      s = _mm256_add_pd(s, h);
      if (derivs) {
        const __m256d d = _mm256_fnmadd_pd(h, h, one);
        ds = _mm256_add_pd(ds, d);
        d0 = _mm256_fmadd_pd(d, _mm256_set1_pd(a.f0[k]), d0);
        d1 = _mm256_fmadd_pd(d, _mm256_set1_pd(a.f1[k]), d1);
      }
    }
    _mm256_storeu_pd(a.sum + i, s);
    if (derivs) {
      _mm256_storeu_pd(a.d_sum + i, ds);
      _mm256_storeu_pd(a.d_f0 + i, d0);
      _mm256_storeu_pd(a.d_f1 + i, d1);
    }
  }
  for (; i < a.width; ++i) {
    double s = 0.0, ds = 0.0, d0 = 0.0, d1 = 0.0;
    for (std::size_t k = 0; k < a.rows; ++k) {
      const double h = std::tanh(a.pre[k * a.width + i] + a.slope[i] * a.x);
      s += h;
      if (derivs) {
        const double d = 1.0 - h * h;
        ds += d;
        d0 += d * a.f0[k];
        d1 += d * a.f1[k];
      }
    }
    a.sum[i] = s;
    if (derivs) {
      a.d_sum[i] = ds;
      a.d_f0[i] = d0;
      a.d_f1[i] = d1;
    }
  }
}

void affine_step(const AffineStepArgs& a) {
  const __m256d va = _mm256_set1_pd(a.a + a.c * a.t);
  const __m256d vb = _mm256_set1_pd(a.b);
  const __m256d vdt = _mm256_set1_pd(a.dt);
  const __m256d vs = _mm256_set1_pd(a.scale);
  const __m256d vfloor = _mm256_set1_pd(a.floor);
  const __m256d vw = _mm256_set1_pd(a.weight);
  const __m256d zero = _mm256_setzero_pd();
  const double base = a.a + a.c * a.t;
  std::size_t i = 0;
  for (; i + 4 <= a.n; i += 4) {
    const __m256d z = _mm256_loadu_pd(a.z + i);
    if (a.integral) {
      _mm256_storeu_pd(a.integral + i, _mm256_fmadd_pd(vw, z, _mm256_loadu_pd(a.integral + i)));
    }
    const __m256d g = a.sqrt_diffusion ? _mm256_sqrt_pd(_mm256_max_pd(z, zero)) : _mm256_set1_pd(1.0);
    const __m256d drift = _mm256_fmadd_pd(vb, z, va);
    __m256d next = _mm256_fmadd_pd(drift, vdt, z);
    next = _mm256_fmadd_pd(_mm256_mul_pd(vs, g), _mm256_loadu_pd(a.dw + i), next);
    _mm256_storeu_pd(a.z + i, _mm256_max_pd(vfloor, next));  // NaN propagates from the second operand
  }
  for (; i < a.n; ++i) {
    const double z = a.z[i];
    if (a.integral) a.integral[i] += a.weight * z;
    const double g = a.sqrt_diffusion ? std::sqrt(std::max(z, 0.0)) : 1.0;
    const double next = z + (base + a.b * z) * a.dt + a.scale * g * a.dw[i];
    a.z[i] = std::max(next, a.floor);
  }
}

}  // namespace

namespace detail {
const KernelTable& avx2_table() {
  static const KernelTable table{Level::Avx2, dot,  axpy,   axpby,     squared_distance, tanh_array,
                                 gemv,        gemv_t, rank1, pool_tanh, affine_step};
  return table;
}
}  // namespace detail

}  // namespace coxsde::simd
