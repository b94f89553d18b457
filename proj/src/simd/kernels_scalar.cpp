#include <algorithm>
#include <cmath>

#include "coxsde/simd/kernels.hpp"

namespace coxsde::simd {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void axpby(double a, const double* x, double b, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = a * x[i] + b * y[i];
}

double squared_distance(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void tanh_array(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::tanh(x[i]);
}

void gemv(const double* w, const double* x, const double* bias, double* y, std::size_t rows,
          std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    double s = bias ? bias[r] : 0.0;
    const double* row = w + r * cols;
    for (std::size_t c = 0; c < cols; ++c) s += row[c] * x[c];
    y[r] = s;
  }
}

void gemv_t(const double* w, const double* g, double* x, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double gr = g[r];
    const double* row = w + r * cols;
    for (std::size_t c = 0; c < cols; ++c) x[c] += row[c] * gr;
  }
}

void rank1(double* w, const double* g, const double* h, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double gr = g[r];
    double* row = w + r * cols;
    for (std::size_t c = 0; c < cols; ++c) row[c] += gr * h[c];
  }
}

void pool_tanh(const PoolTanhArgs& a) {
  const bool derivs = a.d_sum != nullptr;
  std::fill(a.sum, a.sum + a.width, 0.0);
  if (derivs) {
    std::fill(a.d_sum, a.d_sum + a.width, 0.0);
    std::fill(a.d_f0, a.d_f0 + a.width, 0.0);
    std::fill(a.d_f1, a.d_f1 + a.width, 0.0);
  }
  for (std::size_t k = 0; k < a.rows; ++k) {
    const double* pre = a.pre + k * a.width;
    for (std::size_t i = 0; i < a.width; ++i) {
      const double h = std::tanh(pre[i] + a.slope[i] * a.x);
      a.sum[i] += h;
      if (derivs) {
        const double d = 1.0 - h * h;
        a.d_sum[i] += d;
        a.d_f0[i] += d * a.f0[k];
        a.d_f1[i] += d * a.f1[k];
      }
    }
  }
}

void affine_step(const AffineStepArgs& a) {
  for (std::size_t i = 0; i < a.n; ++i) {
    const double z = a.z[i];
    if (a.integral) a.integral[i] += a.weight * z;
    const double g = a.sqrt_diffusion ? std::sqrt(std::max(z, 0.0)) : 1.0;
    const double next = z + (a.a + a.b * z + a.c * a.t) * a.dt + a.scale * g * a.dw[i];
    a.z[i] = std::max(next, a.floor);
  }
}

}  // namespace

namespace detail {
const KernelTable& scalar_table() {
  static const KernelTable table{Level::Scalar, dot,  axpy,   axpby,     squared_distance, tanh_array,
                                 gemv,          gemv_t, rank1, pool_tanh, affine_step};
  return table;
}
}  // namespace detail

}  // namespace coxsde::simd
