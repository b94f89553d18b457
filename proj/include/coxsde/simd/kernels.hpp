#pragma once

// Data-parallel inner loops used by the simulators, the networks and the
// metrics. Every kernel has a scalar reference implementation; wider
// variants are compiled into separate translation units and selected once
// at startup from the CPU feature set (override with COXSDE_SIMD=scalar|avx2).

#include <cstddef>
#include <string_view>

namespace coxsde::simd {

enum class Level { Scalar, Avx2 };

std::string_view level_name(Level level);

/// Arguments of the fused set-pooling kernel.
///
/// For every row k of `pre` (rows x width, row-major) the kernel forms
/// h_k = tanh(pre[k] + slope * x) and writes
///   sum[i]   = sum_k h_k[i]
/// and, when `d_sum` is non-null,
///   d_sum[i] = sum_k (1 - h_k[i]^2)
///   d_f0[i]  = sum_k (1 - h_k[i]^2) * f0[k]
///   d_f1[i]  = sum_k (1 - h_k[i]^2) * f1[k]
/// Outputs are overwritten. Rows are visited in ascending order.
struct PoolTanhArgs {
  const double* pre = nullptr;
  const double* slope = nullptr;
  double x = 0.0;
  std::size_t rows = 0;
  std::size_t width = 0;
  const double* f0 = nullptr;
  const double* f1 = nullptr;
  double* sum = nullptr;
  double* d_sum = nullptr;
  double* d_f0 = nullptr;
  double* d_f1 = nullptr;
};

/// Affine-drift Euler step applied to a batch of independent paths:
///   z <- max(floor, z + (a + b z + c t) dt + s * g(z) * dw)
/// with g(z) = sqrt(max(z, 0)) when `sqrt_diffusion` is set and g = 1
/// otherwise. `integral` (optional) accumulates weight * z_before.
struct AffineStepArgs {
  double* z = nullptr;
  const double* dw = nullptr;
  double* integral = nullptr;
  std::size_t n = 0;
  double a = 0.0, b = 0.0, c = 0.0;
  double t = 0.0, dt = 0.0;
  double scale = 0.0;
  bool sqrt_diffusion = false;
  double floor = 0.0;
  double weight = 0.0;
};

struct KernelTable {
  Level level;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // y = a * x + b * y
  void (*axpby)(double a, const double* x, double b, double* y, std::size_t n);
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
  void (*tanh)(const double* x, double* y, std::size_t n);
  // y = W x + bias, W is rows x cols row-major; bias may be null
  void (*gemv)(const double* w, const double* x, const double* bias, double* y, std::size_t rows,
               std::size_t cols);
  // x += W^T g
  void (*gemv_t)(const double* w, const double* g, double* x, std::size_t rows, std::size_t cols);
  // W += g h^T
  void (*rank1)(double* w, const double* g, const double* h, std::size_t rows, std::size_t cols);
  void (*pool_tanh)(const PoolTanhArgs& args);
  void (*affine_step)(const AffineStepArgs& args);
};

bool available(Level level);

/// Kernel table for the active level.
const KernelTable& kernels();

/// Kernel table for a specific level; throws std::invalid_argument if the
/// CPU (or the build) does not support it.
const KernelTable& kernels_for(Level level);

Level active_level();

/// Switches the active level for the whole process. Not thread-safe; call
/// before starting any parallel work.
void set_active_level(Level level);

namespace detail {
const KernelTable& scalar_table();
#if defined(COXSDE_HAVE_AVX2)
const KernelTable& avx2_table();
#endif
}  // namespace detail

}  // namespace coxsde::simd
