#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "coxsde/simd/kernels.hpp"

namespace coxsde::simd {
namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, scale);
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

// Sizes straddle the 4-wide vector boundary and its remainders.
const std::size_t kSizes[] = {0, 1, 3, 4, 5, 7, 8, 13, 64, 67, 257};

void expect_close(const std::vector<double>& a, const std::vector<double>& b, double tol) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(a[i], b[i], tol * (1.0 + std::abs(a[i]))) << "at " << i;
  }
}

class SimdEquivalence : public ::testing::Test {
 protected:
  void SetUp() override {
    if (!available(Level::Avx2)) GTEST_SKIP() << "AVX2 not available";
  }
  const KernelTable& ref = kernels_for(Level::Scalar);
  const KernelTable& vec() { return kernels_for(Level::Avx2); }
};

TEST_F(SimdEquivalence, Reductions) {
  for (std::size_t n : kSizes) {
    const auto a = random_vec(n, 1 + n), b = random_vec(n, 100 + n);
    EXPECT_NEAR(ref.dot(a.data(), b.data(), n), vec().dot(a.data(), b.data(), n), 1e-12 * (1.0 + n));
    EXPECT_NEAR(ref.squared_distance(a.data(), b.data(), n), vec().squared_distance(a.data(), b.data(), n),
                1e-12 * (1.0 + n));
  }
}

TEST_F(SimdEquivalence, Axpy) {
  for (std::size_t n : kSizes) {
    const auto x = random_vec(n, 3 + n);
    auto y1 = random_vec(n, 4 + n), y2 = y1;
    ref.axpy(0.7, x.data(), y1.data(), n);
    vec().axpy(0.7, x.data(), y2.data(), n);
    expect_close(y1, y2, 1e-15);
    ref.axpby(-1.3, x.data(), 0.4, y1.data(), n);
    vec().axpby(-1.3, x.data(), 0.4, y2.data(), n);
    expect_close(y1, y2, 1e-15);
  }
}

TEST_F(SimdEquivalence, Tanh) {
  for (std::size_t n : kSizes) {
    auto x = random_vec(n, 5 + n, 4.0);
    if (n > 3) {
      x[0] = 0.0;
      x[1] = 30.0;
      x[2] = -30.0;
    }
    std::vector<double> y1(n), y2(n);
    ref.tanh(x.data(), y1.data(), n);
    vec().tanh(x.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_NEAR(y1[i], std::tanh(x[i]), 1e-15);
      EXPECT_NEAR(y2[i], std::tanh(x[i]), 1e-14) << "x=" << x[i];
    }
  }
}

TEST_F(SimdEquivalence, MatrixKernels) {
  const std::pair<std::size_t, std::size_t> shapes[] = {{1, 1}, {3, 2}, {8, 5}, {64, 34}, {32, 64}, {7, 9}};
  for (auto [r, c] : shapes) {
    const auto w = random_vec(r * c, r * 31 + c), x = random_vec(c, r + 7), b = random_vec(r, c + 9);
    std::vector<double> y1(r), y2(r);
    ref.gemv(w.data(), x.data(), b.data(), y1.data(), r, c);
    vec().gemv(w.data(), x.data(), b.data(), y2.data(), r, c);
    expect_close(y1, y2, 1e-13);
    ref.gemv(w.data(), x.data(), nullptr, y1.data(), r, c);
    vec().gemv(w.data(), x.data(), nullptr, y2.data(), r, c);
    expect_close(y1, y2, 1e-13);

    const auto g = random_vec(r, r + c + 11);
    auto xb1 = random_vec(c, 2), xb2 = xb1;
    ref.gemv_t(w.data(), g.data(), xb1.data(), r, c);
    vec().gemv_t(w.data(), g.data(), xb2.data(), r, c);
    expect_close(xb1, xb2, 1e-13);

    auto w1 = w, w2 = w;
    ref.rank1(w1.data(), g.data(), x.data(), r, c);
    vec().rank1(w2.data(), g.data(), x.data(), r, c);
    expect_close(w1, w2, 1e-15);
  }
}

TEST_F(SimdEquivalence, PoolTanh) {
  for (std::size_t width : {1, 4, 6, 64}) {
    for (std::size_t rows : {0, 1, 5, 40}) {
      const auto pre = random_vec(rows * width, rows + width), slope = random_vec(width, width + 1);
      const auto f0 = random_vec(rows, rows + 2), f1 = random_vec(rows, rows + 3);
      std::vector<double> s1(width), d1(width), a1(width), b1(width);
      std::vector<double> s2(width), d2(width), a2(width), b2(width);
      PoolTanhArgs args{pre.data(), slope.data(), 0.37, rows, width, f0.data(), f1.data(),
                        s1.data(),  d1.data(),    a1.data(), b1.data()};
      ref.pool_tanh(args);
      args.sum = s2.data();
      args.d_sum = d2.data();
      args.d_f0 = a2.data();
      args.d_f1 = b2.data();
      vec().pool_tanh(args);
      expect_close(s1, s2, 1e-13);
      expect_close(d1, d2, 1e-13);
      expect_close(a1, a2, 1e-13);
      expect_close(b1, b2, 1e-13);

      // Value-only mode.
      std::vector<double> s3(width);
      PoolTanhArgs v{pre.data(), slope.data(), 0.37, rows, width};
      v.sum = s3.data();
      vec().pool_tanh(v);
      expect_close(s1, s3, 1e-13);
    }
  }
}

TEST(SimdReference, PoolTanhMatchesDefinition) {
  const std::size_t rows = 3, width = 2;
  const std::vector<double> pre = {0.1, -0.2, 0.5, 0.3, -1.0, 2.0}, slope = {0.5, -0.25};
  const std::vector<double> f0 = {1.0, 2.0, 3.0}, f1 = {-1.0, 0.5, 0.25};
  std::vector<double> sum(width), ds(width), d0(width), d1(width);
  const double x = 0.8;
  kernels_for(Level::Scalar).pool_tanh({pre.data(), slope.data(), x, rows, width, f0.data(), f1.data(), sum.data(),
                                        ds.data(), d0.data(), d1.data()});
  for (std::size_t i = 0; i < width; ++i) {
    double s = 0, a = 0, b = 0, c = 0;
    for (std::size_t k = 0; k < rows; ++k) {
      const double h = std::tanh(pre[k * width + i] + slope[i] * x);
      s += h;
      a += 1 - h * h;
      b += (1 - h * h) * f0[k];
      c += (1 - h * h) * f1[k];
    }
    EXPECT_DOUBLE_EQ(sum[i], s);
    EXPECT_DOUBLE_EQ(ds[i], a);
    EXPECT_DOUBLE_EQ(d0[i], b);
    EXPECT_DOUBLE_EQ(d1[i], c);
  }
}

TEST_F(SimdEquivalence, AffineStep) {
  for (bool sq : {false, true}) {
    for (std::size_t n : kSizes) {
      auto z1 = random_vec(n, n + 21, 3.0);
      for (auto& v : z1) v = std::abs(v) + (n % 2 ? 0.0 : -1.0);  // some negative states hit the floor
      auto z2 = z1;
      const auto dw = random_vec(n, n + 22, 0.2);
      std::vector<double> i1(n, 0.5), i2(n, 0.5);
      AffineStepArgs a{z1.data(), dw.data(), i1.data(), n, 24.0, -0.3, 0.1, 0.4, 0.04, 1.0, sq, 1e-6, 0.04};
      ref.affine_step(a);
      a.z = z2.data();
      a.integral = i2.data();
      vec().affine_step(a);
      expect_close(z1, z2, 1e-14);
      expect_close(i1, i2, 1e-14);
      for (double v : z2) EXPECT_GE(v, 1e-6);
    }
  }
}

TEST(SimdDispatch, ActiveLevelSwitches) {
  const Level before = active_level();
  set_active_level(Level::Scalar);
  EXPECT_EQ(kernels().level, Level::Scalar);
  if (available(Level::Avx2)) {
    set_active_level(Level::Avx2);
    EXPECT_EQ(kernels().level, Level::Avx2);
  }
  set_active_level(before);
  EXPECT_EQ(level_name(Level::Scalar), "scalar");
}

}  // namespace
}  // namespace coxsde::simd
