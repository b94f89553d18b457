#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "coxsde/simd/kernels.hpp"

namespace coxsde::simd {
namespace {

bool cpu_has_avx2() {
#if defined(COXSDE_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Level detect() {
  if (const char* env = std::getenv("COXSDE_SIMD")) {
    const std::string v(env);
    if (v == "scalar") return Level::Scalar;
    if (v == "avx2") {
      if (!cpu_has_avx2()) throw std::invalid_argument("COXSDE_SIMD=avx2 but AVX2/FMA is unavailable");
      return Level::Avx2;
    }
    throw std::invalid_argument("unknown COXSDE_SIMD value: " + v);
  }
  return cpu_has_avx2() ? Level::Avx2 : Level::Scalar;
}

std::atomic<const KernelTable*>& active() {
  static std::atomic<const KernelTable*> table{&kernels_for(detect())};
  return table;
}

}  // namespace

std::string_view level_name(Level level) {
  switch (level) {
    case Level::Scalar:
      return "scalar";
    case Level::Avx2:
      return "avx2";
  }
  return "unknown";
}

bool available(Level level) {
  return level == Level::Scalar || (level == Level::Avx2 && cpu_has_avx2());
}

const KernelTable& kernels_for(Level level) {
  if (level == Level::Scalar) return detail::scalar_table();
#if defined(COXSDE_HAVE_AVX2)
  if (level == Level::Avx2 && cpu_has_avx2()) return detail::avx2_table();
#endif
  throw std::invalid_argument("SIMD level not available: " + std::string(level_name(level)));
}

const KernelTable& kernels() { return *active().load(std::memory_order_relaxed); }

Level active_level() { return kernels().level; }

void set_active_level(Level level) { active().store(&kernels_for(level), std::memory_order_relaxed); }

}  // namespace coxsde::simd
