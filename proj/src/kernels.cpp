#include "chainspec/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace chainspec::kernels {

#if CHAINSPEC_HAVE_AVX2_TU
const Table* avx2_table_impl();
#endif
#if CHAINSPEC_HAVE_NEON_TU
const Table* neon_table_impl();
#endif

const Table* avx2_table() {
#if CHAINSPEC_HAVE_AVX2_TU
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
    return avx2_table_impl();
#endif
  return nullptr;
}

const Table* neon_table() {
#if CHAINSPEC_HAVE_NEON_TU
  return neon_table_impl();
#else
  return nullptr;
#endif
}

namespace {

const Table* resolve(Mode mode) {
  switch (mode) {
    case Mode::Scalar:
      return &scalar_table();
    case Mode::Avx2:
      return avx2_table();
    case Mode::Neon:
      return neon_table();
    case Mode::Auto:
      if (const Table* t = avx2_table()) return t;
      if (const Table* t = neon_table()) return t;
      return &scalar_table();
  }
  return &scalar_table();
}

Mode env_mode() {
  const char* s = std::getenv("CHAINSPEC_SIMD");
  if (!s) return Mode::Auto;
  if (std::strcmp(s, "scalar") == 0) return Mode::Scalar;
  if (std::strcmp(s, "avx2") == 0) return Mode::Avx2;
  if (std::strcmp(s, "neon") == 0) return Mode::Neon;
  return Mode::Auto;
}

std::atomic<const Table*> g_active{nullptr};

}  // namespace

const Table& active() {
  const Table* t = g_active.load(std::memory_order_acquire);
  if (!t) {
    t = resolve(env_mode());
    if (!t) t = &scalar_table();
    g_active.store(t, std::memory_order_release);
  }
  return *t;
}

void set_mode(Mode mode) {
  const Table* t = resolve(mode);
  g_active.store(t ? t : &scalar_table(), std::memory_order_release);
}

}  // namespace chainspec::kernels
