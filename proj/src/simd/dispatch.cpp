#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "infoflow/simd/kernels.hpp"

namespace infoflow::simd {
namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelTable* resolve_default() {
  if (const char* env = std::getenv("INFOFLOW_SIMD")) {
    const std::string want(env);
    if (want == "scalar") return &detail::scalar_table();
    if (want == "avx2" && backend_available(Backend::Avx2)) return detail::avx2_table();
  }
  if (backend_available(Backend::Avx2)) return detail::avx2_table();
  return &detail::scalar_table();
}

std::atomic<const KernelTable*> g_active{nullptr};

}  // namespace

std::string_view to_string(Backend b) {
  switch (b) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
  }
  return "unknown";
}

bool backend_available(Backend b) {
  switch (b) {
    case Backend::Scalar: return true;
    case Backend::Avx2: return detail::avx2_table() != nullptr && cpu_has_avx2();
  }
  return false;
}

const KernelTable& kernels_for(Backend b) {
  if (!backend_available(b)) {
    throw std::invalid_argument("SIMD backend not available: " + std::string(to_string(b)));
  }
  return b == Backend::Avx2 ? *detail::avx2_table() : detail::scalar_table();
}

const KernelTable& active() {
  const KernelTable* t = g_active.load(std::memory_order_acquire);
  if (t == nullptr) {
    const KernelTable* resolved = resolve_default();
    g_active.compare_exchange_strong(t, resolved, std::memory_order_acq_rel);
    t = g_active.load(std::memory_order_acquire);
  }
  return *t;
}

void set_backend(Backend b) { g_active.store(&kernels_for(b), std::memory_order_release); }

}  // namespace infoflow::simd
