// Compiled with -mavx2 only. No -mfma: products and sums must round
// separately to match the scalar reference.
#include "infoflow/simd/kernels.hpp"

#if defined(INFOFLOW_HAVE_AVX2)

#include <immintrin.h>

namespace infoflow::simd {
namespace {

inline double reduce_lanes(__m256d lo, __m256d hi) {
  alignas(32) double t[4];
  _mm256_store_pd(t, _mm256_add_pd(lo, hi));
  return (t[0] + t[1]) + (t[2] + t[3]);
}

double sum_avx2(const double* x, std::size_t n) {
  __m256d lo = _mm256_setzero_pd();
  __m256d hi = _mm256_setzero_pd();
  const std::size_t blocks = n - n % kLanes;
  for (std::size_t i = 0; i < blocks; i += kLanes) {
    lo = _mm256_add_pd(lo, _mm256_loadu_pd(x + i));
    hi = _mm256_add_pd(hi, _mm256_loadu_pd(x + i + 4));
  }
  double r = reduce_lanes(lo, hi);
  for (std::size_t i = blocks; i < n; ++i) r = r + x[i];
  return r;
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d lo = _mm256_setzero_pd();
  __m256d hi = _mm256_setzero_pd();
  const std::size_t blocks = n - n % kLanes;
  for (std::size_t i = 0; i < blocks; i += kLanes) {
    lo = _mm256_add_pd(lo, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    hi = _mm256_add_pd(hi, _mm256_mul_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4)));
  }
  double r = reduce_lanes(lo, hi);
  for (std::size_t i = blocks; i < n; ++i) r = r + x[i] * y[i];
  return r;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  const std::size_t blocks = n - n % 4;
  for (std::size_t i = 0; i < blocks; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_add_pd(vy, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    _mm256_storeu_pd(y + i, vy);
  }
  for (std::size_t i = blocks; i < n; ++i) y[i] = y[i] + a * x[i];
}

constexpr KernelTable kAvx2{Backend::Avx2, &sum_avx2, &dot_avx2, &axpy_avx2};

}  // namespace

namespace detail {
const KernelTable* avx2_table() { return &kAvx2; }
}  // namespace detail

}  // namespace infoflow::simd

#else

namespace infoflow::simd::detail {
const KernelTable* avx2_table() { return nullptr; }
}  // namespace infoflow::simd::detail

#endif
