#pragma once

// Inner-loop arithmetic used by the regression, correlation and eigen code.
//
// Every kernel has a portable scalar reference and, on x86-64, an AVX2
// variant chosen at runtime. Both variants accumulate into the same eight
// interleaved partial sums and reduce them in the same order without fused
// multiply-add, so the two backends return bit-identical results. Output
// files therefore do not depend on the CPU the run happened on.

#include <cstddef>
#include <span>
#include <string_view>

namespace infoflow::simd {

enum class Backend { Scalar, Avx2 };

std::string_view to_string(Backend b);

struct KernelTable {
  Backend backend;
  double (*sum)(const double* x, std::size_t n);
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
};

// Lane count of the shared accumulation layout.
inline constexpr std::size_t kLanes = 8;

bool backend_available(Backend b);

// Kernel table for a specific backend; throws std::invalid_argument when
// the CPU cannot run it.
const KernelTable& kernels_for(Backend b);

// Active table. Resolved on first use: INFOFLOW_SIMD=scalar|avx2 if set,
// otherwise the widest backend the CPU supports.
const KernelTable& active();

// Overrides the active backend for the rest of the process.
void set_backend(Backend b);

inline double sum(std::span<const double> x) { return active().sum(x.data(), x.size()); }

inline double dot(std::span<const double> x, std::span<const double> y) {
  return active().dot(x.data(), y.data(), x.size() < y.size() ? x.size() : y.size());
}

inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  active().axpy(a, x.data(), y.data(), x.size() < y.size() ? x.size() : y.size());
}

namespace detail {
const KernelTable& scalar_table();
const KernelTable* avx2_table();  // nullptr when not compiled in
}  // namespace detail

}  // namespace infoflow::simd
