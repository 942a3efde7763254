#include "infoflow/simd/kernels.hpp"

namespace infoflow::simd {
namespace {

// Reduction shared with the vector path: fold lane l+4 into lane l, then
// pairwise over the remaining four.
inline double reduce_lanes(const double* s) {
  const double t0 = s[0] + s[4];
  const double t1 = s[1] + s[5];
  const double t2 = s[2] + s[6];
  const double t3 = s[3] + s[7];
  return (t0 + t1) + (t2 + t3);
}

double sum_scalar(const double* x, std::size_t n) {
  double s[kLanes] = {};
  const std::size_t blocks = n - n % kLanes;
  for (std::size_t i = 0; i < blocks; i += kLanes) {
    for (std::size_t l = 0; l < kLanes; ++l) s[l] = s[l] + x[i + l];
  }
  double r = reduce_lanes(s);
  for (std::size_t i = blocks; i < n; ++i) r = r + x[i];
  return r;
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double s[kLanes] = {};
  const std::size_t blocks = n - n % kLanes;
  for (std::size_t i = 0; i < blocks; i += kLanes) {
    for (std::size_t l = 0; l < kLanes; ++l) s[l] = s[l] + x[i + l] * y[i + l];
  }
  double r = reduce_lanes(s);
  for (std::size_t i = blocks; i < n; ++i) r = r + x[i] * y[i];
  return r;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + a * x[i];
}

constexpr KernelTable kScalar{Backend::Scalar, &sum_scalar, &dot_scalar, &axpy_scalar};

}  // namespace

namespace detail {
const KernelTable& scalar_table() { return kScalar; }
}  // namespace detail

}  // namespace infoflow::simd
