#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "infoflow/simd/kernels.hpp"

using namespace infoflow;

namespace {

std::vector<double> random_vec(std::mt19937_64& gen, std::size_t n, double scale) {
  std::normal_distribution<double> d(0.0, scale);
  std::vector<double> v(n);
  for (auto& x : v) x = d(gen);
  return v;
}

long double naive_dot(const std::vector<double>& x, const std::vector<double>& y) {
  long double s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) s += static_cast<long double>(x[i]) * y[i];
  return s;
}

bool same_bits(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

}  // namespace

TEST_CASE("scalar kernels agree with long double sums") {
  const auto& k = simd::kernels_for(simd::Backend::Scalar);
  std::mt19937_64 gen(11);
  for (std::size_t n : {0u, 1u, 3u, 7u, 8u, 9u, 15u, 16u, 17u, 100u, 1001u}) {
    auto x = random_vec(gen, n, 1.0), y = random_vec(gen, n, 2.0);
    long double s = 0, abs_sum = 0;
    for (double v : x) {
      s += v;
      abs_sum += std::fabs(v);
    }
    CHECK(std::fabs(k.sum(x.data(), n) - static_cast<double>(s)) <= 1e-14 * static_cast<double>(abs_sum) + 1e-300);
    long double abs_dot = 0;
    for (std::size_t i = 0; i < n; ++i) abs_dot += std::fabs(x[i] * y[i]);
    CHECK(std::fabs(k.dot(x.data(), y.data(), n) - static_cast<double>(naive_dot(x, y))) <=
          1e-14 * static_cast<double>(abs_dot) + 1e-300);
    auto z = y;
    k.axpy(0.75, x.data(), z.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(z[i] == y[i] + 0.75 * x[i]);
  }
}

TEST_CASE("empty inputs give zero") {
  const auto& k = simd::kernels_for(simd::Backend::Scalar);
  CHECK(k.sum(nullptr, 0) == 0.0);
  CHECK(k.dot(nullptr, nullptr, 0) == 0.0);
}

TEST_CASE("avx2 kernels are bit-identical to scalar") {
  if (!simd::backend_available(simd::Backend::Avx2)) {
    MESSAGE("avx2 not available on this CPU, skipping");
    CHECK_THROWS_AS(simd::kernels_for(simd::Backend::Avx2), std::invalid_argument);
    return;
  }
  const auto& s = simd::kernels_for(simd::Backend::Scalar);
  const auto& v = simd::kernels_for(simd::Backend::Avx2);
  CHECK(v.backend == simd::Backend::Avx2);
  std::mt19937_64 gen(5);
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t n = gen() % 700;
    const double scale = std::ldexp(1.0, static_cast<int>(gen() % 40) - 20);
    auto x = random_vec(gen, n, scale), y = random_vec(gen, n, 1.0);
    CHECK(same_bits(s.sum(x.data(), n), v.sum(x.data(), n)));
    CHECK(same_bits(s.dot(x.data(), y.data(), n), v.dot(x.data(), y.data(), n)));
    auto ys = y, yv = y;
    const double a = x.empty() ? 1.5 : x[0];
    s.axpy(a, x.data(), ys.data(), n);
    v.axpy(a, x.data(), yv.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(same_bits(ys[i], yv[i]));
  }
}

TEST_CASE("unaligned views stay bit-identical") {
  if (!simd::backend_available(simd::Backend::Avx2)) return;
  const auto& s = simd::kernels_for(simd::Backend::Scalar);
  const auto& v = simd::kernels_for(simd::Backend::Avx2);
  std::mt19937_64 gen(9);
  auto x = random_vec(gen, 257, 1.0), y = random_vec(gen, 257, 1.0);
  for (std::size_t off = 0; off < 8; ++off) {
    const std::size_t n = 257 - off - 3;
    CHECK(same_bits(s.dot(x.data() + off, y.data() + off + 1, n), v.dot(x.data() + off, y.data() + off + 1, n)));
    CHECK(same_bits(s.sum(x.data() + off, n), v.sum(x.data() + off, n)));
  }
}

TEST_CASE("backend override") {
  const auto before = simd::active().backend;
  simd::set_backend(simd::Backend::Scalar);
  CHECK(simd::active().backend == simd::Backend::Scalar);
  std::vector<double> x{1, 2, 3}, y{4, 5, 6};
  CHECK(simd::dot(x, y) == 32.0);
  CHECK(simd::sum(x) == 6.0);
  simd::set_backend(before);
  CHECK(simd::to_string(simd::Backend::Scalar) == "scalar");
  CHECK(simd::to_string(simd::Backend::Avx2) == "avx2");
}
