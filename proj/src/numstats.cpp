#include "infoflow/numstats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "infoflow/error.hpp"
#include "infoflow/simd/kernels.hpp"

namespace infoflow {

namespace {

constexpr double kBetaTolerance = 1e-14;
constexpr int kBetaMaxIterations = 500;

// Continued fraction for I_x(a, b) (modified Lentz).
double beta_continued_fraction(double x, double a, double b) {
  constexpr double tiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kBetaMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kBetaTolerance) return h;
  }
  throw Error(ErrorKind::NonConvergence, "incomplete beta continued fraction (x=" + std::to_string(x) +
                                             ", a=" + std::to_string(a) + ", b=" + std::to_string(b) + ")");
}

}  // namespace

std::vector<double> solve_spd(std::span<const double> gram, std::span<const double> rhs, std::size_t p) {
  // Unit lower L stored below the diagonal, D on the diagonal.
  std::vector<double> ld(p * p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    // dj / G_jj is 1 - R^2 of variable j on the earlier ones, so the test
    // does not care how each variable is scaled.
    const double floor = kPivotFloor * gram[j * p + j];
    double dj = gram[j * p + j];
    for (std::size_t k = 0; k < j; ++k) dj -= ld[j * p + k] * ld[j * p + k] * ld[k * p + k];
    if (!(dj > floor)) {
      throw Error(ErrorKind::SingularDesign, "pivot " + std::to_string(j) + " is " + std::to_string(dj) +
                                                 " (floor " + std::to_string(floor) + ")");
    }
    ld[j * p + j] = dj;
    for (std::size_t i = j + 1; i < p; ++i) {
      double v = gram[i * p + j];
      for (std::size_t k = 0; k < j; ++k) v -= ld[i * p + k] * ld[j * p + k] * ld[k * p + k];
      ld[i * p + j] = v / dj;
    }
  }

  std::vector<double> c(rhs.begin(), rhs.end());
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t k = 0; k < i; ++k) c[i] -= ld[i * p + k] * c[k];
  }
  for (std::size_t i = 0; i < p; ++i) c[i] /= ld[i * p + i];
  for (std::size_t i = p; i-- > 0;) {
    for (std::size_t k = i + 1; k < p; ++k) c[i] -= ld[k * p + i] * c[k];
  }
  return c;
}

OlsFit ols_fit(const Matrix& regressors, std::span<const double> response) {
  const std::size_t M = response.size();
  const std::size_t p = regressors.cols();
  if (regressors.rows() != M) {
    throw Error(ErrorKind::DimensionMismatch, "regressors have " + std::to_string(regressors.rows()) +
                                                  " rows, response has " + std::to_string(M));
  }
  if (M <= p + 1) {
    throw Error(ErrorKind::TooShort, "OLS needs more than " + std::to_string(p + 1) + " observations, got " +
                                         std::to_string(M));
  }
  const std::size_t q = p + 1;
  std::vector<double> gram(q * q);
  std::vector<double> rhs(q);
  gram[0] = static_cast<double>(M);
  rhs[0] = simd::sum(response);
  for (std::size_t i = 0; i < p; ++i) {
    const auto xi = regressors.col(i);
    gram[(i + 1) * q] = gram[i + 1] = simd::sum(xi);
    rhs[i + 1] = simd::dot(xi, response);
    for (std::size_t j = 0; j <= i; ++j) {
      gram[(i + 1) * q + (j + 1)] = gram[(j + 1) * q + (i + 1)] = simd::dot(xi, regressors.col(j));
    }
  }

  OlsFit fit;
  fit.coefficients = solve_spd(gram, rhs, q);
  fit.residuals.assign(response.begin(), response.end());
  for (double& r : fit.residuals) r -= fit.coefficients[0];
  for (std::size_t i = 0; i < p; ++i) simd::axpy(-fit.coefficients[i + 1], regressors.col(i), fit.residuals);
  fit.rss = simd::dot(fit.residuals, fit.residuals);
  fit.n_obs = M;
  fit.n_params = q;
  return fit;
}

double reg_inc_beta(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw Error(ErrorKind::BadValue, "incomplete beta needs a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw Error(ErrorKind::BadValue, "incomplete beta needs 0 <= x <= 1");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(x, a, b) / a;
  return 1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b;
}

double f_cdf(double x, double d1, double d2) {
  if (!(x > 0.0)) return 0.0;
  if (std::isinf(x)) return 1.0;
  return reg_inc_beta(d1 * x / (d1 * x + d2), d1 / 2.0, d2 / 2.0);
}

double f_sf(double x, double d1, double d2) {
  if (!(x > 0.0)) return 1.0;
  if (std::isinf(x)) return 0.0;
  return reg_inc_beta(d2 / (d2 + d1 * x), d2 / 2.0, d1 / 2.0);
}

double student_t_cdf(double t, double nu) {
  const double tail = 0.5 * reg_inc_beta(nu / (nu + t * t), nu / 2.0, 0.5);
  return t >= 0.0 ? 1.0 - tail : tail;
}

double chi2_df2_sf(double x) { return x <= 0.0 ? 1.0 : std::exp(-x / 2.0); }

JbResult jarque_bera(std::span<const double> sample) {
  const std::size_t n = sample.size();
  if (n < 8) throw Error(ErrorKind::TooShort, "Jarque-Bera needs n >= 8, got " + std::to_string(n));
  if (std::all_of(sample.begin(), sample.end(), [&](double v) { return v == sample.front(); })) {
    throw Error(ErrorKind::DegenerateSample, "Jarque-Bera sample is constant");
  }
  double mean = 0.0;
  for (double v : sample) mean += v;
  mean /= static_cast<double>(n);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : sample) {
    const double d = v - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  const auto nn = static_cast<double>(n);
  m2 /= nn;
  m3 /= nn;
  m4 /= nn;
  if (!(m2 > 0.0)) throw Error(ErrorKind::DegenerateSample, "Jarque-Bera sample has zero variance");

  JbResult r;
  r.n_obs = n;
  r.skewness = m3 / std::pow(m2, 1.5);
  r.kurtosis = m4 / (m2 * m2);
  const double excess = r.kurtosis - 3.0;
  r.statistic = nn / 6.0 * (r.skewness * r.skewness + excess * excess / 4.0);
  r.p_value = chi2_df2_sf(r.statistic);
  return r;
}

}  // namespace infoflow
