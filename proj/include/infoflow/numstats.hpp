#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "infoflow/matrix.hpp"

namespace infoflow {

struct OlsFit {
  std::vector<double> coefficients;  // intercept first
  std::vector<double> residuals;
  double rss = 0.0;
  std::size_t n_obs = 0;
  std::size_t n_params = 0;  // includes the intercept
};

// Least squares of `response` on [1, regressors]. Requires M > p + 1.
// Throws SingularDesign when the normal equations are (near) rank deficient.
OlsFit ols_fit(const Matrix& regressors, std::span<const double> response);

// Relative pivot floor for the normal-equation elimination.
inline constexpr double kPivotFloor = 1e-10;

// Solves the symmetric positive definite system G c = rhs by LDL^T
// elimination. G is p x p (either storage order; only the lower triangle is
// read as G[i*p + j], i >= j). Pivot j below kPivotFloor times G_jj raises
// SingularDesign.
std::vector<double> solve_spd(std::span<const double> gram, std::span<const double> rhs, std::size_t p);

// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction.
double reg_inc_beta(double x, double a, double b);

// CDF and upper tail of F(d1, d2). The tail is evaluated directly, so tiny
// p-values keep their relative precision.
double f_cdf(double x, double d1, double d2);
double f_sf(double x, double d1, double d2);

// Student t CDF through the same incomplete-beta kernel.
double student_t_cdf(double t, double nu);

struct JbResult {
  double statistic = 0.0;
  double skewness = 0.0;
  double kurtosis = 0.0;  // raw fourth standardized moment (3 under normality)
  double p_value = 1.0;
  std::size_t n_obs = 0;
};

// Upper tail of chi-square with two degrees of freedom.
double chi2_df2_sf(double x);

// 5% and 1% critical values of chi-square(2): -2 ln(alpha).
inline constexpr double kJbCritical5 = 5.991464547107979;
inline constexpr double kJbCritical1 = 9.210340371976184;

// Jarque-Bera with 1/n central moments. Needs n >= 8 and nonzero variance.
JbResult jarque_bera(std::span<const double> sample);

}  // namespace infoflow
