#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "infoflow/granger.hpp"
#include "infoflow/matrix.hpp"
#include "infoflow/panel.hpp"

namespace infoflow {

struct CorrelationMatrix {
  std::size_t n = 0;
  Matrix values;  // symmetric, unit diagonal
  int k = 1;
};

struct MstEdge {
  std::size_t a = 0;
  std::size_t b = 0;
  double distance = 0.0;
};

struct MstEdges {
  std::vector<MstEdge> edges;  // in acceptance order
  double total_length = 0.0;

  std::vector<Link> links() const;
};

struct EigenMode {
  double eigenvalue = 0.0;
  std::vector<double> eigenvector;  // unit norm, sum >= 0
  int iterations = 0;
};

struct MarketSeries {
  std::vector<double> values;
  int k = 1;
};

// Pearson coefficients with population averages; diagonal exactly 1 and
// off-diagonal entries clamped to [-1, 1].
CorrelationMatrix correlation_matrix(const ReturnPanel& panel);

// d = sqrt(2 (1 - rho)), zero diagonal.
Matrix distance_matrix(const CorrelationMatrix& corr);

// Kruskal over edges sorted by (distance, a, b) with a path-compressed
// union-find.
MstEdges mst_kruskal(const Matrix& dist);

inline constexpr int kPowerMaxIterations = 10000;

// Dominant eigenpair by power iteration from the normalized all-ones vector.
// Throws NonConvergence after kPowerMaxIterations.
EigenMode largest_eigen(const CorrelationMatrix& corr);

// R_M(t) = sum_j V_j R_j(t).
MarketSeries market_series(const EigenMode& mode, const ReturnPanel& panel);

// Per asset: fit R_j = alpha + beta R_M + e by OLS, return R_j - fitted.
ReturnPanel remove_market_factor(const ReturnPanel& panel, const MarketSeries& market);

// Market mode of the panel's own correlation matrix, regressed out.
ReturnPanel defactor(const ReturnPanel& panel);

struct QuantileGroups {
  std::vector<Link> upper;
  std::vector<Link> lower;
};

// Top and bottom floor(q * N(N-1)/2) links by correlation. Links are ranked
// by (rho descending, a, b); upper takes the head, lower the tail.
QuantileGroups quantile_link_groups(const CorrelationMatrix& corr, double q);

// `a,b,distance`
void write_mst_csv(std::ostream& out, const MstEdges& mst);

// Dense matrix with a ticker header row and a ticker first column.
void write_correlation_csv(std::ostream& out, const CorrelationMatrix& corr, std::span<const std::string> tickers);

}  // namespace infoflow
