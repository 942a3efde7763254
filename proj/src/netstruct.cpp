#include "infoflow/netstruct.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

#include "infoflow/error.hpp"
#include "infoflow/format.hpp"
#include "infoflow/numstats.hpp"
#include "infoflow/simd/kernels.hpp"

namespace infoflow {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    std::size_t root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) x = std::exchange(parent_[x], root);
    return root;
  }

  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<unsigned> rank_;
};

double norm2(std::span<const double> v) { return std::sqrt(simd::dot(v, v)); }

void symmetric_matvec(const Matrix& m, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < m.rows(); ++i) y[i] = simd::dot(m.col(i), x);
}

}  // namespace

std::vector<Link> MstEdges::links() const {
  std::vector<Link> out;
  out.reserve(edges.size());
  for (const auto& e : edges) out.push_back({e.a, e.b});
  return out;
}

CorrelationMatrix correlation_matrix(const ReturnPanel& panel) {
  const std::size_t N = panel.n_assets();
  const std::size_t M = panel.n_obs();
  if (M < 3) throw Error(ErrorKind::TooShort, "correlation needs at least 3 observations, got " + std::to_string(M));

  // Center once; Pearson coefficients are then normalized inner products.
  Matrix centered(M, N);
  std::vector<double> norms(N);
  for (std::size_t j = 0; j < N; ++j) {
    const auto c = panel.column(j);
    const double mean = simd::sum(c) / static_cast<double>(M);
    auto out = centered.col(j);
    for (std::size_t i = 0; i < M; ++i) out[i] = c[i] - mean;
    norms[j] = norm2(out);
    if (!(norms[j] > 0.0) || std::all_of(c.begin(), c.end(), [&](double v) { return v == c.front(); })) {
      throw Error(ErrorKind::ZeroVarianceColumn,
                  "ticker '" + panel.tickers()[j] + "' at k=" + std::to_string(panel.k()));
    }
  }

  CorrelationMatrix corr;
  corr.n = N;
  corr.k = panel.k();
  corr.values = Matrix(N, N);
  for (std::size_t a = 0; a < N; ++a) {
    corr.values(a, a) = 1.0;
    for (std::size_t b = a + 1; b < N; ++b) {
      const double rho = simd::dot(centered.col(a), centered.col(b)) / (norms[a] * norms[b]);
      corr.values(a, b) = corr.values(b, a) = std::clamp(rho, -1.0, 1.0);
    }
  }
  return corr;
}

Matrix distance_matrix(const CorrelationMatrix& corr) {
  Matrix d(corr.n, corr.n);
  for (std::size_t a = 0; a < corr.n; ++a) {
    for (std::size_t b = 0; b < corr.n; ++b) {
      d(a, b) = a == b ? 0.0 : std::sqrt(2.0 * (1.0 - corr.values(a, b)));
    }
  }
  return d;
}

MstEdges mst_kruskal(const Matrix& dist) {
  const std::size_t N = dist.rows();
  if (N < 2 || dist.cols() != N) throw Error(ErrorKind::DimensionMismatch, "MST needs a square matrix with N >= 2");
  std::vector<MstEdge> candidates;
  candidates.reserve(N * (N - 1) / 2);
  for (std::size_t a = 0; a < N; ++a) {
    for (std::size_t b = a + 1; b < N; ++b) candidates.push_back({a, b, dist(a, b)});
  }
  std::sort(candidates.begin(), candidates.end(), [](const MstEdge& x, const MstEdge& y) {
    if (x.distance != y.distance) return x.distance < y.distance;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  });

  MstEdges mst;
  mst.edges.reserve(N - 1);
  DisjointSets sets(N);
  for (const auto& e : candidates) {
    if (!sets.unite(e.a, e.b)) continue;
    mst.edges.push_back(e);
    mst.total_length += e.distance;
    if (mst.edges.size() == N - 1) break;
  }
  return mst;
}

EigenMode largest_eigen(const CorrelationMatrix& corr) {
  const std::size_t N = corr.n;
  std::vector<double> v(N, 1.0 / std::sqrt(static_cast<double>(N)));
  std::vector<double> w(N);
  double lambda_prev = 0.0;

  for (int it = 1; it <= kPowerMaxIterations; ++it) {
    symmetric_matvec(corr.values, v, w);
    const double lambda = simd::dot(v, w);
    const double norm = norm2(w);
    if (!(norm > 0.0)) throw Error(ErrorKind::NonConvergence, "power iteration collapsed to the zero vector");
    double change = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      w[i] /= norm;
      change += (w[i] - v[i]) * (w[i] - v[i]);
    }
    std::swap(v, w);
    const bool rayleigh_done = std::fabs(lambda - lambda_prev) < 1e-12 * std::fabs(lambda);
    lambda_prev = lambda;
    if (rayleigh_done && std::sqrt(change) < 1e-10) {
      // Rayleigh quotient of the final, normalized iterate.
      symmetric_matvec(corr.values, v, w);
      EigenMode mode;
      mode.eigenvalue = simd::dot(v, w);
      if (simd::sum(v) < 0.0) {
        for (double& x : v) x = -x;
      }
      mode.eigenvector = std::move(v);
      mode.iterations = it;
      return mode;
    }
  }
  throw Error(ErrorKind::NonConvergence, "power iteration did not converge in " +
                                             std::to_string(kPowerMaxIterations) +
                                             " iterations (largest eigenvalue nearly degenerate)");
}

MarketSeries market_series(const EigenMode& mode, const ReturnPanel& panel) {
  if (mode.eigenvector.size() != panel.n_assets()) {
    throw Error(ErrorKind::DimensionMismatch, "eigenvector has " + std::to_string(mode.eigenvector.size()) +
                                                  " entries, panel has " + std::to_string(panel.n_assets()) + " assets");
  }
  MarketSeries m;
  m.k = panel.k();
  m.values.assign(panel.n_obs(), 0.0);
  for (std::size_t j = 0; j < panel.n_assets(); ++j) simd::axpy(mode.eigenvector[j], panel.column(j), m.values);
  return m;
}

ReturnPanel remove_market_factor(const ReturnPanel& panel, const MarketSeries& market) {
  if (market.values.size() != panel.n_obs()) {
    throw Error(ErrorKind::DimensionMismatch, "market series has " + std::to_string(market.values.size()) +
                                                  " observations, panel has " + std::to_string(panel.n_obs()));
  }
  const auto& mv = market.values;
  if (std::all_of(mv.begin(), mv.end(), [&](double v) { return v == mv.front(); })) {
    throw Error(ErrorKind::ZeroVarianceMarket, "market series is constant at k=" + std::to_string(panel.k()));
  }
  Matrix design(mv.size(), 1);
  std::copy(mv.begin(), mv.end(), design.col(0).begin());

  Matrix residuals(panel.n_obs(), panel.n_assets());
  for (std::size_t j = 0; j < panel.n_assets(); ++j) {
    OlsFit fit;
    try {
      fit = ols_fit(design, panel.column(j));
    } catch (const Error& e) {
      throw e.with_context("defactoring ticker '" + panel.tickers()[j] + "' at k=" + std::to_string(panel.k()));
    }
    std::copy(fit.residuals.begin(), fit.residuals.end(), residuals.col(j).begin());
  }
  return ReturnPanel::make_residual(panel.k(), panel.tickers(), panel.obs_index(), std::move(residuals));
}

ReturnPanel defactor(const ReturnPanel& panel) {
  const auto mode = largest_eigen(correlation_matrix(panel));
  return remove_market_factor(panel, market_series(mode, panel));
}

QuantileGroups quantile_link_groups(const CorrelationMatrix& corr, double q) {
  if (!(q > 0.0 && q <= 0.5)) throw Error(ErrorKind::BadValue, "quantile fraction must lie in (0, 0.5]");
  struct Ranked {
    double rho;
    Link link;
  };
  std::vector<Ranked> ranked;
  for (std::size_t a = 0; a < corr.n; ++a) {
    for (std::size_t b = a + 1; b < corr.n; ++b) ranked.push_back({corr.values(a, b), {a, b}});
  }
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& x, const Ranked& y) {
    if (x.rho != y.rho) return x.rho > y.rho;
    return x.link < y.link;
  });
  const auto count = static_cast<std::size_t>(std::floor(q * static_cast<double>(ranked.size()) + 1e-9));
  QuantileGroups g;
  for (std::size_t i = 0; i < count; ++i) g.upper.push_back(ranked[i].link);
  for (std::size_t i = ranked.size() - count; i < ranked.size(); ++i) g.lower.push_back(ranked[i].link);
  return g;
}

void write_mst_csv(std::ostream& out, const MstEdges& mst) {
  out << "a,b,distance\n";
  for (const auto& e : mst.edges) out << e.a << ',' << e.b << ',' << format_double(e.distance, 17) << '\n';
}

void write_correlation_csv(std::ostream& out, const CorrelationMatrix& corr, std::span<const std::string> tickers) {
  out << "ticker";
  for (const auto& t : tickers) out << ',' << t;
  out << '\n';
  for (std::size_t a = 0; a < corr.n; ++a) {
    out << tickers[a];
    for (std::size_t b = 0; b < corr.n; ++b) out << ',' << format_double(corr.values(a, b), 17);
    out << '\n';
  }
}

}  // namespace infoflow
