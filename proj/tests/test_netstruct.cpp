#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include "infoflow/error.hpp"
#include "infoflow/netstruct.hpp"
#include "infoflow/numstats.hpp"
#include "oracles.hpp"

using namespace infoflow;

namespace {

ReturnPanel panel_of(const std::vector<std::vector<double>>& cols) {
  Matrix m(cols.front().size(), cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (std::size_t i = 0; i < cols[j].size(); ++i) m(i, j) = cols[j][i];
  std::vector<std::size_t> idx(m.rows());
  std::iota(idx.begin(), idx.end(), std::size_t{1});
  return ReturnPanel::make_residual(1, default_tickers(cols.size()), idx, m);
}

CorrelationMatrix corr_from(const std::vector<double>& rowmajor, std::size_t n) {
  CorrelationMatrix c;
  c.n = n;
  c.values = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) c.values(i, j) = rowmajor[i * n + j];
  return c;
}

Matrix dist_from(const std::vector<double>& rowmajor, std::size_t n) {
  Matrix d(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) d(i, j) = rowmajor[i * n + j];
  return d;
}

std::set<std::pair<std::size_t, std::size_t>> edge_set(const MstEdges& m) {
  std::set<std::pair<std::size_t, std::size_t>> s;
  for (const auto& e : m.edges) s.insert({std::min(e.a, e.b), std::max(e.a, e.b)});
  return s;
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Io;
}

// Correlation matrix of random data with a common component.
std::vector<double> random_corr(std::mt19937_64& gen, std::size_t n, std::size_t m) {
  std::normal_distribution<double> nd;
  std::vector<std::vector<double>> cols(n, std::vector<double>(m));
  std::vector<double> f(m);
  for (auto& v : f) v = nd(gen);
  for (std::size_t j = 0; j < n; ++j) {
    const double load = 0.2 + 0.3 * static_cast<double>(j % 3);
    for (std::size_t t = 0; t < m; ++t) cols[j][t] = load * f[t] + nd(gen);
  }
  const auto c = correlation_matrix(panel_of(cols));
  std::vector<double> out(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = c.values(i, j);
  return out;
}

}  // namespace

TEST_CASE("pearson coefficients") {
  const auto c = correlation_matrix(panel_of({{1, 2, 3, 4}, {1, 3, 2, 4}, {1, 2, 3, 4}, {-1, -2, -3, -4}}));
  CHECK(c.values(0, 1) == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(c.values(1, 0) == c.values(0, 1));
  CHECK(c.values(0, 2) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(c.values(0, 3) == doctest::Approx(-1.0).epsilon(1e-15));
  for (std::size_t i = 0; i < 4; ++i) CHECK(c.values(i, i) == 1.0);
  CHECK(kind_of([] { correlation_matrix(panel_of({{1, 2}, {2, 1}})); }) == ErrorKind::TooShort);
  CHECK(kind_of([] { correlation_matrix(panel_of({{1, 2, 3}, {2, 2, 2}})); }) == ErrorKind::ZeroVarianceColumn);
}

TEST_CASE("distances") {
  const auto d = distance_matrix(corr_from({1, 1, 0, 1, 1, -1, 0, -1, 1}, 3));
  CHECK(d(0, 1) == 0.0);
  CHECK(d(0, 2) == doctest::Approx(1.4142136).epsilon(1e-7));
  CHECK(d(1, 2) == 2.0);
  CHECK(d(2, 2) == 0.0);
}

TEST_CASE("three node tree") {
  const auto m = mst_kruskal(dist_from({0, 0.5, 0.9, 0.5, 0, 0.7, 0.9, 0.7, 0}, 3));
  CHECK(edge_set(m) == std::set<std::pair<std::size_t, std::size_t>>{{0, 1}, {1, 2}});
  CHECK(m.total_length == doctest::Approx(1.2).epsilon(1e-15));
  CHECK(m.edges[0].distance == 0.5);
}

TEST_CASE("ties resolve by index") {
  for (std::size_t n : {2u, 3u, 6u}) {
    std::vector<double> d(n * n, 1.0);
    for (std::size_t i = 0; i < n; ++i) d[i * n + i] = 0.0;
    const auto m = mst_kruskal(dist_from(d, n));
    REQUIRE(m.edges.size() == n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      CHECK(m.edges[i].a == 0);
      CHECK(m.edges[i].b == i + 1);
    }
  }
}

TEST_CASE("kruskal matches exhaustive enumeration") {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> ud(0.0, 2.0);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 2 + rep % 6;
    std::vector<double> d(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) d[i * n + j] = d[j * n + i] = ud(gen);
    const auto m = mst_kruskal(dist_from(d, n));
    const auto ref = oracle::brute_force_mst(d, n);
    CHECK(m.total_length == doctest::Approx(ref.weight).epsilon(1e-12));
    if (ref.n_optimal == 1) {
      std::set<std::pair<std::size_t, std::size_t>> want(ref.best.begin(), ref.best.end());
      CHECK(edge_set(m) == want);
    }
  }
}

TEST_CASE("two by two eigenpair") {
  const auto e = largest_eigen(corr_from({1, 0.5, 0.5, 1}, 2));
  CHECK(e.eigenvalue == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(e.eigenvector[0] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-10));
  CHECK(e.eigenvector[1] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-10));
}

TEST_CASE("equicorrelation") {
  for (std::size_t n : {3u, 10u, 40u}) {
    for (double rho : {0.1, 0.5, 0.9}) {
      std::vector<double> c(n * n, rho);
      for (std::size_t i = 0; i < n; ++i) c[i * n + i] = 1.0;
      const auto e = largest_eigen(corr_from(c, n));
      CHECK(std::fabs(e.eigenvalue - (1 + (static_cast<double>(n) - 1) * rho)) < 1e-8);
      for (double v : e.eigenvector) CHECK(std::fabs(v - 1 / std::sqrt(static_cast<double>(n))) < 1e-8);
    }
  }
}

TEST_CASE("power iteration agrees with jacobi") {
  std::mt19937_64 gen(31);
  for (int rep = 0; rep < 50; ++rep) {
    const auto c = random_corr(gen, 6, 40);
    const auto e = largest_eigen(corr_from(c, 6));
    const auto ref = oracle::jacobi(c, 6);
    const auto top = static_cast<std::size_t>(std::max_element(ref.vals.begin(), ref.vals.end()) - ref.vals.begin());
    CHECK(std::fabs(e.eigenvalue - ref.vals[top]) < 1e-7);
    double sum = 0;
    for (std::size_t i = 0; i < 6; ++i) sum += ref.vecs[i * 6 + top];
    const double sign = sum >= 0 ? 1.0 : -1.0;
    for (std::size_t i = 0; i < 6; ++i) CHECK(std::fabs(e.eigenvector[i] - sign * ref.vecs[i * 6 + top]) < 1e-7);
    CHECK(std::accumulate(e.eigenvector.begin(), e.eigenvector.end(), 0.0) >= 0.0);
  }
}

TEST_CASE("market series") {
  EigenMode mode;
  mode.eigenvector = {0.6, 0.8};
  const auto one = market_series(mode, panel_of({{1.0}, {1.0}}));
  REQUIRE(one.values.size() == 1);
  CHECK(one.values[0] == doctest::Approx(1.4).epsilon(1e-15));

  std::mt19937_64 gen(1);
  std::normal_distribution<double> nd;
  std::vector<std::vector<double>> cols(5, std::vector<double>(30));
  for (auto& c : cols)
    for (auto& v : c) v = nd(gen);
  const auto panel = panel_of(cols);
  mode.eigenvector.assign(5, 1 / std::sqrt(5.0));
  const auto rm = market_series(mode, panel);
  for (std::size_t t = 0; t < 30; ++t) {
    double mean = 0;
    for (const auto& c : cols) mean += c[t] / 5;
    CHECK(std::fabs(rm.values[t] - std::sqrt(5.0) * mean) < 1e-10);
  }
  mode.eigenvector = {1, 0, 0};
  CHECK(kind_of([&] { market_series(mode, panel); }) == ErrorKind::DimensionMismatch);
}

TEST_CASE("rank one panel recovers the factor") {
  FactorPanelSpec s;
  s.n_assets = 5;
  s.n_obs = 300;
  s.loadings = {0.5, 1.0, 1.5, 2.0, 0.7};
  s.response_lags.assign(5, 0.0);
  s.idio_sigma = 0;
  s.seed = 3;
  const auto panel = gen_factor_panel(s);
  const auto rm = market_series(largest_eigen(correlation_matrix(panel)), panel);
  // the first column is 0.5 F
  const auto f = panel.column(0);
  const auto c = correlation_matrix(panel_of({rm.values, {f.begin(), f.end()}}));
  CHECK(std::fabs(std::fabs(c.values(0, 1)) - 1.0) < 1e-8);
}

TEST_CASE("exactly explained columns vanish") {
  std::mt19937_64 gen(4);
  std::normal_distribution<double> nd;
  std::vector<double> m(50), other(50);
  for (auto& v : m) v = nd(gen);
  for (auto& v : other) v = nd(gen);
  std::vector<double> triple(50);
  for (std::size_t t = 0; t < 50; ++t) triple[t] = 3 * m[t];
  const auto res = remove_market_factor(panel_of({triple, other}), MarketSeries{m, 1});
  for (double v : res.column(0)) CHECK(std::fabs(v) <= 1e-12);

  // residuals carry no market exposure
  Matrix x(50, 1);
  for (std::size_t t = 0; t < 50; ++t) x(t, 0) = m[t];
  const auto refit = ols_fit(x, res.column(1));
  CHECK(std::fabs(refit.coefficients[0]) < 1e-10);
  CHECK(std::fabs(refit.coefficients[1]) < 1e-10);

  CHECK(kind_of([&] { remove_market_factor(panel_of({triple, other}), MarketSeries{std::vector<double>(50, 2.0), 1}); }) ==
        ErrorKind::ZeroVarianceMarket);
  CHECK(kind_of([&] { remove_market_factor(panel_of({triple, other}), MarketSeries{std::vector<double>(49, 2.0), 1}); }) ==
        ErrorKind::DimensionMismatch);
}

TEST_CASE("defactoring strips common correlation") {
  FactorPanelSpec s;
  s.n_assets = 20;
  s.n_obs = 2000;
  for (std::size_t j = 0; j < 20; ++j) s.loadings.push_back(0.5 + 0.05 * static_cast<double>(j));
  s.response_lags.assign(20, 0.0);
  s.idio_sigma = 0.5;
  s.seed = 12;
  const auto panel = gen_factor_panel(s);
  auto mean_abs = [](const CorrelationMatrix& c) {
    double t = 0;
    int n = 0;
    for (std::size_t i = 0; i < c.n; ++i)
      for (std::size_t j = i + 1; j < c.n; ++j, ++n) t += std::fabs(c.values(i, j));
    return t / n;
  };
  const double before = mean_abs(correlation_matrix(panel));
  const double after = mean_abs(correlation_matrix(defactor(panel)));
  CHECK(after < 0.2 * before);
}

TEST_CASE("quantile link groups") {
  std::mt19937_64 gen(8);
  const auto c = random_corr(gen, 5, 30);
  const auto g = quantile_link_groups(corr_from(c, 5), 0.2);
  CHECK(g.upper.size() == 2);
  CHECK(g.lower.size() == 2);

  // exhaustive ranking
  std::vector<std::tuple<double, std::size_t, std::size_t>> all;
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = i + 1; j < 5; ++j) all.emplace_back(-c[i * 5 + j], i, j);
  std::sort(all.begin(), all.end());
  std::set<Link> up, lo;
  for (int i = 0; i < 2; ++i) up.insert(Link{std::get<1>(all[i]), std::get<2>(all[i])});
  for (int i = 8; i < 10; ++i) lo.insert(Link{std::get<1>(all[i]), std::get<2>(all[i])});
  CHECK(std::set<Link>(g.upper.begin(), g.upper.end()) == up);
  CHECK(std::set<Link>(g.lower.begin(), g.lower.end()) == lo);

  std::vector<double> flat(25, 0.3);
  for (std::size_t i = 0; i < 5; ++i) flat[i * 5 + i] = 1;
  const auto t = quantile_link_groups(corr_from(flat, 5), 0.2);
  CHECK(std::set<Link>(t.upper.begin(), t.upper.end()) == std::set<Link>{{0, 1}, {0, 2}});
  CHECK(std::set<Link>(t.lower.begin(), t.lower.end()) == std::set<Link>{{2, 4}, {3, 4}});

  const auto half = quantile_link_groups(corr_from(flat, 5), 0.5);
  std::set<Link> u(half.upper.begin(), half.upper.end());
  for (const auto& l : half.lower) CHECK(u.count(l) == 0);
}

TEST_CASE("mst csv") {
  const auto m = mst_kruskal(dist_from({0, 0.5, 0.9, 0.5, 0, 0.7, 0.9, 0.7, 0}, 3));
  std::ostringstream out;
  write_mst_csv(out, m);
  CHECK(out.str() == "a,b,distance\n0,1,0.5\n1,2,0.69999999999999996\n");
  CHECK(m.links() == std::vector<Link>{{0, 1}, {1, 2}});
}
