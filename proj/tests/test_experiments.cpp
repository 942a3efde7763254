#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "infoflow/error.hpp"
#include "infoflow/experiments.hpp"
#include "infoflow/netstruct.hpp"

using namespace infoflow;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Io;
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST_CASE("window arithmetic") {
  CHECK(window_count(144, 48, 1) == 97);
  CHECK(window_count(10, 10, 1) == 1);
  CHECK(window_count(100, 10, 7) == 13);
  CHECK(window_count(100, 10, 90) == 2);
  CHECK(kind_of([] { window_count(9, 10, 1); }) == ErrorKind::WindowTooShort);
  CHECK(kind_of([] { window_count(10, 5, 0); }) == ErrorKind::BadValue);
}

TEST_CASE("grid shape") {
  SyntheticSpec s;
  s.n_assets = 6;
  s.n_obs = 300;
  s.seed = 5;
  AnalysisConfig cfg;
  cfg.universes = {UniverseKind::AllLinks, UniverseKind::MstLinks, UniverseKind::UpperQuantile};
  const auto g = run_grid(PanelSource::from_returns(make_synthetic(s)), cfg);
  CHECK(g.cells.size() == 75);
  CHECK(g.averaged.size() == 15);
  for (auto u : cfg.universes) {
    int n = 0;
    for (const auto& c : g.cells) n += c.universe == u;
    CHECK(n == 25);
  }
  CHECK(g.cell(3, 4, UniverseKind::MstLinks).n_links == 5);
  CHECK(g.cell(3, 4, UniverseKind::UpperQuantile).n_links == 3);
  CHECK(g.cell(1, 1, UniverseKind::AllLinks).n_links == 15);
  for (int k = 1; k <= 5; ++k) {
    double m = 0;
    for (int L = 1; L <= 5; ++L) m += g.cell(k, L, UniverseKind::MstLinks).fr_oneway;
    CHECK(g.average(k, UniverseKind::MstLinks, FlowKind::OneWay) == doctest::Approx(m / 5).epsilon(1e-15));
  }
  CHECK(kind_of([&] { g.cell(6, 1, UniverseKind::AllLinks); }) == ErrorKind::BadValue);
}

TEST_CASE("white noise grid stays inside the null bands") {
  SyntheticSpec s;
  s.model = SyntheticSpec::Model::WhiteNoise;
  s.n_assets = 50;
  s.n_obs = 2000;
  s.seed = 101;
  AnalysisConfig cfg;
  cfg.universes = {UniverseKind::AllLinks};
  const auto g = run_grid(PanelSource::from_returns(make_synthetic(s)), cfg);
  for (const auto& c : g.cells) {
    CHECK(c.fr_oneway >= 0.07);
    CHECK(c.fr_oneway <= 0.12);
    CHECK(c.fr_mutual <= 0.012);
  }
}

TEST_CASE("factor panel with mixed lags exceeds the null band") {
  SyntheticSpec s;
  s.n_assets = 30;
  s.n_obs = 2000;
  s.seed = 2;
  AnalysisConfig cfg;
  cfg.k_values = {1};
  const auto g = run_grid(PanelSource::from_returns(make_synthetic(s)), cfg);
  CHECK(g.average(1, UniverseKind::AllLinks, FlowKind::OneWay) > 0.12);
}

TEST_CASE("defactor table identities") {
  SyntheticSpec s;
  s.n_assets = 12;
  s.n_obs = 600;
  s.seed = 3;
  AnalysisConfig cfg;
  cfg.k_values = {1, 2};
  const auto t = run_defactor(PanelSource::from_returns(make_synthetic(s)), cfg);
  CHECK(t.rows.size() == 2 * 2 * 2);
  for (const auto& r : t.rows) {
    CHECK(r.dfr == r.fr - r.mfr);
    CHECK(r.fr >= 0);
    CHECK(r.fr <= 1);
    CHECK(r.mfr >= 0);
    CHECK(r.mfr <= 1);
    CHECK(r.fr == t.original.average(r.k, r.universe, r.flow));
    CHECK(r.mfr == t.defactored.average(r.k, r.universe, r.flow));
  }
}

TEST_CASE("rank one panel defactors to nothing") {
  FactorPanelSpec f;
  f.n_assets = 8;
  f.n_obs = 400;
  for (std::size_t j = 0; j < 8; ++j) f.loadings.push_back(0.5 + 0.1 * static_cast<double>(j));
  f.response_lags.assign(8, 0.0);
  f.idio_sigma = 0;
  f.seed = 6;
  const auto panel = gen_factor_panel(f);
  const auto res = defactor(panel);
  double worst = 0;
  for (double v : res.returns().data()) worst = std::max(worst, std::fabs(v));
  CHECK(worst < 1e-10);
  const auto sweep = sweep_pairs(res, 1, 0.05);
  CHECK(flow_ratios(sweep, LinkUniverse::all()).fr_mutual < 0.02);
}

TEST_CASE("price and return sources agree") {
  const auto base = make_synthetic(SyntheticSpec{.n_assets = 4, .n_obs = 103, .seed = 7});
  const auto from_r = PanelSource::from_returns(base);
  const auto from_p = PanelSource::from_prices(prices_from_returns(base));
  CHECK(from_r.length() == 103);
  CHECK(from_p.length() == 104);
  for (int k = 1; k <= 5; ++k) {
    const auto a = from_r.returns(k), b = from_p.returns(k);
    REQUIRE(a.n_obs() == b.n_obs());
    CHECK(a.n_obs() == from_r.n_obs_at(k));
    for (std::size_t j = 0; j < 4; ++j)
      for (std::size_t i = 0; i < a.n_obs(); ++i)
        CHECK(a.returns()(i, j) == doctest::Approx(b.returns()(i, j)).epsilon(1e-9));
  }
  CHECK(from_p.window(10, 20).length() == 20);
  CHECK(from_r.window(0, 103).length() == 103);
  CHECK_THROWS_AS(from_r.window(90, 20), Error);
}

TEST_CASE("grid reports the failing scale when a panel is too short") {
  const auto base = make_synthetic(SyntheticSpec{.n_assets = 3, .n_obs = 60, .seed = 7});
  AnalysisConfig cfg;
  try {
    run_grid(PanelSource::from_returns(base), cfg);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TooShort);
    CHECK(std::string(e.what()).find("k=") != std::string::npos);
  }
}

TEST_CASE("grid does not depend on worker count") {
  const auto src = PanelSource::from_returns(make_synthetic(SyntheticSpec{.n_assets = 9, .n_obs = 500, .seed = 4}));
  AnalysisConfig one;
  AnalysisConfig many = one;
  many.workers = 5;
  std::ostringstream a, b;
  write_grid_csv(a, run_grid(src, one));
  write_grid_csv(b, run_grid(src, many));
  CHECK(a.str() == b.str());
}

TEST_CASE("rolling windows") {
  // lagged responders cost the first row, so the panel is 400 long
  const auto src = PanelSource::from_returns(make_synthetic(SyntheticSpec{.n_assets = 4, .n_obs = 401, .seed = 2}));
  REQUIRE(src.length() == 400);
  AnalysisConfig cfg;
  cfg.k_values = {1, 2};
  cfg.l_max = 2;
  const auto r = run_rolling(src, 200, 50, cfg);
  CHECK(r.window_starts == std::vector<std::size_t>{0, 50, 100, 150, 200});
  CHECK(r.windows.size() == 5);
  CHECK(r.series(2, UniverseKind::MstLinks, FlowKind::OneWay).size() == 5);
  CHECK(r.series(1, UniverseKind::AllLinks, FlowKind::Mutual)[3] ==
        r.windows[3].average(1, UniverseKind::AllLinks, FlowKind::Mutual));
  CHECK(r.jb.size() == 2 * 2 * 2);
  CHECK(kind_of([&] { run_rolling(src, 401, 1, cfg); }) == ErrorKind::WindowTooShort);

  // the same window run directly
  const auto direct = run_grid(src.window(100, 200), cfg);
  CHECK(direct.average(2, UniverseKind::AllLinks, FlowKind::OneWay) ==
        r.series(2, UniverseKind::AllLinks, FlowKind::OneWay)[2]);
}

TEST_CASE("synthetic parameter draws") {
  SyntheticSpec s;
  s.n_assets = 200;
  s.beta_min = 0.2;
  s.beta_max = 2.0;
  const auto f = factor_spec(s);
  int lagged = 0;
  for (std::size_t j = 0; j < 200; ++j) {
    CHECK(f.loadings[j] >= 0.2);
    CHECK(f.loadings[j] < 2.0);
    CHECK((f.response_lags[j] == 0.0 || f.response_lags[j] == 1.0));
    lagged += f.response_lags[j] == 1.0;
  }
  CHECK(lagged > 60);
  CHECK(lagged < 140);

  s.integer_lags = false;
  s.lag_min = 0.1;
  s.lag_max = 0.4;
  const auto g = factor_spec(s);
  CHECK(g.loadings == f.loadings);
  for (double w : g.response_lags) {
    CHECK(w >= 0.1);
    CHECK(w < 0.4);
  }
  s.integer_lags = true;
  s.lag_min = 0.2;
  s.lag_max = 0.8;
  CHECK(kind_of([&] { factor_spec(s); }) == ErrorKind::BadValue);
}

TEST_CASE("table writers") {
  const auto src = PanelSource::from_returns(make_synthetic(SyntheticSpec{.n_assets = 4, .n_obs = 300, .seed = 2}));
  AnalysisConfig cfg;
  cfg.k_values = {1};
  cfg.l_max = 2;
  std::ostringstream g, d, r, j;
  write_grid_csv(g, run_grid(src, cfg));
  write_dfr_csv(d, run_defactor(src, cfg));
  const auto roll = run_rolling(src, 100, 100, cfg);
  write_rolling_csv(r, roll);
  write_rolling_jb_csv(j, roll);
  CHECK(first_line(g.str()) == "k,L,universe,flow,count,ratio");
  CHECK(first_line(d.str()) == "k,universe,flow,fr,mfr,dfr");
  CHECK(first_line(r.str()) == "window_start,k,universe,flow,ratio");
  CHECK(first_line(j.str()) == "series,jb,p");
  CHECK(g.str().find("\n1,mean,all,mutual,,") != std::string::npos);
  CHECK(j.str().find("k1_mst_oneway,") != std::string::npos);
  // 2 lags x 2 universes x 2 flows + 4 averaged rows + header
  const std::string gs = g.str();
  CHECK(std::count(gs.begin(), gs.end(), '\n') == 13);
}
