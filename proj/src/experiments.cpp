#include "infoflow/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <type_traits>

#include "infoflow/error.hpp"
#include "infoflow/format.hpp"
#include "infoflow/netstruct.hpp"
#include "infoflow/rng.hpp"

namespace infoflow {

namespace {

constexpr int kRatioDigits = 10;

std::string scale_label(int k, int lag) { return "k=" + std::to_string(k) + ", L=" + std::to_string(lag); }

double pick(const AveragedRatios& a, FlowKind f) { return f == FlowKind::Mutual ? a.fr_mutual : a.fr_oneway; }
double pick(const FlowRatios& r, FlowKind f) { return f == FlowKind::Mutual ? r.fr_mutual : r.fr_oneway; }
std::size_t pick_count(const FlowRatios& r, FlowKind f) { return f == FlowKind::Mutual ? r.n_mutual : r.n_oneway; }

constexpr FlowKind kFlows[] = {FlowKind::Mutual, FlowKind::OneWay};

LinkUniverse universe_for(UniverseKind kind, const MstEdges* mst, const QuantileGroups* groups) {
  switch (kind) {
    case UniverseKind::AllLinks: return LinkUniverse::all();
    case UniverseKind::MstLinks: return {kind, mst->links()};
    case UniverseKind::UpperQuantile: return {kind, groups->upper};
    case UniverseKind::LowerQuantile: return {kind, groups->lower};
  }
  return LinkUniverse::all();
}

}  // namespace

PanelSource PanelSource::from_prices(PricePanel prices) { return PanelSource(std::move(prices)); }

PanelSource PanelSource::from_returns(ReturnPanel base) {
  if (base.k() != 1) throw Error(ErrorKind::MixedScale, "return source must be a k=1 panel");
  return PanelSource(std::move(base));
}

std::size_t PanelSource::length() const {
  return std::visit([](const auto& p) -> std::size_t {
    if constexpr (std::is_same_v<std::decay_t<decltype(p)>, PricePanel>) return p.n_rows();
    else return p.n_obs();
  }, data_);
}

std::size_t PanelSource::n_assets() const {
  return std::visit([](const auto& p) { return p.n_assets(); }, data_);
}

const std::vector<std::string>& PanelSource::tickers() const {
  return std::visit([](const auto& p) -> const std::vector<std::string>& { return p.tickers(); }, data_);
}

std::size_t PanelSource::n_obs_at(int k) const {
  const auto stride = static_cast<std::size_t>(k);
  if (const auto* p = std::get_if<PricePanel>(&data_)) return p->n_rows() < 1 ? 0 : (p->n_rows() - 1) / stride;
  return std::get<ReturnPanel>(data_).n_obs() / stride;
}

ReturnPanel PanelSource::returns(int k) const {
  if (const auto* p = std::get_if<PricePanel>(&data_)) return to_returns(*p, k);
  const auto& base = std::get<ReturnPanel>(data_);
  if (k == 1) return ReturnPanel::make(1, base.tickers(), base.obs_index(), base.returns());
  return aggregate_returns(base, k);
}

PanelSource PanelSource::window(std::size_t start, std::size_t len) const {
  if (const auto* p = std::get_if<PricePanel>(&data_)) return PanelSource(p->slice(start, len));
  return PanelSource(std::get<ReturnPanel>(data_).slice(start, len));
}

std::string_view to_string(FlowKind f) { return f == FlowKind::Mutual ? "mutual" : "oneway"; }

void AnalysisConfig::validate() const {
  auto bad = [](const std::string& msg) { throw Error(ErrorKind::BadValue, msg); };
  if (!(alpha > 0.0 && alpha < 1.0)) bad("alpha must lie in (0, 1)");
  if (k_values.empty()) bad("k_values must not be empty");
  for (int k : k_values) {
    if (k < 1 || k > kMaxScale) bad("k=" + std::to_string(k) + " outside 1..5");
  }
  if (l_max < 1 || l_max > kMaxScale) bad("l_max must lie in 1..5");
  if (universes.empty()) bad("universes must not be empty");
  if (!(quantile > 0.0 && quantile <= 0.5)) bad("quantile must lie in (0, 0.5]");
}

const FlowRatios& GridResult::cell(int k, int lag, UniverseKind u) const {
  for (const auto& c : cells) {
    if (c.k == k && c.lag == lag && c.universe == u) return c;
  }
  throw Error(ErrorKind::BadValue, "no grid cell for " + scale_label(k, lag) + ", " + std::string(to_string(u)));
}

const AveragedRatios& GridResult::average(int k, UniverseKind u) const {
  for (const auto& a : averaged) {
    if (a.k == k && a.universe == u) return a;
  }
  throw Error(ErrorKind::BadValue, "no average for k=" + std::to_string(k) + ", " + std::string(to_string(u)));
}

double GridResult::average(int k, UniverseKind u, FlowKind f) const { return pick(average(k, u), f); }

GridResult run_grid_scales(const ScaleFn& returns_at, const AnalysisConfig& config) {
  config.validate();
  const bool need_corr = std::any_of(config.universes.begin(), config.universes.end(),
                                     [](UniverseKind u) { return u != UniverseKind::AllLinks; });
  GridResult grid;
  grid.k_values = config.k_values;
  grid.l_max = config.l_max;
  grid.universes = config.universes;

  for (int k : config.k_values) {
    const ReturnPanel panel = returns_at(k);
    if (panel.n_obs() < min_granger_length(config.l_max)) {
      throw Error(ErrorKind::TooShort, scale_label(k, config.l_max) + ": " + std::to_string(panel.n_obs()) +
                                           " returns, need at least " +
                                           std::to_string(min_granger_length(config.l_max)));
    }
    std::optional<MstEdges> mst;
    std::optional<QuantileGroups> groups;
    if (need_corr) {
      const auto corr = correlation_matrix(panel);
      mst = mst_kruskal(distance_matrix(corr));
      groups = quantile_link_groups(corr, config.quantile);
    }
    std::vector<LinkUniverse> universes;
    for (auto u : config.universes) {
      universes.push_back(universe_for(u, mst ? &*mst : nullptr, groups ? &*groups : nullptr));
    }

    std::vector<std::vector<FlowRatios>> per_universe(config.universes.size());
    for (int lag = 1; lag <= config.l_max; ++lag) {
      SweepResult sweep;
      try {
        sweep = sweep_pairs(panel, lag, config.alpha, config.workers);
      } catch (const Error& e) {
        throw e.with_context(scale_label(k, lag));
      }
      for (std::size_t u = 0; u < universes.size(); ++u) {
        auto fr = flow_ratios(sweep, universes[u]);
        grid.cells.push_back(fr);
        per_universe[u].push_back(fr);
      }
    }
    for (const auto& ratios : per_universe) grid.averaged.push_back(avg_over_lags(ratios));
  }
  return grid;
}

GridResult run_grid(const PanelSource& source, const AnalysisConfig& config) {
  config.validate();
  for (int k : config.k_values) {
    if (source.n_obs_at(k) < min_granger_length(config.l_max)) {
      throw Error(ErrorKind::TooShort, scale_label(k, config.l_max) + ": panel of " + std::to_string(source.length()) +
                                           " rows yields " + std::to_string(source.n_obs_at(k)) +
                                           " returns, need at least " +
                                           std::to_string(min_granger_length(config.l_max)));
    }
  }
  return run_grid_scales([&](int k) { return source.returns(k); }, config);
}

const DfrRow& DfrTable::row(int k, UniverseKind u, FlowKind f) const {
  for (const auto& r : rows) {
    if (r.k == k && r.universe == u && r.flow == f) return r;
  }
  throw Error(ErrorKind::BadValue, "no DFR row for k=" + std::to_string(k));
}

DfrTable run_defactor(const PanelSource& source, const AnalysisConfig& config) {
  DfrTable table;
  table.original = run_grid(source, config);
  table.defactored = run_grid_scales(
      [&](int k) {
        try {
          return defactor(source.returns(k));
        } catch (const Error& e) {
          throw e.with_context("defactoring k=" + std::to_string(k));
        }
      },
      config);
  for (int k : config.k_values) {
    for (auto u : config.universes) {
      for (auto f : kFlows) {
        DfrRow r;
        r.k = k;
        r.universe = u;
        r.flow = f;
        r.fr = table.original.average(k, u, f);
        r.mfr = table.defactored.average(k, u, f);
        r.dfr = r.fr - r.mfr;
        table.rows.push_back(r);
      }
    }
  }
  return table;
}

std::size_t window_count(std::size_t total, std::size_t window_len, std::size_t step) {
  if (window_len < 1 || step < 1) throw Error(ErrorKind::BadValue, "window length and step must be >= 1");
  if (total < window_len) {
    throw Error(ErrorKind::WindowTooShort, "window of " + std::to_string(window_len) + " rows exceeds the " +
                                               std::to_string(total) + " available");
  }
  return (total - window_len) / step + 1;
}

std::vector<double> RollingSeries::series(int k, UniverseKind u, FlowKind f) const {
  std::vector<double> out;
  out.reserve(windows.size());
  for (const auto& g : windows) out.push_back(g.average(k, u, f));
  return out;
}

const RollingSeriesJb& RollingSeries::jb_for(int k, UniverseKind u, FlowKind f) const {
  for (const auto& j : jb) {
    if (j.k == k && j.universe == u && j.flow == f) return j;
  }
  throw Error(ErrorKind::BadValue, "no rolling series for k=" + std::to_string(k));
}

RollingSeries run_rolling(const PanelSource& source, std::size_t window_len, std::size_t step,
                          const AnalysisConfig& config) {
  config.validate();
  const std::size_t n = window_count(source.length(), window_len, step);
  RollingSeries out;
  out.window_len = window_len;
  out.step = step;
  out.windows.reserve(n);
  for (std::size_t w = 0; w < n; ++w) {
    const std::size_t start = w * step;
    out.window_starts.push_back(start);
    try {
      out.windows.push_back(run_grid(source.window(start, window_len), config));
    } catch (const Error& e) {
      throw e.with_context("window starting at row " + std::to_string(start));
    }
  }
  for (int k : config.k_values) {
    for (auto u : config.universes) {
      for (auto f : kFlows) {
        RollingSeriesJb j{k, u, f, std::nullopt};
        try {
          j.jb = jarque_bera(out.series(k, u, f));
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::DegenerateSample && e.kind() != ErrorKind::TooShort) throw;
        }
        out.jb.push_back(j);
      }
    }
  }
  return out;
}

FactorPanelSpec factor_spec(const SyntheticSpec& s) {
  constexpr std::uint64_t kParamStream = 1ULL << 40;
  FactorPanelSpec spec;
  spec.n_assets = s.n_assets;
  spec.n_obs = s.n_obs;
  spec.idio_sigma = s.idio_sigma;
  spec.regimes = s.regimes;
  spec.seed = s.seed;
  CounterRng beta_rng(s.seed, kParamStream);
  CounterRng lag_rng(s.seed, kParamStream + 1);
  const double lo = std::ceil(s.lag_min);
  const double hi = std::floor(s.lag_max);
  if (s.integer_lags && !(lo <= hi)) throw Error(ErrorKind::BadValue, "no whole lag inside [lag_min, lag_max]");
  for (std::size_t j = 0; j < s.n_assets; ++j) {
    spec.loadings.push_back(s.beta_min + (s.beta_max - s.beta_min) * beta_rng.uniform());
    if (s.integer_lags)
      spec.response_lags.push_back(lo + static_cast<double>(lag_rng.below(static_cast<std::uint64_t>(hi - lo) + 1)));
    else
      spec.response_lags.push_back(s.lag_min + (s.lag_max - s.lag_min) * lag_rng.uniform());
  }
  return spec;
}

ReturnPanel make_synthetic(const SyntheticSpec& s) {
  if (s.model == SyntheticSpec::Model::WhiteNoise) return gen_white_noise(s.n_assets, s.n_obs, s.seed);
  return gen_factor_panel(factor_spec(s));
}

void write_grid_csv(std::ostream& out, const GridResult& grid) {
  out << "k,L,universe,flow,count,ratio\n";
  for (const auto& c : grid.cells) {
    for (auto f : kFlows) {
      out << c.k << ',' << c.lag << ',' << to_string(c.universe) << ',' << to_string(f) << ',' << pick_count(c, f)
          << ',' << format_double(pick(c, f), kRatioDigits) << '\n';
    }
  }
  // L-averaged rows carry L=mean and no count.
  for (const auto& a : grid.averaged) {
    for (auto f : kFlows) {
      out << a.k << ",mean," << to_string(a.universe) << ',' << to_string(f) << ",,"
          << format_double(pick(a, f), kRatioDigits) << '\n';
    }
  }
}

void write_dfr_csv(std::ostream& out, const DfrTable& table) {
  out << "k,universe,flow,fr,mfr,dfr\n";
  for (const auto& r : table.rows) {
    out << r.k << ',' << to_string(r.universe) << ',' << to_string(r.flow) << ',' << format_double(r.fr, kRatioDigits)
        << ',' << format_double(r.mfr, kRatioDigits) << ',' << format_double(r.dfr, kRatioDigits) << '\n';
  }
}

void write_rolling_csv(std::ostream& out, const RollingSeries& rolling) {
  out << "window_start,k,universe,flow,ratio\n";
  for (std::size_t w = 0; w < rolling.windows.size(); ++w) {
    for (const auto& a : rolling.windows[w].averaged) {
      for (auto f : kFlows) {
        out << rolling.window_starts[w] << ',' << a.k << ',' << to_string(a.universe) << ',' << to_string(f) << ','
            << format_double(pick(a, f), kRatioDigits) << '\n';
      }
    }
  }
}

void write_rolling_jb_csv(std::ostream& out, const RollingSeries& rolling) {
  out << "series,jb,p\n";
  for (const auto& j : rolling.jb) {
    out << 'k' << j.k << '_' << to_string(j.universe) << '_' << to_string(j.flow) << ','
        << (j.jb ? format_double(j.jb->statistic, kRatioDigits) : "nan") << ','
        << (j.jb ? format_double(j.jb->p_value, kRatioDigits) : "nan") << '\n';
  }
}

}  // namespace infoflow
