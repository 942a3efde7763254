#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "infoflow/granger.hpp"
#include "infoflow/numstats.hpp"
#include "infoflow/panel.hpp"

namespace infoflow {

// Where returns at each time scale come from: a price panel (converted with
// to_returns) or a k=1 return panel (aggregated in blocks of k). Windows are
// measured on the source's own row axis.
class PanelSource {
 public:
  static PanelSource from_prices(PricePanel prices);
  static PanelSource from_returns(ReturnPanel base);

  std::size_t length() const;
  std::size_t n_assets() const;
  const std::vector<std::string>& tickers() const;

  // Number of k-returns available.
  std::size_t n_obs_at(int k) const;
  ReturnPanel returns(int k) const;

  // Rows [start, start + len) of the source.
  PanelSource window(std::size_t start, std::size_t len) const;

  const PricePanel* prices() const { return std::get_if<PricePanel>(&data_); }

 private:
  explicit PanelSource(std::variant<PricePanel, ReturnPanel> data) : data_(std::move(data)) {}
  std::variant<PricePanel, ReturnPanel> data_;
};

enum class FlowKind { Mutual, OneWay };

std::string_view to_string(FlowKind f);

struct AnalysisConfig {
  double alpha = 0.05;
  std::vector<int> k_values{1, 2, 3, 4, 5};
  int l_max = 5;
  std::vector<UniverseKind> universes{UniverseKind::AllLinks, UniverseKind::MstLinks};
  double quantile = 0.2;
  unsigned workers = 1;

  void validate() const;
};

struct GridResult {
  std::vector<int> k_values;
  int l_max = 0;
  std::vector<UniverseKind> universes;
  std::vector<FlowRatios> cells;         // ordered by (k, L, universe)
  std::vector<AveragedRatios> averaged;  // ordered by (k, universe)

  const FlowRatios& cell(int k, int lag, UniverseKind u) const;
  const AveragedRatios& average(int k, UniverseKind u) const;
  double average(int k, UniverseKind u, FlowKind f) const;
};

using ScaleFn = std::function<ReturnPanel(int k)>;

// (k, L) grid: per k, rebuild correlation/MST/quantile universes, sweep
// L = 1..l_max, count flows per universe and average over L.
GridResult run_grid(const PanelSource& source, const AnalysisConfig& config);
GridResult run_grid_scales(const ScaleFn& returns_at, const AnalysisConfig& config);

struct DfrRow {
  int k = 1;
  UniverseKind universe = UniverseKind::AllLinks;
  FlowKind flow = FlowKind::Mutual;
  double fr = 0.0;
  double mfr = 0.0;
  double dfr = 0.0;  // fr - mfr
};

struct DfrTable {
  GridResult original;
  GridResult defactored;
  std::vector<DfrRow> rows;  // ordered by (k, universe, flow)

  const DfrRow& row(int k, UniverseKind u, FlowKind f) const;
};

// Grid on the original returns and on market-mode-removed returns; the
// market mode is rebuilt for every k.
DfrTable run_defactor(const PanelSource& source, const AnalysisConfig& config);

std::size_t window_count(std::size_t total, std::size_t window_len, std::size_t step);

struct RollingSeriesJb {
  int k = 1;
  UniverseKind universe = UniverseKind::AllLinks;
  FlowKind flow = FlowKind::Mutual;
  // Empty when the series is constant or too short for the test.
  std::optional<JbResult> jb;
};

struct RollingSeries {
  std::size_t window_len = 0;
  std::size_t step = 0;
  std::vector<std::size_t> window_starts;
  std::vector<GridResult> windows;
  std::vector<RollingSeriesJb> jb;  // ordered by (k, universe, flow)

  std::vector<double> series(int k, UniverseKind u, FlowKind f) const;
  const RollingSeriesJb& jb_for(int k, UniverseKind u, FlowKind f) const;
};

RollingSeries run_rolling(const PanelSource& source, std::size_t window_len, std::size_t step,
                          const AnalysisConfig& config);

// Synthetic panels used by the CLI and the acceptance suite.
struct SyntheticSpec {
  enum class Model { Factor, WhiteNoise };
  Model model = Model::Factor;
  std::size_t n_assets = 50;
  std::size_t n_obs = 2000;
  double beta_min = 0.5;
  double beta_max = 1.5;
  double lag_min = 0.0;
  double lag_max = 1.0;
  // Integer draws pick a whole lag in [ceil(lag_min), floor(lag_max)].
  bool integer_lags = true;
  double idio_sigma = 0.5;
  std::vector<Regime> regimes;
  std::uint64_t seed = 1;

  friend bool operator==(const SyntheticSpec&, const SyntheticSpec&) = default;
};

// Loadings and lag weights are drawn uniformly from their ranges with
// streams of `seed` that do not overlap the return streams.
FactorPanelSpec factor_spec(const SyntheticSpec& s);
ReturnPanel make_synthetic(const SyntheticSpec& s);

// CSV table emitters (LF, '.' decimal, ratios with 10 significant digits).
void write_grid_csv(std::ostream& out, const GridResult& grid);
void write_dfr_csv(std::ostream& out, const DfrTable& table);
void write_rolling_csv(std::ostream& out, const RollingSeries& rolling);
void write_rolling_jb_csv(std::ostream& out, const RollingSeries& rolling);

}  // namespace infoflow
