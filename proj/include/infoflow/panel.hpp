#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "infoflow/format.hpp"
#include "infoflow/matrix.hpp"

namespace infoflow {

inline constexpr int kMaxScale = 5;

// Dated T x N panel of strictly positive prices, one column per asset.
class PricePanel {
 public:
  // Validates: T >= 2, N >= 2, dates strictly increasing, unique tickers,
  // every price finite and > 0.
  static PricePanel make(std::vector<Date> dates, std::vector<std::string> tickers, Matrix prices);

  std::size_t n_rows() const noexcept { return prices_.rows(); }
  std::size_t n_assets() const noexcept { return prices_.cols(); }
  const std::vector<Date>& dates() const noexcept { return dates_; }
  const std::vector<std::string>& tickers() const noexcept { return tickers_; }
  const Matrix& prices() const noexcept { return prices_; }

  // Rows [first, first + count).
  PricePanel slice(std::size_t first, std::size_t count) const;

 private:
  PricePanel() = default;
  std::vector<Date> dates_;
  std::vector<std::string> tickers_;
  Matrix prices_;
};

// M x N log returns at time scale k. obs_index[i] is the source row the
// i-th return ends on.
class ReturnPanel {
 public:
  // Validates shape and finiteness, and that no column of two or more rows
  // is constant (ZeroVarianceColumn names the ticker).
  static ReturnPanel make(int k, std::vector<std::string> tickers, std::vector<std::size_t> obs_index,
                          Matrix returns);

  // Same as make() without the variance check. Regression residuals of an
  // exactly-explained column are legitimately all zero.
  static ReturnPanel make_residual(int k, std::vector<std::string> tickers,
                                   std::vector<std::size_t> obs_index, Matrix returns);

  int k() const noexcept { return k_; }
  std::size_t n_obs() const noexcept { return returns_.rows(); }
  std::size_t n_assets() const noexcept { return returns_.cols(); }
  const std::vector<std::string>& tickers() const noexcept { return tickers_; }
  const std::vector<std::size_t>& obs_index() const noexcept { return obs_index_; }
  const Matrix& returns() const noexcept { return returns_; }
  std::span<const double> column(std::size_t j) const { return returns_.col(j); }

  // Rows [first, first + count), same k.
  ReturnPanel slice(std::size_t first, std::size_t count) const;

 private:
  ReturnPanel() = default;
  int k_ = 1;
  std::vector<std::string> tickers_;
  std::vector<std::size_t> obs_index_;
  Matrix returns_;
};

struct Regime {
  std::size_t start = 0;  // inclusive, generation time axis
  std::size_t end = 0;    // exclusive
  double loading_multiplier = 1.0;

  friend bool operator==(const Regime&, const Regime&) = default;
};

// One-factor generator:
//   R_j(t) = m(t) * beta_j * ((1 - w_j) F(t) + w_j F(t-1)) + idio_sigma * eps_j(t)
// w_j = response_lags[j] in [0, 1]. w_j = 0 responds immediately, w_j = 1
// responds one observation late, fractional values split the response.
struct FactorPanelSpec {
  std::size_t n_assets = 0;
  std::size_t n_obs = 0;
  std::vector<double> loadings;
  std::vector<double> response_lags;
  double idio_sigma = 0.0;
  std::vector<Regime> regimes;
  std::uint64_t seed = 0;

  // Throws BadValue describing the first violated constraint.
  void validate() const;
};

PricePanel load_price_panel(std::istream& in);
PricePanel load_price_panel_file(const std::string& path);

ReturnPanel to_returns(const PricePanel& panel, int k);

// Sums non-overlapping blocks of k one-step log returns. For a panel
// produced by to_returns(P, 1) this equals to_returns(P, k).
ReturnPanel aggregate_returns(const ReturnPanel& base, int k);

ReturnPanel shuffle_returns(const ReturnPanel& panel, std::uint64_t seed);

ReturnPanel gen_white_noise(std::size_t n_assets, std::size_t n_obs, std::uint64_t seed);

ReturnPanel gen_factor_panel(const FactorPanelSpec& spec);

// Inverse of to_returns(., 1): P(0) = initial_level, P(i) = P(i-1) exp(scale r_i).
// Dates are consecutive calendar days from `start`.
PricePanel prices_from_returns(const ReturnPanel& panel, double initial_level = 100.0, double scale = 1.0,
                               Date start = Date{std::chrono::year{2000}, std::chrono::January,
                                                 std::chrono::day{1}});

std::vector<std::string> default_tickers(std::size_t n);

void write_price_csv(std::ostream& out, const PricePanel& panel);

// Emits `# k=<k>` followed by the price schema with returns in the cells.
// Row dates come from `dates[obs_index[i]]`; with no dates the rows are
// labelled by consecutive days from 2000-01-01.
void write_return_csv(std::ostream& out, const ReturnPanel& panel, std::span<const Date> dates = {});

}  // namespace infoflow
