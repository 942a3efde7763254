#include "infoflow/panel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <utility>

#include "infoflow/error.hpp"
#include "infoflow/rng.hpp"

namespace infoflow {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  for (;;) {
    const auto comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
}

// A single observation has no variance to speak of; only flag flat columns.
bool is_constant(std::span<const double> x) {
  return x.size() > 1 && std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); });
}

void check_finite(const Matrix& m, const std::vector<std::string>& tickers) {
  for (std::size_t j = 0; j < m.cols(); ++j) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
      if (!std::isfinite(m(i, j))) {
        throw Error(ErrorKind::BadValue, "non-finite return at row " + std::to_string(i) + ", column '" +
                                             tickers[j] + "'");
      }
    }
  }
}

Date day_offset(Date start, std::size_t days) {
  return Date{std::chrono::sys_days{start} + std::chrono::days{static_cast<long>(days)}};
}

}  // namespace

PricePanel PricePanel::make(std::vector<Date> dates, std::vector<std::string> tickers, Matrix prices) {
  if (prices.rows() < 2) {
    throw Error(ErrorKind::TooFewRows, "price panel needs at least 2 rows, got " + std::to_string(prices.rows()));
  }
  if (prices.cols() < 2) {
    throw Error(ErrorKind::MalformedCsv, "price panel needs at least 2 assets, got " + std::to_string(prices.cols()));
  }
  if (dates.size() != prices.rows() || tickers.size() != prices.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "dates/tickers do not match the price matrix shape");
  }
  std::set<std::string> seen;
  for (std::size_t j = 0; j < tickers.size(); ++j) {
    if (!seen.insert(tickers[j]).second) {
      throw Error(ErrorKind::DuplicateTicker, "ticker '" + tickers[j] + "' at column " + std::to_string(j + 1));
    }
  }
  for (std::size_t i = 1; i < dates.size(); ++i) {
    if (!(dates[i - 1] < dates[i])) {
      throw Error(ErrorKind::NonMonotoneDates, "row " + std::to_string(i + 1) + " date " + format_date(dates[i]) +
                                                   " does not follow " + format_date(dates[i - 1]));
    }
  }
  for (std::size_t j = 0; j < prices.cols(); ++j) {
    for (std::size_t i = 0; i < prices.rows(); ++i) {
      const double p = prices(i, j);
      if (!(std::isfinite(p) && p > 0.0)) {
        throw Error(ErrorKind::NonPositivePrice, "row " + std::to_string(i + 1) + ", column '" + tickers[j] +
                                                     "': " + format_double(p, 17));
      }
    }
  }
  PricePanel panel;
  panel.dates_ = std::move(dates);
  panel.tickers_ = std::move(tickers);
  panel.prices_ = std::move(prices);
  return panel;
}

PricePanel PricePanel::slice(std::size_t first, std::size_t count) const {
  if (first + count > n_rows()) throw Error(ErrorKind::DimensionMismatch, "price slice out of range");
  Matrix m(count, n_assets());
  for (std::size_t j = 0; j < n_assets(); ++j) {
    std::copy_n(prices_.col(j).begin() + static_cast<std::ptrdiff_t>(first), count, m.col(j).begin());
  }
  std::vector<Date> d(dates_.begin() + static_cast<std::ptrdiff_t>(first),
                      dates_.begin() + static_cast<std::ptrdiff_t>(first + count));
  return make(std::move(d), tickers_, std::move(m));
}

ReturnPanel ReturnPanel::make(int k, std::vector<std::string> tickers, std::vector<std::size_t> obs_index,
                              Matrix returns) {
  ReturnPanel p = make_residual(k, std::move(tickers), std::move(obs_index), std::move(returns));
  for (std::size_t j = 0; j < p.n_assets(); ++j) {
    if (is_constant(p.column(j))) {
      throw Error(ErrorKind::ZeroVarianceColumn, "ticker '" + p.tickers_[j] + "' at k=" + std::to_string(k));
    }
  }
  return p;
}

ReturnPanel ReturnPanel::make_residual(int k, std::vector<std::string> tickers, std::vector<std::size_t> obs_index,
                                       Matrix returns) {
  if (tickers.size() != returns.cols() || obs_index.size() != returns.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "tickers/obs_index do not match the return matrix shape");
  }
  check_finite(returns, tickers);
  ReturnPanel p;
  p.k_ = k;
  p.tickers_ = std::move(tickers);
  p.obs_index_ = std::move(obs_index);
  p.returns_ = std::move(returns);
  return p;
}

ReturnPanel ReturnPanel::slice(std::size_t first, std::size_t count) const {
  if (first + count > n_obs()) throw Error(ErrorKind::DimensionMismatch, "return slice out of range");
  Matrix m(count, n_assets());
  for (std::size_t j = 0; j < n_assets(); ++j) {
    std::copy_n(returns_.col(j).begin() + static_cast<std::ptrdiff_t>(first), count, m.col(j).begin());
  }
  std::vector<std::size_t> idx(obs_index_.begin() + static_cast<std::ptrdiff_t>(first),
                               obs_index_.begin() + static_cast<std::ptrdiff_t>(first + count));
  return make_residual(k_, tickers_, std::move(idx), std::move(m));
}

void FactorPanelSpec::validate() const {
  auto bad = [](const std::string& msg) { throw Error(ErrorKind::BadValue, msg); };
  if (n_assets < 2) bad("factor panel needs n_assets >= 2");
  if (loadings.size() != n_assets) bad("loadings must have n_assets entries");
  if (response_lags.size() != n_assets) bad("response_lags must have n_assets entries");
  for (double w : response_lags) {
    if (!(w >= 0.0 && w <= 1.0)) bad("response lag weights must lie in [0, 1]");
  }
  for (double b : loadings) {
    if (!std::isfinite(b)) bad("loadings must be finite");
  }
  if (!(idio_sigma >= 0.0) || !std::isfinite(idio_sigma)) bad("idio_sigma must be >= 0");
  if (n_obs < 3) bad("factor panel needs n_obs >= 3");
  std::vector<Regime> sorted = regimes;
  std::sort(sorted.begin(), sorted.end(), [](const Regime& a, const Regime& b) { return a.start < b.start; });
  for (std::size_t r = 0; r < sorted.size(); ++r) {
    if (sorted[r].start >= sorted[r].end || sorted[r].end > n_obs) bad("regime interval outside [0, n_obs)");
    if (!std::isfinite(sorted[r].loading_multiplier)) bad("regime multiplier must be finite");
    if (r > 0 && sorted[r].start < sorted[r - 1].end) bad("regime intervals overlap");
  }
}

PricePanel load_price_panel(std::istream& in) {
  std::string raw;
  std::vector<std::string> tickers;
  std::vector<Date> dates;
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  bool have_header = false;

  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty() || line.front() == '#') continue;
    const auto fields = split_fields(line);

    if (!have_header) {
      if (trim(fields.front()) != "date") {
        throw Error(ErrorKind::MalformedCsv, "line " + std::to_string(line_no) + ": header must start with 'date'");
      }
      std::set<std::string> seen;
      for (std::size_t c = 1; c < fields.size(); ++c) {
        std::string t(trim(fields[c]));
        if (t.empty()) {
          throw Error(ErrorKind::MalformedCsv, "line " + std::to_string(line_no) + ": empty ticker at column " +
                                                   std::to_string(c + 1));
        }
        if (!seen.insert(t).second) {
          throw Error(ErrorKind::DuplicateTicker, "ticker '" + t + "' at column " + std::to_string(c + 1));
        }
        tickers.push_back(std::move(t));
      }
      have_header = true;
      continue;
    }

    const std::size_t data_row = rows.size() + 1;
    const std::string where = "row " + std::to_string(data_row) + " (line " + std::to_string(line_no) + ")";
    if (fields.size() > tickers.size() + 1) {
      throw Error(ErrorKind::MalformedCsv, where + ": " + std::to_string(fields.size()) + " fields, expected " +
                                               std::to_string(tickers.size() + 1));
    }
    const auto date_field = trim(fields.front());
    if (date_field.empty()) throw Error(ErrorKind::MissingCell, where + ", column 'date'");
    const auto date = parse_date(date_field);
    if (!date) throw Error(ErrorKind::MalformedCsv, where + ": bad date '" + std::string(date_field) + "'");
    if (!dates.empty() && !(dates.back() < *date)) {
      throw Error(ErrorKind::NonMonotoneDates,
                  where + ": date " + format_date(*date) + " does not follow " + format_date(dates.back()));
    }

    std::vector<double> values(tickers.size());
    for (std::size_t c = 0; c < tickers.size(); ++c) {
      const std::string cell_where = where + ", column '" + tickers[c] + "'";
      if (c + 1 >= fields.size() || trim(fields[c + 1]).empty()) throw Error(ErrorKind::MissingCell, cell_where);
      const auto v = parse_double(fields[c + 1]);
      if (!v) {
        throw Error(ErrorKind::MalformedCsv, cell_where + ": not a number '" + std::string(trim(fields[c + 1])) + "'");
      }
      if (!(std::isfinite(*v) && *v > 0.0)) {
        throw Error(ErrorKind::NonPositivePrice, cell_where + ": " + std::string(trim(fields[c + 1])));
      }
      values[c] = *v;
    }
    dates.push_back(*date);
    rows.push_back(std::move(values));
  }

  if (!have_header) throw Error(ErrorKind::MalformedCsv, "empty input: no header line");
  if (rows.size() < 2) {
    throw Error(ErrorKind::TooFewRows, "need at least 2 data rows, got " + std::to_string(rows.size()));
  }
  Matrix prices(rows.size(), tickers.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < tickers.size(); ++j) prices(i, j) = rows[i][j];
  }
  return PricePanel::make(std::move(dates), std::move(tickers), std::move(prices));
}

PricePanel load_price_panel_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  return load_price_panel(in);
}

ReturnPanel to_returns(const PricePanel& panel, int k) {
  if (k < 1 || k > kMaxScale) {
    throw Error(ErrorKind::KTooLarge, "time scale k=" + std::to_string(k) + " outside 1.." + std::to_string(kMaxScale));
  }
  const std::size_t T = panel.n_rows();
  const auto stride = static_cast<std::size_t>(k);
  if (T < stride + 1) {
    throw Error(ErrorKind::TooShort, "k=" + std::to_string(k) + " needs at least " + std::to_string(k + 1) +
                                         " price rows, got " + std::to_string(T));
  }
  const std::size_t M = (T - 1) / stride;
  Matrix r(M, panel.n_assets());
  std::vector<std::size_t> idx(M);
  for (std::size_t i = 0; i < M; ++i) idx[i] = (i + 1) * stride;
  for (std::size_t j = 0; j < panel.n_assets(); ++j) {
    const auto p = panel.prices().col(j);
    for (std::size_t i = 0; i < M; ++i) r(i, j) = std::log(p[idx[i]]) - std::log(p[idx[i] - stride]);
  }
  return ReturnPanel::make(k, panel.tickers(), std::move(idx), std::move(r));
}

ReturnPanel aggregate_returns(const ReturnPanel& base, int k) {
  if (k < 1 || k > kMaxScale) {
    throw Error(ErrorKind::KTooLarge, "time scale k=" + std::to_string(k) + " outside 1.." + std::to_string(kMaxScale));
  }
  if (base.k() != 1) throw Error(ErrorKind::MixedScale, "aggregation needs a k=1 base panel");
  const auto stride = static_cast<std::size_t>(k);
  const std::size_t M = base.n_obs() / stride;
  if (M == 0) {
    throw Error(ErrorKind::TooShort, "k=" + std::to_string(k) + " needs at least " + std::to_string(k) +
                                         " base returns, got " + std::to_string(base.n_obs()));
  }
  Matrix r(M, base.n_assets());
  std::vector<std::size_t> idx(M);
  for (std::size_t i = 0; i < M; ++i) idx[i] = base.obs_index()[(i + 1) * stride - 1];
  for (std::size_t j = 0; j < base.n_assets(); ++j) {
    const auto c = base.column(j);
    for (std::size_t i = 0; i < M; ++i) {
      double s = 0.0;
      for (std::size_t s_i = 0; s_i < stride; ++s_i) s += c[i * stride + s_i];
      r(i, j) = s;
    }
  }
  return ReturnPanel::make(k, base.tickers(), std::move(idx), std::move(r));
}

ReturnPanel shuffle_returns(const ReturnPanel& panel, std::uint64_t seed) {
  Matrix out = panel.returns();
  for (std::size_t j = 0; j < out.cols(); ++j) {
    CounterRng rng(seed, j);
    auto c = out.col(j);
    for (std::size_t i = c.size(); i > 1; --i) {
      const auto swap_with = static_cast<std::size_t>(rng.below(i));
      std::swap(c[i - 1], c[swap_with]);
    }
  }
  return ReturnPanel::make_residual(panel.k(), panel.tickers(), panel.obs_index(), std::move(out));
}

std::vector<std::string> default_tickers(std::size_t n) {
  std::vector<std::string> t(n);
  for (std::size_t j = 0; j < n; ++j) t[j] = "S" + std::to_string(j + 1);
  return t;
}

ReturnPanel gen_white_noise(std::size_t n_assets, std::size_t n_obs, std::uint64_t seed) {
  if (n_assets < 2 || n_obs < 10) throw Error(ErrorKind::BadValue, "white noise needs n_assets >= 2, n_obs >= 10");
  Matrix r(n_obs, n_assets);
  for (std::size_t j = 0; j < n_assets; ++j) {
    CounterRng rng(seed, j);
    for (double& v : r.col(j)) v = rng.gaussian();
  }
  std::vector<std::size_t> idx(n_obs);
  std::iota(idx.begin(), idx.end(), std::size_t{1});
  return ReturnPanel::make(1, default_tickers(n_assets), std::move(idx), std::move(r));
}

ReturnPanel gen_factor_panel(const FactorPanelSpec& spec) {
  spec.validate();
  const std::size_t n = spec.n_obs;
  const bool lagged = std::any_of(spec.response_lags.begin(), spec.response_lags.end(), [](double w) { return w > 0; });
  const std::size_t drop = lagged ? 1 : 0;

  std::vector<double> factor(n);
  {
    CounterRng rng(spec.seed, 0);
    for (double& f : factor) f = rng.gaussian();
  }
  std::vector<double> multiplier(n, 1.0);
  for (const auto& reg : spec.regimes) {
    std::fill(multiplier.begin() + static_cast<std::ptrdiff_t>(reg.start),
              multiplier.begin() + static_cast<std::ptrdiff_t>(reg.end), reg.loading_multiplier);
  }

  Matrix r(n - drop, spec.n_assets);
  for (std::size_t j = 0; j < spec.n_assets; ++j) {
    CounterRng rng(spec.seed, j + 1);
    const double beta = spec.loadings[j];
    const double w = spec.response_lags[j];
    auto col = r.col(j);
    for (std::size_t t = 0; t < n; ++t) {
      const double eps = rng.gaussian();
      if (t < drop) continue;
      const double lagged_f = t > 0 ? factor[t - 1] : 0.0;
      const double common = (1.0 - w) * factor[t] + w * lagged_f;
      col[t - drop] = multiplier[t] * beta * common + spec.idio_sigma * eps;
    }
  }
  std::vector<std::size_t> idx(n - drop);
  std::iota(idx.begin(), idx.end(), std::size_t{1});
  return ReturnPanel::make_residual(1, default_tickers(spec.n_assets), std::move(idx), std::move(r));
}

PricePanel prices_from_returns(const ReturnPanel& panel, double initial_level, double scale, Date start) {
  const std::size_t M = panel.n_obs();
  Matrix p(M + 1, panel.n_assets());
  for (std::size_t j = 0; j < panel.n_assets(); ++j) {
    const auto r = panel.column(j);
    double log_level = std::log(initial_level);
    p(0, j) = initial_level;
    for (std::size_t i = 0; i < M; ++i) {
      log_level += scale * r[i];
      p(i + 1, j) = std::exp(log_level);
    }
  }
  std::vector<Date> dates(M + 1);
  for (std::size_t i = 0; i <= M; ++i) dates[i] = day_offset(start, i);
  return PricePanel::make(std::move(dates), panel.tickers(), std::move(p));
}

void write_price_csv(std::ostream& out, const PricePanel& panel) {
  out << "date";
  for (const auto& t : panel.tickers()) out << ',' << t;
  out << '\n';
  for (std::size_t i = 0; i < panel.n_rows(); ++i) {
    out << format_date(panel.dates()[i]);
    for (std::size_t j = 0; j < panel.n_assets(); ++j) out << ',' << format_double(panel.prices()(i, j), 17);
    out << '\n';
  }
}

void write_return_csv(std::ostream& out, const ReturnPanel& panel, std::span<const Date> dates) {
  const Date base{std::chrono::year{2000}, std::chrono::January, std::chrono::day{1}};
  out << "# k=" << panel.k() << '\n';
  out << "date";
  for (const auto& t : panel.tickers()) out << ',' << t;
  out << '\n';
  for (std::size_t i = 0; i < panel.n_obs(); ++i) {
    const std::size_t src = panel.obs_index()[i];
    out << format_date(src < dates.size() ? dates[src] : day_offset(base, src));
    for (std::size_t j = 0; j < panel.n_assets(); ++j) out << ',' << format_double(panel.returns()(i, j), 17);
    out << '\n';
  }
}

}  // namespace infoflow
