#include "infoflow/granger.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>

#include "infoflow/error.hpp"
#include "infoflow/format.hpp"
#include "infoflow/numstats.hpp"
#include "infoflow/simd/kernels.hpp"

namespace infoflow {

namespace {

// Cross-product matrix of the lag design shared by all four regressions of a
// pair. Variable order: constant, own lags 1..L, other lags 1..L, own
// current value, other current value. "Own" is series A.
class LagGram {
 public:
  LagGram(std::span<const double> a, std::span<const double> b, int lag)
      : lag_(static_cast<std::size_t>(lag)), rows_(a.size() - lag_), dim_(2 * lag_ + 3), g_(dim_ * dim_) {
    vars_.reserve(dim_ - 1);
    for (std::size_t tau = 1; tau <= lag_; ++tau) vars_.push_back(a.subspan(lag_ - tau, rows_));
    for (std::size_t tau = 1; tau <= lag_; ++tau) vars_.push_back(b.subspan(lag_ - tau, rows_));
    vars_.push_back(a.subspan(lag_, rows_));
    vars_.push_back(b.subspan(lag_, rows_));

    at(0, 0) = static_cast<double>(rows_);
    for (std::size_t i = 1; i < dim_; ++i) {
      const auto xi = var(i);
      at(i, 0) = at(0, i) = simd::sum(xi);
      for (std::size_t j = 1; j <= i; ++j) at(i, j) = at(j, i) = simd::dot(xi, var(j));
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t a_lag(std::size_t tau) const { return tau; }
  std::size_t b_lag(std::size_t tau) const { return lag_ + tau; }
  std::size_t a_now() const { return 2 * lag_ + 1; }
  std::size_t b_now() const { return 2 * lag_ + 2; }

  // Variable 0 is the constant and has no span.
  std::span<const double> var(std::size_t i) const { return vars_[i - 1]; }

  // Residual sum of squares of `target` on the listed regressors (index 0,
  // the constant, must come first).
  double rss(std::span<const std::size_t> regressors, std::size_t target, std::vector<double>& scratch) const {
    const std::size_t p = regressors.size();
    std::vector<double> sub(p * p);
    std::vector<double> rhs(p);
    for (std::size_t i = 0; i < p; ++i) {
      rhs[i] = at(regressors[i], target);
      for (std::size_t j = 0; j < p; ++j) sub[i * p + j] = at(regressors[i], regressors[j]);
    }
    const auto coef = solve_spd(sub, rhs, p);
    const auto y = var(target);
    scratch.assign(y.begin(), y.end());
    for (double& r : scratch) r -= coef[0];
    for (std::size_t i = 1; i < p; ++i) simd::axpy(-coef[i], var(regressors[i]), scratch);
    return simd::dot(scratch, scratch);
  }

 private:
  double& at(std::size_t i, std::size_t j) { return g_[i * dim_ + j]; }
  double at(std::size_t i, std::size_t j) const { return g_[i * dim_ + j]; }

  std::size_t lag_;
  std::size_t rows_;
  std::size_t dim_;
  std::vector<double> g_;
  std::vector<std::span<const double>> vars_;
};

struct Direction {
  double f = 0.0;
  double p = 1.0;
};

// Tests whether the other series' lags help predict `target` beyond the
// target's own lags.
Direction test_direction(const LagGram& gram, int lag, bool target_is_a, std::vector<double>& scratch) {
  const auto L = static_cast<std::size_t>(lag);
  std::vector<std::size_t> regs{0};
  for (std::size_t tau = 1; tau <= L; ++tau) regs.push_back(target_is_a ? gram.a_lag(tau) : gram.b_lag(tau));
  const std::size_t target = target_is_a ? gram.a_now() : gram.b_now();
  const double rss_restricted = gram.rss(regs, target, scratch);
  for (std::size_t tau = 1; tau <= L; ++tau) regs.push_back(target_is_a ? gram.b_lag(tau) : gram.a_lag(tau));
  const double rss_unrestricted = gram.rss(regs, target, scratch);

  const double df_num = static_cast<double>(L);
  const double df_den = static_cast<double>(gram.rows() - (2 * L + 1));
  const double gain = std::max(0.0, rss_restricted - rss_unrestricted);
  Direction d;
  if (rss_unrestricted > 0.0) {
    d.f = (gain / df_num) / (rss_unrestricted / df_den);
  } else {
    d.f = gain > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  d.p = f_sf(d.f, df_num, df_den);
  return d;
}

std::string pair_label(std::size_t a, std::size_t b) {
  return "pair (" + std::to_string(a) + "," + std::to_string(b) + ")";
}

}  // namespace

std::string_view to_string(FlowClass c) {
  switch (c) {
    case FlowClass::None: return "none";
    case FlowClass::Mutual: return "mutual";
    case FlowClass::AtoB: return "a_to_b";
    case FlowClass::BtoA: return "b_to_a";
  }
  return "none";
}

std::string_view to_string(UniverseKind u) {
  switch (u) {
    case UniverseKind::AllLinks: return "all";
    case UniverseKind::MstLinks: return "mst";
    case UniverseKind::UpperQuantile: return "upper";
    case UniverseKind::LowerQuantile: return "lower";
  }
  return "all";
}

FlowClass classify(double p_ab, double p_ba, double alpha) {
  const bool ab = p_ab < alpha;
  const bool ba = p_ba < alpha;
  if (ab && ba) return FlowClass::Mutual;
  if (ab) return FlowClass::AtoB;
  if (ba) return FlowClass::BtoA;
  return FlowClass::None;
}

PairCausality granger_pair(std::span<const double> ra, std::span<const double> rb, int lag, double alpha) {
  if (lag < 1 || lag > kMaxScale) throw Error(ErrorKind::BadValue, "lag order L=" + std::to_string(lag) + " outside 1..5");
  if (ra.size() != rb.size()) {
    throw Error(ErrorKind::DimensionMismatch, "series lengths differ (" + std::to_string(ra.size()) + " vs " +
                                                  std::to_string(rb.size()) + ")");
  }
  if (ra.size() < min_granger_length(lag)) {
    throw Error(ErrorKind::TooShort, "L=" + std::to_string(lag) + " needs at least " +
                                         std::to_string(min_granger_length(lag)) + " observations, got " +
                                         std::to_string(ra.size()));
  }
  const LagGram gram(ra, rb, lag);
  std::vector<double> scratch;
  const Direction ba = test_direction(gram, lag, /*target_is_a=*/true, scratch);
  const Direction ab = test_direction(gram, lag, /*target_is_a=*/false, scratch);

  PairCausality out;
  out.lag = lag;
  out.f_ab = ab.f;
  out.p_ab = ab.p;
  out.f_ba = ba.f;
  out.p_ba = ba.p;
  out.classification = classify(out.p_ab, out.p_ba, alpha);
  return out;
}

std::vector<PairCausality> sweep_pairs_with(std::size_t n_assets, const PairEvaluator& eval, unsigned workers) {
  if (n_assets < 2) throw Error(ErrorKind::BadValue, "sweep needs at least 2 assets");
  std::vector<Link> links;
  links.reserve(n_assets * (n_assets - 1) / 2);
  for (std::size_t a = 0; a < n_assets; ++a) {
    for (std::size_t b = a + 1; b < n_assets; ++b) links.push_back({a, b});
  }
  std::vector<PairCausality> out(links.size());

  constexpr std::size_t kChunk = 64;
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::size_t err_index = links.size();
  std::exception_ptr err;

  auto work = [&] {
    for (;;) {
      const std::size_t begin = next.fetch_add(kChunk);
      if (begin >= links.size()) return;
      const std::size_t end = std::min(begin + kChunk, links.size());
      for (std::size_t i = begin; i < end; ++i) {
        try {
          out[i] = eval(links[i].a, links[i].b);
        } catch (...) {
          std::lock_guard lock(err_mutex);
          if (i < err_index) {
            err_index = i;
            err = std::current_exception();
          }
          break;
        }
      }
    }
  };

  const unsigned n_threads = std::max(1u, workers);
  if (n_threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (err) std::rethrow_exception(err);
  return out;
}

SweepResult sweep_pairs(const ReturnPanel& panel, int lag, double alpha, unsigned workers) {
  SweepResult res;
  res.n_assets = panel.n_assets();
  res.k = panel.k();
  res.lag = lag;
  res.alpha = alpha;
  res.pairs = sweep_pairs_with(
      panel.n_assets(),
      [&](std::size_t a, std::size_t b) {
        PairCausality pc;
        try {
          pc = granger_pair(panel.column(a), panel.column(b), lag, alpha);
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::SingularDesign) {
            throw e.with_context(pair_label(a, b) + " at k=" + std::to_string(panel.k()) + ", L=" + std::to_string(lag));
          }
          const double nan = std::numeric_limits<double>::quiet_NaN();
          pc.f_ab = pc.p_ab = pc.f_ba = pc.p_ba = nan;
          pc.classification = FlowClass::None;
          pc.degenerate = true;
        }
        pc.a = a;
        pc.b = b;
        pc.k = panel.k();
        pc.lag = lag;
        return pc;
      },
      workers);
  return res;
}

void reclassify(SweepResult& sweep, double alpha) {
  sweep.alpha = alpha;
  for (auto& pc : sweep.pairs) {
    pc.classification = pc.degenerate ? FlowClass::None : classify(pc.p_ab, pc.p_ba, alpha);
  }
}

FlowRatios flow_ratios(const SweepResult& sweep, const LinkUniverse& universe) {
  FlowRatios fr;
  fr.universe = universe.kind;
  fr.k = sweep.k;
  fr.lag = sweep.lag;
  fr.alpha = sweep.alpha;

  auto count = [&](const PairCausality& pc) {
    if (pc.classification == FlowClass::Mutual) ++fr.n_mutual;
    else if (pc.classification != FlowClass::None) ++fr.n_oneway;
  };

  if (universe.kind == UniverseKind::AllLinks) {
    fr.n_links = sweep.n_assets * (sweep.n_assets - 1) / 2;
    if (sweep.pairs.size() != fr.n_links) {
      throw Error(ErrorKind::UnknownLink, "AllLinks needs all " + std::to_string(fr.n_links) + " pairs, sweep has " +
                                              std::to_string(sweep.pairs.size()));
    }
    for (const auto& pc : sweep.pairs) count(pc);
  } else {
    fr.n_links = universe.links.size();
    for (const auto& link : universe.links) {
      const Link key{std::min(link.a, link.b), std::max(link.a, link.b)};
      const auto it = std::lower_bound(sweep.pairs.begin(), sweep.pairs.end(), key,
                                       [](const PairCausality& pc, const Link& l) { return Link{pc.a, pc.b} < l; });
      if (it == sweep.pairs.end() || it->a != key.a || it->b != key.b) {
        throw Error(ErrorKind::UnknownLink, pair_label(key.a, key.b) + " not in sweep results");
      }
      count(*it);
    }
  }
  if (fr.n_links > 0) {
    fr.fr_mutual = static_cast<double>(fr.n_mutual) / static_cast<double>(fr.n_links);
    fr.fr_oneway = static_cast<double>(fr.n_oneway) / static_cast<double>(fr.n_links);
  }
  return fr;
}

AveragedRatios avg_over_lags(std::span<const FlowRatios> ratios) {
  if (ratios.empty()) throw Error(ErrorKind::BadValue, "no ratios to average");
  AveragedRatios avg;
  avg.universe = ratios.front().universe;
  avg.k = ratios.front().k;
  avg.n_lags = ratios.size();
  for (const auto& r : ratios) {
    if (r.universe != avg.universe) throw Error(ErrorKind::MixedUniverse, "ratios span several link universes");
    if (r.k != avg.k) throw Error(ErrorKind::MixedScale, "ratios span several time scales");
    avg.fr_mutual += r.fr_mutual;
    avg.fr_oneway += r.fr_oneway;
  }
  avg.fr_mutual /= static_cast<double>(ratios.size());
  avg.fr_oneway /= static_cast<double>(ratios.size());
  return avg;
}

void write_sweep_csv(std::ostream& out, std::span<const PairCausality> pairs, bool header) {
  if (header) out << "a,b,k,L,f_ab,p_ab,f_ba,p_ba,class\n";
  for (const auto& pc : pairs) {
    out << pc.a << ',' << pc.b << ',' << pc.k << ',' << pc.lag << ',' << format_double(pc.f_ab, 17) << ','
        << format_double(pc.p_ab, 17) << ',' << format_double(pc.f_ba, 17) << ',' << format_double(pc.p_ba, 17)
        << ',' << to_string(pc.classification) << '\n';
  }
}

}  // namespace infoflow
