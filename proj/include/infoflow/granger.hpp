#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "infoflow/panel.hpp"

namespace infoflow {

enum class FlowClass { None, Mutual, AtoB, BtoA };

std::string_view to_string(FlowClass c);

// Directional Granger tests for one unordered pair (a < b).
//   f_ab / p_ab : "A Granger-causes B" (B regressed on its own lags plus A's)
//   f_ba / p_ba : "B Granger-causes A"
struct PairCausality {
  std::size_t a = 0;
  std::size_t b = 1;
  int k = 1;
  int lag = 1;
  double f_ab = 0.0;
  double p_ab = 1.0;
  double f_ba = 0.0;
  double p_ba = 1.0;
  FlowClass classification = FlowClass::None;
  // Set when a regression was singular; statistics are NaN and the pair
  // counts as None.
  bool degenerate = false;
};

FlowClass classify(double p_ab, double p_ba, double alpha);

// Smallest series length the lag-L test accepts: the unrestricted fit has
// 2L + 1 parameters on M - L rows and needs one residual degree of freedom.
inline constexpr std::size_t min_granger_length(int lag) { return 3 * static_cast<std::size_t>(lag) + 2; }

// Throws TooShort, DimensionMismatch, BadValue (lag outside 1..5) or
// SingularDesign.
PairCausality granger_pair(std::span<const double> ra, std::span<const double> rb, int lag, double alpha);

struct SweepResult {
  std::size_t n_assets = 0;
  int k = 1;
  int lag = 1;
  double alpha = 0.05;
  std::vector<PairCausality> pairs;  // lexicographic by (a, b)
};

using PairEvaluator = std::function<PairCausality(std::size_t a, std::size_t b)>;

// Runs `eval` over every a < b, partitioned across `workers` threads, and
// returns results in lexicographic order. If evaluations throw, the error of
// the lexicographically first failing pair is rethrown.
std::vector<PairCausality> sweep_pairs_with(std::size_t n_assets, const PairEvaluator& eval, unsigned workers = 1);

// All N(N-1)/2 pair tests on a panel. Singular pairs are recorded as
// degenerate None instead of aborting.
SweepResult sweep_pairs(const ReturnPanel& panel, int lag, double alpha, unsigned workers = 1);

// Recomputes every classification for a new alpha from the stored p-values.
void reclassify(SweepResult& sweep, double alpha);

enum class UniverseKind { AllLinks, MstLinks, UpperQuantile, LowerQuantile };

std::string_view to_string(UniverseKind u);

struct Link {
  std::size_t a = 0;
  std::size_t b = 0;
  friend auto operator<=>(const Link&, const Link&) = default;
};

// A link set over which flow is counted. AllLinks carries no explicit list.
struct LinkUniverse {
  UniverseKind kind = UniverseKind::AllLinks;
  std::vector<Link> links;

  static LinkUniverse all() { return {}; }
};

struct FlowRatios {
  UniverseKind universe = UniverseKind::AllLinks;
  std::size_t n_links = 0;
  std::size_t n_mutual = 0;
  std::size_t n_oneway = 0;
  double fr_mutual = 0.0;
  double fr_oneway = 0.0;
  int k = 1;
  int lag = 1;
  double alpha = 0.05;
};

// Throws UnknownLink when the universe names a pair the sweep lacks.
FlowRatios flow_ratios(const SweepResult& sweep, const LinkUniverse& universe);

struct AveragedRatios {
  UniverseKind universe = UniverseKind::AllLinks;
  int k = 1;
  std::size_t n_lags = 0;
  double fr_mutual = 0.0;
  double fr_oneway = 0.0;
};

// Mean of fr_mutual / fr_oneway over lag orders at one k and one universe.
AveragedRatios avg_over_lags(std::span<const FlowRatios> ratios);

// `a,b,k,L,f_ab,p_ab,f_ba,p_ba,class`, 17 significant digits.
void write_sweep_csv(std::ostream& out, std::span<const PairCausality> pairs, bool header = true);

}  // namespace infoflow
