#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "infoflow/experiments.hpp"

namespace infoflow {

struct RunConfig {
  std::optional<std::string> input_path;
  std::optional<SyntheticSpec> synthetic;
  std::vector<int> k_values{1, 2, 3, 4, 5};
  int l_max = 5;
  double alpha = 0.05;
  std::vector<UniverseKind> universes{UniverseKind::AllLinks, UniverseKind::MstLinks};
  double quantile = 0.2;
  // Rolling windows in source rows. The defaults approximate a 48-month
  // window moved by one month on daily data.
  std::size_t window_len = 1008;
  std::size_t step = 21;
  std::uint64_t seed = 1;
  std::string output_dir = ".";

  // Throws BadValue / ConflictingSource.
  void validate() const;
  AnalysisConfig analysis(unsigned workers) const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// `key = value` lines, `#` comments, blank lines ignored. Absent keys keep
// their defaults. Throws UnknownKey, BadValue (with the line number) or
// ConflictingSource.
RunConfig parse_config(std::string_view text);
RunConfig load_config_file(const std::string& path);

// Canonical text form; parse_config(to_config_text(c)) == c.
std::string to_config_text(const RunConfig& config);

std::vector<int> parse_k_list(std::string_view text);
std::vector<UniverseKind> parse_universe_list(std::string_view text);
std::vector<Regime> parse_regimes(std::string_view text);

}  // namespace infoflow
