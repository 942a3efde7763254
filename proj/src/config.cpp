#include "infoflow/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "infoflow/error.hpp"
#include "infoflow/format.hpp"

namespace infoflow {

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  for (;;) {
    const auto next = s.find(sep, pos);
    out.push_back(trim(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos)));
    if (next == std::string_view::npos) return out;
    pos = next + 1;
  }
}

template <typename Int>
std::optional<Int> parse_int(std::string_view s) {
  s = trim(s);
  Int v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

[[noreturn]] void bad_value(std::string_view what) { throw Error(ErrorKind::BadValue, std::string(what)); }

std::string join_doubles(double v) { return format_double(v, 17); }

}  // namespace

std::vector<int> parse_k_list(std::string_view text) {
  std::vector<int> out;
  for (auto part : split(text, ',')) {
    const auto k = parse_int<int>(part);
    if (!k || *k < 1 || *k > kMaxScale) bad_value("time scale '" + std::string(part) + "' outside 1..5");
    if (std::find(out.begin(), out.end(), *k) != out.end()) bad_value("duplicate time scale " + std::string(part));
    out.push_back(*k);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<UniverseKind> parse_universe_list(std::string_view text) {
  std::vector<UniverseKind> out;
  for (auto part : split(text, ',')) {
    UniverseKind u;
    if (part == "all") u = UniverseKind::AllLinks;
    else if (part == "mst") u = UniverseKind::MstLinks;
    else if (part == "upper") u = UniverseKind::UpperQuantile;
    else if (part == "lower") u = UniverseKind::LowerQuantile;
    else bad_value("unknown universe '" + std::string(part) + "' (all, mst, upper, lower)");
    if (std::find(out.begin(), out.end(), u) != out.end()) bad_value("duplicate universe " + std::string(part));
    out.push_back(u);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Regime> parse_regimes(std::string_view text) {
  std::vector<Regime> out;
  if (trim(text).empty()) return out;
  for (auto part : split(text, ';')) {
    const auto f = split(part, ':');
    if (f.size() != 3) bad_value("regime '" + std::string(part) + "' is not start:end:multiplier");
    const auto start = parse_int<std::size_t>(f[0]);
    const auto end = parse_int<std::size_t>(f[1]);
    const auto mult = parse_double(f[2]);
    if (!start || !end || !mult) bad_value("regime '" + std::string(part) + "' is not start:end:multiplier");
    out.push_back({*start, *end, *mult});
  }
  return out;
}

void RunConfig::validate() const {
  if (input_path && synthetic) {
    throw Error(ErrorKind::ConflictingSource, "both input_path and a synthetic spec are given");
  }
  analysis(1).validate();
  if (window_len < 1) bad_value("window_len must be >= 1");
  if (step < 1) bad_value("step must be >= 1");
  if (synthetic) {
    if (synthetic->n_assets < 2) bad_value("synthetic.n_assets must be >= 2");
    if (synthetic->n_obs < 10) bad_value("synthetic.n_obs must be >= 10");
    if (synthetic->model == SyntheticSpec::Model::Factor) factor_spec(*synthetic).validate();
  }
}

AnalysisConfig RunConfig::analysis(unsigned workers) const {
  AnalysisConfig a;
  a.alpha = alpha;
  a.k_values = k_values;
  a.l_max = l_max;
  a.universes = universes;
  a.quantile = quantile;
  a.workers = workers;
  return a;
}

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  SyntheticSpec synth;
  bool any_synth = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;

  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const std::string where = "line " + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw Error(ErrorKind::BadValue, where + ": expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));

    auto fail = [&](std::string_view why) -> void {
      throw Error(ErrorKind::BadValue, where + ", key '" + key + "': " + std::string(why));
    };
    auto as_double = [&]() {
      const auto v = parse_double(value);
      if (!v) fail("not a number '" + std::string(value) + "'");
      return *v;
    };
    auto as_size = [&]() {
      const auto v = parse_int<std::size_t>(value);
      if (!v) fail("not a non-negative integer '" + std::string(value) + "'");
      return *v;
    };

    try {
      if (key == "input_path") {
        if (value.empty()) fail("empty path");
        cfg.input_path = std::string(value);
      } else if (key == "k_values") {
        cfg.k_values = parse_k_list(value);
      } else if (key == "l_max") {
        const auto v = parse_int<int>(value);
        if (!v || *v < 1 || *v > kMaxScale) fail("must be an integer in 1..5");
        cfg.l_max = *v;
      } else if (key == "alpha") {
        cfg.alpha = as_double();
        if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) fail("must lie in (0, 1)");
      } else if (key == "universes") {
        cfg.universes = parse_universe_list(value);
      } else if (key == "quantile") {
        cfg.quantile = as_double();
        if (!(cfg.quantile > 0.0 && cfg.quantile <= 0.5)) fail("must lie in (0, 0.5]");
      } else if (key == "window_len") {
        cfg.window_len = as_size();
        if (cfg.window_len < 1) fail("must be >= 1");
      } else if (key == "step") {
        cfg.step = as_size();
        if (cfg.step < 1) fail("must be >= 1");
      } else if (key == "seed") {
        const auto v = parse_int<std::uint64_t>(value);
        if (!v) fail("not an unsigned 64-bit integer");
        cfg.seed = *v;
      } else if (key == "output_dir") {
        if (value.empty()) fail("empty path");
        cfg.output_dir = std::string(value);
      } else if (key.rfind("synthetic.", 0) == 0) {
        any_synth = true;
        const std::string sub = key.substr(10);
        if (sub == "model") {
          if (value == "factor") synth.model = SyntheticSpec::Model::Factor;
          else if (value == "white_noise") synth.model = SyntheticSpec::Model::WhiteNoise;
          else fail("expected factor or white_noise");
        } else if (sub == "n_assets") {
          synth.n_assets = as_size();
        } else if (sub == "n_obs") {
          synth.n_obs = as_size();
        } else if (sub == "beta_min") {
          synth.beta_min = as_double();
        } else if (sub == "beta_max") {
          synth.beta_max = as_double();
        } else if (sub == "lag_min") {
          synth.lag_min = as_double();
        } else if (sub == "lag_max") {
          synth.lag_max = as_double();
        } else if (sub == "lag_draw") {
          if (value == "uniform") synth.integer_lags = false;
          else if (value == "integer") synth.integer_lags = true;
          else fail("expected uniform or integer");
        } else if (sub == "idio_sigma") {
          synth.idio_sigma = as_double();
        } else if (sub == "regimes") {
          synth.regimes = parse_regimes(value);
        } else {
          throw Error(ErrorKind::UnknownKey, where + ": '" + key + "'");
        }
      } else {
        throw Error(ErrorKind::UnknownKey, where + ": '" + key + "'");
      }
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::BadValue || std::string_view(e.what()).find(where) != std::string_view::npos) throw;
      throw Error(ErrorKind::BadValue, where + ", key '" + key + "': " + e.what());
    }
  }

  if (any_synth) {
    if (cfg.input_path) throw Error(ErrorKind::ConflictingSource, "both input_path and synthetic.* keys are given");
    synth.seed = cfg.seed;
    cfg.synthetic = synth;
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_config_text(const RunConfig& c) {
  std::ostringstream out;
  if (c.input_path) out << "input_path = " << *c.input_path << '\n';
  out << "k_values = ";
  for (std::size_t i = 0; i < c.k_values.size(); ++i) out << (i ? "," : "") << c.k_values[i];
  out << "\nl_max = " << c.l_max << '\n';
  out << "alpha = " << join_doubles(c.alpha) << '\n';
  out << "universes = ";
  for (std::size_t i = 0; i < c.universes.size(); ++i) out << (i ? "," : "") << to_string(c.universes[i]);
  out << "\nquantile = " << join_doubles(c.quantile) << '\n';
  out << "window_len = " << c.window_len << '\n';
  out << "step = " << c.step << '\n';
  out << "seed = " << c.seed << '\n';
  out << "output_dir = " << c.output_dir << '\n';
  if (c.synthetic) {
    const auto& s = *c.synthetic;
    out << "synthetic.model = " << (s.model == SyntheticSpec::Model::Factor ? "factor" : "white_noise") << '\n';
    out << "synthetic.n_assets = " << s.n_assets << '\n';
    out << "synthetic.n_obs = " << s.n_obs << '\n';
    out << "synthetic.beta_min = " << join_doubles(s.beta_min) << '\n';
    out << "synthetic.beta_max = " << join_doubles(s.beta_max) << '\n';
    out << "synthetic.lag_min = " << join_doubles(s.lag_min) << '\n';
    out << "synthetic.lag_max = " << join_doubles(s.lag_max) << '\n';
    out << "synthetic.lag_draw = " << (s.integer_lags ? "integer" : "uniform") << '\n';
    out << "synthetic.idio_sigma = " << join_doubles(s.idio_sigma) << '\n';
    out << "synthetic.regimes = ";
    for (std::size_t i = 0; i < s.regimes.size(); ++i) {
      out << (i ? ";" : "") << s.regimes[i].start << ':' << s.regimes[i].end << ':'
          << join_doubles(s.regimes[i].loading_multiplier);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace infoflow
