#include "infoflow/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <vector>

#include "infoflow/config.hpp"
#include "infoflow/error.hpp"
#include "infoflow/experiments.hpp"
#include "infoflow/netstruct.hpp"
#include "infoflow/simd/kernels.hpp"

#ifndef INFOFLOW_VERSION
#define INFOFLOW_VERSION "0.0.0"
#endif

namespace infoflow {

namespace {

namespace fs = std::filesystem;

// Name -> content, written only after every table has been computed.
using Outputs = std::vector<std::pair<std::string, std::string>>;

struct CliOptions {
  std::string command;
  std::optional<std::string> config_path;
  std::optional<std::string> input;
  std::optional<std::string> out_dir;
  std::optional<double> alpha;
  std::optional<std::string> k_list;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> window;
  std::optional<std::size_t> step;
  unsigned workers = 1;
  bool emit_pairs = false;
  bool emit_structure = false;
};

RunConfig resolve_config(const CliOptions& o) {
  RunConfig cfg = o.config_path ? load_config_file(*o.config_path) : RunConfig{};
  if (o.input) {
    if (cfg.synthetic) throw Error(ErrorKind::ConflictingSource, "--input given but the config holds a synthetic spec");
    cfg.input_path = *o.input;
  }
  if (o.out_dir) cfg.output_dir = *o.out_dir;
  if (o.alpha) cfg.alpha = *o.alpha;
  if (o.k_list) cfg.k_values = parse_k_list(*o.k_list);
  if (o.seed) cfg.seed = *o.seed;
  if (o.window) cfg.window_len = *o.window;
  if (o.step) cfg.step = *o.step;
  if (cfg.synthetic) cfg.synthetic->seed = cfg.seed;
  cfg.validate();
  return cfg;
}

PanelSource load_source(const RunConfig& cfg) {
  if (cfg.input_path) return PanelSource::from_prices(load_price_panel_file(*cfg.input_path));
  if (cfg.synthetic) return PanelSource::from_returns(make_synthetic(*cfg.synthetic));
  throw Error(ErrorKind::BadValue, "no data source: pass --input or put synthetic.* keys in the config");
}

template <typename Fn>
std::string render(Fn&& fn) {
  std::ostringstream ss;
  fn(ss);
  return ss.str();
}

Outputs run_command(const CliOptions& o, const RunConfig& cfg) {
  Outputs files;
  const auto analysis = cfg.analysis(o.workers);

  if (o.command == "synth") {
    SyntheticSpec spec = cfg.synthetic.value_or(SyntheticSpec{});
    spec.seed = cfg.seed;
    const auto returns = make_synthetic(spec);
    // Daily-size returns keep exp(cumulative sum) well inside double range.
    const auto prices = prices_from_returns(returns, 100.0, 0.01);
    files.emplace_back("prices.csv", render([&](std::ostream& s) { write_price_csv(s, prices); }));
    files.emplace_back("returns.csv", render([&](std::ostream& s) { write_return_csv(s, returns, prices.dates()); }));
    return files;
  }

  const PanelSource source = load_source(cfg);
  if (o.command == "grid") {
    const auto grid = run_grid(source, analysis);
    files.emplace_back("grid.csv", render([&](std::ostream& s) { write_grid_csv(s, grid); }));
    if (o.emit_pairs) {
      files.emplace_back("pairs.csv", render([&](std::ostream& s) {
                           bool header = true;
                           for (int k : cfg.k_values) {
                             const auto panel = source.returns(k);
                             for (int lag = 1; lag <= cfg.l_max; ++lag) {
                               const auto sweep = sweep_pairs(panel, lag, cfg.alpha, o.workers);
                               write_sweep_csv(s, sweep.pairs, header);
                               header = false;
                             }
                           }
                         }));
    }
    if (o.emit_structure) {
      for (int k : cfg.k_values) {
        const auto corr = correlation_matrix(source.returns(k));
        const auto mst = mst_kruskal(distance_matrix(corr));
        files.emplace_back("corr_k" + std::to_string(k) + ".csv",
                           render([&](std::ostream& s) { write_correlation_csv(s, corr, source.tickers()); }));
        files.emplace_back("mst_k" + std::to_string(k) + ".csv", render([&](std::ostream& s) { write_mst_csv(s, mst); }));
      }
    }
  } else if (o.command == "defactor") {
    const auto table = run_defactor(source, analysis);
    files.emplace_back("dfr.csv", render([&](std::ostream& s) { write_dfr_csv(s, table); }));
  } else if (o.command == "rolling") {
    const auto rolling = run_rolling(source, cfg.window_len, cfg.step, analysis);
    files.emplace_back("rolling.csv", render([&](std::ostream& s) { write_rolling_csv(s, rolling); }));
    files.emplace_back("rolling_jb.csv", render([&](std::ostream& s) { write_rolling_jb_csv(s, rolling); }));
  }
  return files;
}

std::string manifest_json(const CliOptions& o, const RunConfig& cfg, const Outputs& files) {
  nlohmann::ordered_json j;
  j["tool"] = "infoflow";
  j["version"] = INFOFLOW_VERSION;
  j["command"] = o.command;
  j["config"] = to_config_text(cfg);
  j["seed"] = cfg.seed;
  j["input_path"] = cfg.input_path ? nlohmann::ordered_json(*cfg.input_path) : nlohmann::ordered_json(nullptr);
  j["input_digest_fnv1a64"] =
      cfg.input_path ? nlohmann::ordered_json(file_digest(*cfg.input_path)) : nlohmann::ordered_json(nullptr);
  j["simd_backend"] = std::string(simd::to_string(simd::active().backend));
  auto& outs = j["outputs"] = nlohmann::ordered_json::array();
  for (const auto& f : files) outs.push_back(f.first);
  return j.dump(2) + "\n";
}

void write_all(const fs::path& dir, const Outputs& files) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create output directory '" + dir.string() + "': " + ec.message());

  std::vector<fs::path> staged;
  auto cleanup = [&] {
    for (const auto& p : staged) fs::remove(p, ec);
  };
  for (const auto& [name, content] : files) {
    const fs::path tmp = dir / (name + ".tmp");
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    f << content;
    f.close();
    staged.push_back(tmp);
    if (!f) {
      cleanup();
      throw Error(ErrorKind::Io, "cannot write '" + tmp.string() + "'");
    }
  }
  for (std::size_t i = 0; i < files.size(); ++i) {
    fs::rename(staged[i], dir / files[i].first, ec);
    if (ec) {
      cleanup();
      throw Error(ErrorKind::Io, "cannot move '" + staged[i].string() + "' into place: " + ec.message());
    }
  }
}

}  // namespace

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 14];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Granger information flow among asset returns over correlation networks", "infoflow"};
  app.require_subcommand(1);
  app.fallthrough();

  CliOptions o;
  std::string config_path, input, out_dir, k_list;
  double alpha = 0.0;
  std::uint64_t seed = 0;
  std::size_t window = 0, step = 0;
  auto* opt_config = app.add_option("--config", config_path, "key = value configuration file");
  auto* opt_input = app.add_option("--input", input, "price panel CSV (date,<ticker>...)");
  auto* opt_out = app.add_option("--out", out_dir, "output directory");
  auto* opt_alpha = app.add_option("--alpha", alpha, "significance level");
  auto* opt_k = app.add_option("--k", k_list, "comma-separated time scales, e.g. 1,5");
  auto* opt_seed = app.add_option("--seed", seed, "RNG seed for synthetic data");
  auto* opt_window = app.add_option("--window", window, "rolling window length in rows");
  auto* opt_step = app.add_option("--step", step, "rolling window step in rows");
  app.add_option("--workers", o.workers, "worker threads (results do not depend on it)")->check(CLI::PositiveNumber);

  auto* grid = app.add_subcommand("grid", "FR ratios over the (k, L) grid -> grid.csv");
  grid->add_flag("--pairs", o.emit_pairs, "also write every pair test to pairs.csv");
  grid->add_flag("--structure", o.emit_structure, "also write corr_k<k>.csv and mst_k<k>.csv");
  app.add_subcommand("defactor", "FR vs market-mode-removed MFR -> dfr.csv");
  app.add_subcommand("rolling", "rolling-window FR series and Jarque-Bera -> rolling.csv, rolling_jb.csv");
  app.add_subcommand("synth", "generate a synthetic panel -> prices.csv, returns.csv");

  std::vector<std::string> argv;
  argv.reserve(args.size());
  for (auto it = args.rbegin(); it != args.rend(); ++it) argv.push_back(*it);
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }

  o.command = app.get_subcommands().front()->get_name();
  if (*opt_config) o.config_path = config_path;
  if (*opt_input) o.input = input;
  if (*opt_out) o.out_dir = out_dir;
  if (*opt_alpha) o.alpha = alpha;
  if (*opt_k) o.k_list = k_list;
  if (*opt_seed) o.seed = seed;
  if (*opt_window) o.window = window;
  if (*opt_step) o.step = step;

  try {
    const RunConfig cfg = resolve_config(o);
    Outputs files = run_command(o, cfg);
    files.emplace_back("manifest.json", manifest_json(o, cfg, files));
    write_all(cfg.output_dir, files);
    for (const auto& f : files) out << (fs::path(cfg.output_dir) / f.first).string() << '\n';
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return is_numerical(e.kind()) ? kExitNumerical : kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
}

}  // namespace infoflow
