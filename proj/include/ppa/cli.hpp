#pragma once

// Command-line surface. cli_dispatch writes reports to `out` and failures to
// `err` as {"error": {"code": ..., "exit_status": ..., "message": ...}}.
//
//   analyze <game.json>           PNEs, welfare, efficient set, scenario flags, gaps
//   gaps <game.json>              gap report
//   exist-mc <mc.json>            existence Monte Carlo summary
//   simulate <exp.json>           one seeded run
//   sweep <exp.json>              all seeds, aggregated curves
//   emit-plot <sweep> <out.csv>   curve CSV from a sweep.json (or its directory)

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ppa/existence.hpp"
#include "ppa/game.hpp"
#include "ppa/harness.hpp"
#include "ppa/json_io.hpp"

namespace ppa {

enum ExitStatus : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitUsage = 2,
  kExitFileNotFound = 3,
  kExitMalformedJson = 4,
  kExitInvalidInput = 5,
};

inline constexpr const char* kOutputDirEnv = "PPA_OUTPUT_DIR";

inline json analysis_to_json(const GameConfig& game, std::uint64_t enumeration_cap = kDefaultEnumerationCap) {
  const auto pnes = enumerate_pnes(game, enumeration_cap);
  const auto efficient = select_most_efficient(game, pnes);
  json list = json::array();
  for (const auto& p : pnes) list.push_back({{"profile", profile_to_json(p)}, {"welfare", welfare(game, p)}});
  json j;
  j["num_players"] = game.num_players();
  j["num_resources"] = game.num_resources();
  j["profile_count"] = *profile_count(game.num_players(), game.num_resources());
  j["pne_count"] = pnes.size();
  j["pnes"] = list;
  j["efficient_set"] = profiles_to_json(efficient.profiles);
  j["max_welfare"] = efficient.welfare ? json(*efficient.welfare) : json(nullptr);
  j["scenario"] = scenario_to_json(classify_scenario(game));
  j["gaps"] = gaps_to_json(compute_gaps(game, enumeration_cap));
  return j;
}

inline MonteCarloConfig mc_config_from_json(const json& j) {
  using detail::get_or;
  if (!j.is_object()) throw ConfigError("Monte Carlo config must be a JSON object");
  detail::reject_unknown_keys(j, {"distributions", "trials", "num_players", "num_resources", "max_steps", "seed",
                                  "enumeration_cap", "threads"},
                              "Monte Carlo config");
  MonteCarloConfig c;
  if (j.contains("distributions")) {
    c.distributions.clear();
    for (const auto& d : j.at("distributions")) {
      if (d.is_string()) {
        try {
          c.distributions.push_back(DistributionSpec::from_name(d.get<std::string>()));
        } catch (const std::invalid_argument& e) {
          throw ConfigError(e.what());
        }
        continue;
      }
      detail::reject_unknown_keys(d, {"name", "a", "b"}, "distribution");
      DistributionSpec spec;
      try {
        spec = DistributionSpec::from_name(get_or<std::string>(d, "name", ""));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
      spec.a = get_or(d, "a", spec.a);
      spec.b = get_or(d, "b", spec.b);
      c.distributions.push_back(spec);
    }
  }
  auto range = [&](const char* key, IntRange fallback) {
    if (!j.contains(key)) return fallback;
    auto v = get_or<std::vector<std::size_t>>(j, key, {});
    if (v.size() != 2) throw ConfigError(std::string("\"") + key + "\" must be [lo, hi]");
    return IntRange{v[0], v[1]};
  };
  c.trials = get_or(j, "trials", c.trials);
  c.n_range = range("num_players", c.n_range);
  c.k_range = range("num_resources", c.k_range);
  c.max_steps = get_or(j, "max_steps", c.max_steps);
  c.seed = get_or(j, "seed", c.seed);
  c.enumeration_cap = get_or(j, "enumeration_cap", c.enumeration_cap);
  c.threads = get_or(j, "threads", c.threads);
  return c;
}

inline json distribution_summary_to_json(const DistributionSummary& s) {
  return {{"distribution", s.distribution},
          {"trials", s.trials},
          {"converged", s.converged},
          {"cycles", s.cycles},
          {"cap_hits", s.cap_hits},
          {"cycles_no_pne", s.cycles_no_pne},
          {"cycles_pne_off_path", s.cycles_pne_off_path},
          {"cycles_undecided", s.cycles_undecided},
          {"existence_rate", s.existence_rate()},
          {"flagged_seeds", s.flagged_seeds}};
}

inline json existence_to_json(const ExistenceSummary& s) {
  json rows = json::array();
  for (const auto& r : s.rows) rows.push_back(distribution_summary_to_json(r));
  return {{"rows", rows}, {"total", distribution_summary_to_json(s.total)}};
}

inline std::string existence_to_csv(const ExistenceSummary& s) {
  std::ostringstream out;
  out << "distribution,trials,converged,cycles,cap_hits\n";
  auto row = [&](const DistributionSummary& r) {
    out << r.distribution << ',' << r.trials << ',' << r.converged << ',' << r.cycles << ',' << r.cap_hits
        << '\n';
  };
  for (const auto& r : s.rows) row(r);
  row(s.total);
  return out.str();
}

namespace detail {

struct CliError {
  ExitStatus status;
  std::string code;
  std::string message;
};

inline void report_error(std::ostream& err, const CliError& e) {
  json j = {{"error", {{"code", e.code}, {"exit_status", static_cast<int>(e.status)}, {"message", e.message}}}};
  err << j.dump() << '\n';
}

inline std::filesystem::path output_dir(const std::string& flag, const std::string& configured) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return configured;
}

// A directory argument resolves to the sweep.json inside it.
inline std::filesystem::path sweep_file(const std::filesystem::path& p) {
  if (std::filesystem::is_directory(p)) return p / "sweep.json";
  return p;
}

}  // namespace detail

inline int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Proportional payoff allocation games: equilibrium analysis and bandit simulation", "ppa"};
  app.require_subcommand(1);

  std::string input;
  std::string second;
  std::string out_flag;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> horizon;
  std::optional<unsigned> threads;
  bool trace = false;

  auto* analyze = app.add_subcommand("analyze", "Enumerate PNEs, welfare and scenario flags of a game");
  analyze->add_option("game", input, "Game JSON file")->required();
  analyze->add_option("--out", out_flag, "Also write the report to this file");

  auto* gaps = app.add_subcommand("gaps", "Gap report of a game");
  gaps->add_option("game", input, "Game JSON file")->required();
  gaps->add_option("--out", out_flag, "Also write the report to this file");

  auto* mc = app.add_subcommand("exist-mc", "Existence Monte Carlo over sampled games");
  mc->add_option("config", input, "Monte Carlo config JSON file")->required();
  mc->add_option("--seed", seed, "Base seed (overrides the config)");
  mc->add_option("--threads", threads, "Worker threads");
  mc->add_option("--out", out_flag, "Directory for existence.json and existence.csv");

  auto* sim = app.add_subcommand("simulate", "Run one seeded simulation");
  sim->add_option("config", input, "Experiment config JSON file")->required();
  sim->add_option("--seed", seed, "Run seed (default: base_seed)");
  sim->add_option("--horizon", horizon, "Number of rounds (overrides the config)");
  sim->add_option("--out", out_flag, "Output directory");
  sim->add_flag("--trace", trace, "Write a per-round trace.csv");

  auto* sweep = app.add_subcommand("sweep", "Run all seeds and aggregate curves");
  sweep->add_option("config", input, "Experiment config JSON file")->required();
  sweep->add_option("--seed", seed, "Base seed (overrides the config)");
  sweep->add_option("--horizon", horizon, "Number of rounds (overrides the config)");
  sweep->add_option("--threads", threads, "Worker threads");
  sweep->add_option("--out", out_flag, "Output directory");

  auto* plot = app.add_subcommand("emit-plot", "Write checkpoint curves of a sweep as CSV");
  plot->add_option("sweep", input, "sweep.json or the directory holding it")->required();
  plot->add_option("csv", second, "Output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    detail::report_error(err, {kExitUsage, "usage", e.what()});
    return kExitUsage;
  }

  auto emit = [&](const json& report) {
    const std::string text = report.dump(2) + "\n";
    out << text;
    if (!out_flag.empty()) write_text_file(out_flag, text);
  };

  try {
    if (analyze->parsed()) {
      emit(analysis_to_json(load_game(input)));
    } else if (gaps->parsed()) {
      emit(gaps_to_json(compute_gaps(load_game(input))));
    } else if (mc->parsed()) {
      MonteCarloConfig cfg = mc_config_from_json(read_json_file(input));
      if (seed) cfg.seed = *seed;
      if (threads) cfg.threads = *threads;
      const auto summary = run_mc(cfg);
      const json report = existence_to_json(summary);
      out << report.dump(2) << '\n';
      if (!out_flag.empty() || std::getenv(kOutputDirEnv)) {
        const auto dir = detail::output_dir(out_flag, ".");
        write_text_file(dir / "existence.json", report.dump(2) + "\n");
        write_text_file(dir / "existence.csv", existence_to_csv(summary));
      }
    } else if (sim->parsed() || sweep->parsed()) {
      ExperimentConfig cfg = experiment_from_json(read_json_file(input));
      if (horizon) {
        if (*horizon < 1) throw ConfigError("horizon must be at least 1");
        cfg.horizon = *horizon;
      }
      if (seed) cfg.base_seed = *seed;
      if (threads) cfg.threads = *threads;
      const Experiment e = resolve_experiment(cfg);
      const auto dir = detail::output_dir(out_flag, cfg.output_dir);

      if (sim->parsed()) {
        std::optional<std::ofstream> trace_file;
        std::optional<TraceWriter> writer;
        if (trace || cfg.trace) {
          std::filesystem::create_directories(dir);
          trace_file.emplace(dir / "trace.csv", std::ios::binary);
          if (!*trace_file) throw std::runtime_error("cannot write '" + (dir / "trace.csv").string() + "'");
          writer.emplace(*trace_file, e.game.num_players(), e.game.num_resources());
        }
        const auto run = run_simulation(e, cfg.base_seed, writer ? &*writer : nullptr);
        const json report = {{"experiment", experiment_to_json(e)}, {"run", run_to_json(run)}};
        write_text_file(dir / "run.json", report.dump(2) + "\n");
        write_text_file(dir / "run_curve.csv", run_curve_to_csv(run));
        out << run_to_json(run).dump(2) << '\n';
      } else {
        const auto result = run_sweep(e, cfg.threads);
        write_text_file(dir / "sweep.json", sweep_to_json(e, result).dump(2) + "\n");
        write_text_file(dir / "curve.csv", curve_to_csv(result.curve));
        json summary = {{"output_dir", dir.string()},
                        {"num_seeds", e.num_seeds},
                        {"horizon", e.horizon},
                        {"final_mean_regret", result.curve.regret_mean.back()},
                        {"final_mean_noneq", result.curve.noneq_mean.back()}};
        out << summary.dump(2) << '\n';
      }
    } else if (plot->parsed()) {
      const json j = read_json_file(detail::sweep_file(input));
      if (!j.is_object() || !j.contains("curve")) throw ConfigError("not a sweep output: missing \"curve\"");
      write_text_file(second, curve_to_csv(curve_from_json(j.at("curve"))));
    }
  } catch (const FileNotFoundError& e) {
    detail::report_error(err, {kExitFileNotFound, "file_not_found", e.what()});
    return kExitFileNotFound;
  } catch (const json::parse_error& e) {
    detail::report_error(err, {kExitMalformedJson, "malformed_json", e.what()});
    return kExitMalformedJson;
  } catch (const NoEquilibriumError& e) {
    detail::report_error(err, {kExitInvalidInput, "no_equilibrium", e.what()});
    return kExitInvalidInput;
  } catch (const EnumerationLimitError& e) {
    detail::report_error(err, {kExitInvalidInput, "too_large", e.what()});
    return kExitInvalidInput;
  } catch (const ConfigError& e) {
    detail::report_error(err, {kExitInvalidInput, "invalid_config", e.what()});
    return kExitInvalidInput;
  } catch (const std::invalid_argument& e) {
    detail::report_error(err, {kExitInvalidInput, "invalid_config", e.what()});
    return kExitInvalidInput;
  } catch (const json::exception& e) {
    detail::report_error(err, {kExitInvalidInput, "invalid_config", e.what()});
    return kExitInvalidInput;
  } catch (const std::exception& e) {
    detail::report_error(err, {kExitFailure, "failure", e.what()});
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace ppa
