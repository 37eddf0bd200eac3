#pragma once

// Experiment driver: resolves a config into a concrete game and roster, runs
// seeded simulations, aggregates metric curves across seeds and encodes the
// results as JSON and CSV.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <boost/random/uniform_real_distribution.hpp>

#include "ppa/agents.hpp"
#include "ppa/bandit_env.hpp"
#include "ppa/game.hpp"
#include "ppa/json_io.hpp"
#include "ppa/random.hpp"

namespace ppa {

// The simulated game has no PNE, so the non-efficient round count is undefined.
class NoEquilibriumError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class AgentKind { kLearner, kTotalReward, kRandom };

inline const char* to_string(AgentKind k) noexcept {
  switch (k) {
    case AgentKind::kLearner: return "learner";
    case AgentKind::kTotalReward: return "total_reward";
    case AgentKind::kRandom: return "random";
  }
  return "?";
}

// How the learner's exploration length is derived.
//   experimental: pulls = ceil(c1 * K^2 * ln T / delta^2), c1 from the tuning grid
//   theory:       same formula, c1 must be at least 8
//   pulls:        c1 is the pull count itself
enum class ExploreMode { kExperimental, kTheory, kPulls };

struct AgentSpec {
  AgentKind kind = AgentKind::kLearner;
  ExploreMode explore_mode = ExploreMode::kExperimental;
  double c1 = 0.01;
  double c2 = 1000.0;
  double c3 = 200.0;
  double eta = 1.0;
  double epsilon = 0.003;
  std::optional<double> gamma_range;  // nullopt: delta / (4N)
  double alpha = 100.0;               // total_reward

  bool operator==(const AgentSpec&) const = default;
};

struct GameSampling {
  std::size_t num_players = 3;
  std::size_t num_resources = 5;
  std::uint64_t seed = 0;
  bool homogeneous = false;     // one weight per resource shared by all players
  double beta_param_max = 10.0; // alpha_k, beta_k ~ Uniform(0, beta_param_max)
  double min_delta = 0.0;       // resample until the identification margin reaches this
  std::uint64_t max_attempts = 10000;
};

struct CheckpointSpec {
  bool geometric = true;
  std::uint64_t dense_until = 1000;  // geometric: every round up to here
  double growth = 1.1;               // geometric: then multiply by this
  std::uint64_t stride = 1000;       // linear
};

struct ExperimentConfig {
  std::optional<GameConfig> game;
  std::optional<RewardModel> rewards;
  std::optional<GameSampling> sampling;
  std::vector<AgentSpec> roster;  // one spec (shared) or one per player
  std::uint64_t horizon = 100000;
  std::uint64_t num_seeds = 1;
  std::uint64_t base_seed = 0;
  CheckpointSpec checkpoints;
  unsigned threads = 1;
  std::string output_dir = "ppa_out";
  bool trace = false;
};

namespace detail {

inline void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                                const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("unknown key \"" + key + "\" in " + where);
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for \"") + key + "\": " + e.what());
  }
}

inline AgentSpec agent_spec_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("agent spec must be an object");
  reject_unknown_keys(j, {"kind", "c1", "c1_mode", "c2", "c3", "eta", "epsilon", "gamma_range", "alpha"},
                      "agent spec");
  AgentSpec s;
  const auto kind = get_or<std::string>(j, "kind", "learner");
  if (kind == "learner")
    s.kind = AgentKind::kLearner;
  else if (kind == "total_reward")
    s.kind = AgentKind::kTotalReward;
  else if (kind == "random")
    s.kind = AgentKind::kRandom;
  else
    throw ConfigError("unknown agent kind \"" + kind + "\"");

  const auto mode = get_or<std::string>(j, "c1_mode", "experimental");
  if (mode == "experimental")
    s.explore_mode = ExploreMode::kExperimental;
  else if (mode == "theory")
    s.explore_mode = ExploreMode::kTheory;
  else if (mode == "pulls")
    s.explore_mode = ExploreMode::kPulls;
  else
    throw ConfigError("unknown c1_mode \"" + mode + "\"");
  s.c1 = get_or(j, "c1", s.explore_mode == ExploreMode::kTheory ? 8.0 : 0.01);
  s.c2 = get_or(j, "c2", s.c2);
  s.c3 = get_or(j, "c3", s.c3);
  s.eta = get_or(j, "eta", s.eta);
  s.epsilon = get_or(j, "epsilon", s.epsilon);
  s.alpha = get_or(j, "alpha", s.alpha);
  if (j.contains("gamma_range")) {
    const auto& g = j.at("gamma_range");
    if (g.is_string() && g.get<std::string>() == "auto")
      s.gamma_range.reset();
    else if (g.is_number())
      s.gamma_range = g.get<double>();
    else
      throw ConfigError("gamma_range must be a number or \"auto\"");
  }
  if (s.explore_mode == ExploreMode::kTheory && s.c1 < 8.0)
    throw ConfigError("theory exploration needs c1 >= 8");
  return s;
}

inline json agent_spec_to_json(const AgentSpec& s) {
  json j;
  j["kind"] = to_string(s.kind);
  if (s.kind == AgentKind::kLearner) {
    j["c1_mode"] = s.explore_mode == ExploreMode::kExperimental ? "experimental"
                   : s.explore_mode == ExploreMode::kTheory     ? "theory"
                                                                : "pulls";
    j["c1"] = s.c1;
    j["c2"] = s.c2;
    j["c3"] = s.c3;
    j["eta"] = s.eta;
    j["epsilon"] = s.epsilon;
    j["gamma_range"] = s.gamma_range ? json(*s.gamma_range) : json("auto");
  } else if (s.kind == AgentKind::kTotalReward) {
    j["alpha"] = s.alpha;
  }
  return j;
}

inline RewardModel reward_model_from_json(const json& j, const GameConfig& game) {
  reject_unknown_keys(j, {"kind", "concentration", "alpha", "beta"}, "rewards");
  const auto kind = get_or<std::string>(j, "kind", "beta_mean");
  if (kind == "constant") return RewardModel::constant(game.payoffs());
  if (kind == "beta_mean") return RewardModel::beta_with_means(game.payoffs(), get_or(j, "concentration", 10.0));
  if (kind == "beta") {
    auto a = get_or<std::vector<double>>(j, "alpha", {});
    auto b = get_or<std::vector<double>>(j, "beta", {});
    return RewardModel::beta(a, b);
  }
  throw ConfigError("unknown rewards kind \"" + kind + "\"");
}

}  // namespace detail

inline json reward_model_to_json(const RewardModel& m) {
  json arms = json::array();
  for (const auto& a : m.arms()) {
    if (a.kind == ArmLaw::Kind::kBeta)
      arms.push_back({{"kind", "beta"}, {"alpha", a.alpha}, {"beta", a.beta}});
    else
      arms.push_back({{"kind", "constant"}, {"value", a.value}});
  }
  return arms;
}

inline ExperimentConfig experiment_from_json(const json& j) {
  using detail::get_or;
  if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
  detail::reject_unknown_keys(j, {"game", "rewards", "agents", "horizon", "num_seeds", "base_seed",
                                  "checkpoints", "threads", "output_dir", "trace"},
                              "experiment config");
  ExperimentConfig c;
  if (!j.contains("game")) throw ConfigError("experiment config needs \"game\"");
  const auto& g = j.at("game");
  if (g.contains("sample")) {
    const auto& s = g.at("sample");
    detail::reject_unknown_keys(s, {"num_players", "num_resources", "seed", "homogeneous", "beta_param_max",
                                    "min_delta", "max_attempts"},
                                "game.sample");
    GameSampling gs;
    gs.num_players = get_or(s, "num_players", gs.num_players);
    gs.num_resources = get_or(s, "num_resources", gs.num_resources);
    gs.seed = get_or(s, "seed", gs.seed);
    gs.homogeneous = get_or(s, "homogeneous", gs.homogeneous);
    gs.beta_param_max = get_or(s, "beta_param_max", gs.beta_param_max);
    gs.min_delta = get_or(s, "min_delta", gs.min_delta);
    gs.max_attempts = get_or(s, "max_attempts", gs.max_attempts);
    if (gs.num_players < 2 || gs.num_resources < 2) throw ConfigError("sampled game needs N, K >= 2");
    if (j.contains("rewards")) throw ConfigError("sampled games carry their own beta reward laws");
    c.sampling = gs;
  } else {
    c.game = game_from_json(g);
    try {
      c.rewards = detail::reward_model_from_json(j.value("rewards", json::object()), *c.game);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("invalid rewards: ") + e.what());
    }
  }

  if (!j.contains("agents")) throw ConfigError("experiment config needs \"agents\"");
  const auto& a = j.at("agents");
  if (a.is_array()) {
    for (const auto& spec : a) c.roster.push_back(detail::agent_spec_from_json(spec));
  } else {
    c.roster.push_back(detail::agent_spec_from_json(a));
  }

  c.horizon = get_or(j, "horizon", c.horizon);
  c.num_seeds = get_or(j, "num_seeds", c.num_seeds);
  c.base_seed = get_or(j, "base_seed", c.base_seed);
  c.threads = get_or(j, "threads", c.threads);
  c.output_dir = get_or(j, "output_dir", c.output_dir);
  c.trace = get_or(j, "trace", c.trace);
  if (j.contains("checkpoints")) {
    const auto& cp = j.at("checkpoints");
    detail::reject_unknown_keys(cp, {"mode", "dense_until", "growth", "stride"}, "checkpoints");
    const auto mode = get_or<std::string>(cp, "mode", "geometric");
    if (mode != "geometric" && mode != "linear") throw ConfigError("checkpoint mode must be geometric or linear");
    c.checkpoints.geometric = mode == "geometric";
    c.checkpoints.dense_until = get_or(cp, "dense_until", c.checkpoints.dense_until);
    c.checkpoints.growth = get_or(cp, "growth", c.checkpoints.growth);
    c.checkpoints.stride = get_or(cp, "stride", c.checkpoints.stride);
  }
  if (c.horizon < 1) throw ConfigError("horizon must be at least 1");
  if (c.num_seeds < 1) throw ConfigError("num_seeds must be at least 1");
  if (c.checkpoints.stride < 1) throw ConfigError("checkpoint stride must be at least 1");
  if (!(c.checkpoints.growth > 1.0)) throw ConfigError("checkpoint growth must exceed 1");
  return c;
}

// Rounds at which curves are sampled; always ends with the horizon.
inline std::vector<std::uint64_t> checkpoint_rounds(std::uint64_t horizon, const CheckpointSpec& spec) {
  std::vector<std::uint64_t> out;
  if (spec.geometric) {
    std::uint64_t t = 1;
    for (; t <= std::min(spec.dense_until, horizon); ++t) out.push_back(t);
    double next = static_cast<double>(t - 1);
    while (true) {
      next = std::max(std::ceil(next * spec.growth), static_cast<double>(out.empty() ? 1 : out.back() + 1));
      if (next >= static_cast<double>(horizon)) break;
      out.push_back(static_cast<std::uint64_t>(next));
    }
  } else {
    for (std::uint64_t t = spec.stride; t < horizon; t += spec.stride) out.push_back(t);
  }
  if (out.empty() || out.back() != horizon) out.push_back(horizon);
  return out;
}

struct SampledGame {
  GameConfig game;
  RewardModel rewards;
  std::uint64_t attempts = 0;
};

// Beta-distributed arms with alpha_k, beta_k ~ U(0, max), weights ~ U(0, 1);
// redrawn until the game has a PNE and its margin reaches min_delta.
inline SampledGame sample_experiment_game(const GameSampling& s) {
  Rng rng(s.seed);
  boost::random::uniform_real_distribution<double> unit(0.0, 1.0);
  auto positive = [&] {
    double x;
    do x = unit(rng); while (x <= 0.0);
    return x;
  };
  for (std::uint64_t attempt = 1; attempt <= s.max_attempts; ++attempt) {
    RewardModel rewards = RewardModel::sample_beta_arms(s.num_resources, rng, s.beta_param_max);
    Matrix w(s.num_players, s.num_resources);
    for (std::size_t k = 0; k < s.num_resources; ++k) {
      const double shared = positive();
      for (std::size_t j = 0; j < s.num_players; ++j) w(j, k) = s.homogeneous ? shared : positive();
    }
    GameConfig game(rewards.means(), std::move(w));
    const GapReport gaps = compute_gaps(game);
    if (gaps.has_pne && gaps.delta >= s.min_delta && gaps.delta > 0.0)
      return {std::move(game), std::move(rewards), attempt};
  }
  throw ConfigError("no sampled game met the requirements within max_attempts");
}

// A config resolved against its concrete game.
struct Experiment {
  GameConfig game;
  RewardModel rewards;
  GapReport gaps;
  EfficientPnes efficient;
  std::vector<AgentSpec> roster;  // exactly N entries
  std::uint64_t horizon = 1;
  std::uint64_t num_seeds = 1;
  std::uint64_t base_seed = 0;
  CheckpointSpec checkpoints;
  std::uint64_t sampling_attempts = 0;
};

inline Experiment resolve_experiment(const ExperimentConfig& c) {
  std::optional<GameConfig> game = c.game;
  std::optional<RewardModel> rewards = c.rewards;
  std::uint64_t attempts = 0;
  if (c.sampling) {
    auto s = sample_experiment_game(*c.sampling);
    game = std::move(s.game);
    rewards = std::move(s.rewards);
    attempts = s.attempts;
  }
  if (!game || !rewards) throw ConfigError("experiment has no game");

  std::vector<AgentSpec> roster = c.roster;
  if (roster.size() == 1) roster.assign(game->num_players(), roster.front());
  if (roster.size() != game->num_players())
    throw ConfigError("roster has " + std::to_string(roster.size()) + " agents for " +
                      std::to_string(game->num_players()) + " players");

  GapReport gaps;
  EfficientPnes efficient;
  try {
    gaps = compute_gaps(*game);
    efficient = most_efficient_pnes(*game);
  } catch (const EnumerationLimitError& e) {
    throw ConfigError(std::string("simulation needs the efficient equilibrium set: ") + e.what());
  }
  if (efficient.profiles.empty())
    throw NoEquilibriumError(
        "game has no pure Nash equilibrium; the non-efficient round count needs a most efficient PNE");
  return {std::move(*game), std::move(*rewards), gaps, std::move(efficient), std::move(roster),
          c.horizon, c.num_seeds, c.base_seed, c.checkpoints, attempts};
}

// Learner parameters for player `rank`, with exploration length and
// perturbation range derived from the true margin. Agents only ever see the
// resulting numbers.
inline LearnerParams learner_params(const Experiment& e, const AgentSpec& s, std::size_t rank) {
  const double n = static_cast<double>(e.game.num_players());
  const double k = static_cast<double>(e.game.num_resources());
  const double delta = e.gaps.delta;
  LearnerParams p;
  if (s.explore_mode == ExploreMode::kPulls) {
    p.explore_pulls = static_cast<std::uint64_t>(std::max(1.0, std::ceil(s.c1)));
  } else {
    if (!(delta > 0.0)) throw ConfigError("margin delta is zero; set c1_mode to \"pulls\"");
    const double pulls = std::ceil(s.c1 * k * k * std::log(static_cast<double>(e.horizon)) / (delta * delta));
    p.explore_pulls = static_cast<std::uint64_t>(std::max(1.0, pulls));
  }
  p.c2 = s.c2;
  p.c3 = s.c3;
  p.eta = s.eta;
  p.epsilon = s.epsilon;
  p.gamma_range = s.gamma_range ? *s.gamma_range : delta / (4.0 * n);
  p.rank = rank;
  p.horizon = e.horizon;
  p.num_arms = e.game.num_resources();
  p.num_players = e.game.num_players();
  return p;
}

inline std::vector<std::unique_ptr<Agent>> make_agents(const Experiment& e, std::uint64_t run_seed) {
  std::vector<std::unique_ptr<Agent>> agents;
  for (std::size_t j = 0; j < e.roster.size(); ++j) {
    const auto& s = e.roster[j];
    const std::uint64_t seed = derive_seed(run_seed, 1 + j);
    switch (s.kind) {
      case AgentKind::kLearner:
        agents.push_back(std::make_unique<TrialErrorLearner>(learner_params(e, s, j + 1), seed));
        break;
      case AgentKind::kTotalReward:
        agents.push_back(std::make_unique<TotalRewardAgent>(
            TotalRewardParams{s.alpha, j + 1, e.horizon, e.game.num_resources(), e.game.num_players()}, seed));
        break;
      case AgentKind::kRandom:
        agents.push_back(std::make_unique<RandomAgent>(e.game.num_resources(), seed));
        break;
    }
  }
  return agents;
}

// Shared phase layout when every agent is a learner with identical settings.
inline std::optional<PhaseSchedule> common_learner_schedule(const Experiment& e) {
  for (const auto& s : e.roster)
    if (s.kind != AgentKind::kLearner || !(s == e.roster.front())) return std::nullopt;
  return PhaseSchedule(learner_params(e, e.roster.front(), 1));
}

struct CheckpointRow {
  std::uint64_t t = 0;
  std::vector<double> regret;  // cumulative, per player
  std::uint64_t noneq = 0;

  bool operator==(const CheckpointRow&) const = default;
};

struct ExploitWindow {
  std::uint64_t subphase = 0;
  std::uint64_t first = 0;
  std::uint64_t last = 0;  // truncated at the horizon
  std::uint64_t efficient_rounds = 0;

  std::uint64_t rounds() const noexcept { return last - first + 1; }
  double efficient_fraction() const noexcept {
    return static_cast<double>(efficient_rounds) / static_cast<double>(rounds());
  }
  bool operator==(const ExploitWindow&) const = default;
};

struct SimulationResult {
  std::uint64_t seed = 0;
  RunMetrics metrics;
  std::vector<CheckpointRow> curve;
  std::optional<ExploitWindow> final_exploit;
  std::vector<std::uint64_t> final_profile;  // 1-based labels of the last round

  bool operator==(const SimulationResult&) const = default;
};

// Per-round CSV: t, a_1..a_N, x_1..x_K, r_1..r_N (arms 1-based).
class TraceWriter {
 public:
  TraceWriter(std::ostream& out, std::size_t num_players, std::size_t num_arms) : out_(&out) {
    *out_ << "t";
    for (std::size_t j = 1; j <= num_players; ++j) *out_ << ",a_" << j;
    for (std::size_t k = 1; k <= num_arms; ++k) *out_ << ",x_" << k;
    for (std::size_t j = 1; j <= num_players; ++j) *out_ << ",r_" << j;
    *out_ << '\n';
  }

  void row(std::uint64_t t, const Profile& joint, const std::vector<double>& totals,
           const std::vector<Observation>& obs) {
    *out_ << t;
    for (auto a : joint) *out_ << ',' << a + 1;
    for (double x : totals) *out_ << ',' << format_double(x);
    for (const auto& o : obs) *out_ << ',' << format_double(o.own_reward);
    *out_ << '\n';
  }

 private:
  std::ostream* out_;
};

inline SimulationResult run_simulation(const Experiment& e, std::uint64_t seed, TraceWriter* trace = nullptr) {
  const std::size_t n = e.game.num_players();
  Environment env(e.game, e.rewards, derive_seed(seed, 0));
  auto agents = make_agents(e, seed);
  MetricsTracker tracker(env.game(), e.efficient.profiles);

  SimulationResult r;
  r.seed = seed;
  const auto checkpoints = checkpoint_rounds(e.horizon, e.checkpoints);
  std::size_t next_checkpoint = 0;
  if (auto schedule = common_learner_schedule(e)) {
    if (auto seg = schedule->final_exploit(e.horizon))
      r.final_exploit = ExploitWindow{seg->subphase, seg->first, std::min(seg->last(), e.horizon), 0};
  }

  Profile joint = Profile::uniform(n, 0);
  std::vector<Observation> obs;
  for (std::uint64_t t = 1; t <= e.horizon; ++t) {
    for (std::size_t j = 0; j < n; ++j) joint[j] = static_cast<Profile::value_type>(agents[j]->act(t));
    env.step(joint, obs);
    for (std::size_t j = 0; j < n; ++j) agents[j]->observe(t, obs[j]);
    const bool efficient = tracker.record(joint);
    if (r.final_exploit && efficient && t >= r.final_exploit->first && t <= r.final_exploit->last)
      ++r.final_exploit->efficient_rounds;
    if (trace) trace->row(t, joint, env.last_totals(), obs);
    if (next_checkpoint < checkpoints.size() && t == checkpoints[next_checkpoint]) {
      r.curve.push_back({t, tracker.metrics().regret, tracker.metrics().noneq});
      ++next_checkpoint;
    }
  }
  r.metrics = tracker.metrics();
  for (auto a : joint) r.final_profile.push_back(a + 1);
  return r;
}

struct AggregateCurve {
  std::vector<std::uint64_t> t;
  std::vector<double> regret_mean;  // player-averaged cumulative regret, mean over seeds
  std::vector<double> regret_std;
  std::vector<double> noneq_mean;
  std::vector<double> noneq_std;
  std::vector<std::vector<double>> player_regret_mean;  // [player][checkpoint]

  bool operator==(const AggregateCurve&) const = default;
};

namespace detail {

inline std::pair<double, double> mean_std(const std::vector<double>& xs) {
  double m = 0.0;
  for (double x : xs) m += x;
  m /= static_cast<double>(xs.size());
  if (xs.size() < 2) return {m, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return {m, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
}

}  // namespace detail

// Sample standard deviation across seeds (0 for a single seed).
inline AggregateCurve aggregate(const std::vector<SimulationResult>& runs) {
  AggregateCurve c;
  if (runs.empty()) return c;
  const std::size_t points = runs.front().curve.size();
  const std::size_t n = runs.front().metrics.regret.size();
  c.player_regret_mean.assign(n, {});
  for (std::size_t i = 0; i < points; ++i) {
    std::vector<double> reg, neq;
    std::vector<double> per_player(n, 0.0);
    for (const auto& r : runs) {
      const auto& row = r.curve.at(i);
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        s += row.regret[j];
        per_player[j] += row.regret[j];
      }
      reg.push_back(s / static_cast<double>(n));
      neq.push_back(static_cast<double>(row.noneq));
    }
    c.t.push_back(runs.front().curve[i].t);
    auto [rm, rs] = detail::mean_std(reg);
    auto [nm, ns] = detail::mean_std(neq);
    c.regret_mean.push_back(rm);
    c.regret_std.push_back(rs);
    c.noneq_mean.push_back(nm);
    c.noneq_std.push_back(ns);
    for (std::size_t j = 0; j < n; ++j)
      c.player_regret_mean[j].push_back(per_player[j] / static_cast<double>(runs.size()));
  }
  return c;
}

struct SweepResult {
  std::vector<SimulationResult> runs;  // in seed order
  AggregateCurve curve;
};

class SeedError : public std::runtime_error {
 public:
  SeedError(std::uint64_t seed, const std::string& what)
      : std::runtime_error("seed " + std::to_string(seed) + ": " + what), seed_(seed) {}
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
};

// Seeds base_seed .. base_seed + num_seeds - 1. Results do not depend on the
// thread count.
inline SweepResult run_sweep(const Experiment& e, unsigned threads = 1) {
  SweepResult out;
  out.runs.resize(e.num_seeds);
  std::vector<std::string> errors(e.num_seeds);
  std::atomic<std::uint64_t> next{0};
  auto worker = [&] {
    for (std::uint64_t i = next++; i < e.num_seeds; i = next++) {
      try {
        out.runs[i] = run_simulation(e, e.base_seed + i);
      } catch (const std::exception& ex) {
        errors[i] = ex.what();
      }
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(e.num_seeds)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (std::uint64_t i = 0; i < e.num_seeds; ++i)
    if (!errors[i].empty()) throw SeedError(e.base_seed + i, errors[i]);
  out.curve = aggregate(out.runs);
  return out;
}

// ---------------------------------------------------------------------------
// Encodings
// ---------------------------------------------------------------------------

inline json experiment_to_json(const Experiment& e) {
  json roster = json::array();
  for (const auto& s : e.roster) roster.push_back(detail::agent_spec_to_json(s));
  json j;
  j["game"] = game_to_json(e.game);
  j["rewards"] = reward_model_to_json(e.rewards);
  j["gaps"] = gaps_to_json(e.gaps);
  j["efficient_set"] = profiles_to_json(e.efficient.profiles);
  j["max_welfare"] = e.efficient.welfare ? json(*e.efficient.welfare) : json(nullptr);
  j["agents"] = roster;
  j["horizon"] = e.horizon;
  j["num_seeds"] = e.num_seeds;
  j["base_seed"] = e.base_seed;
  j["sampling_attempts"] = e.sampling_attempts;
  if (auto sched = common_learner_schedule(e)) j["explore_rounds"] = sched->explore_rounds();
  return j;
}

inline json run_to_json(const SimulationResult& r) {
  json j;
  j["seed"] = r.seed;
  j["rounds"] = r.metrics.rounds;
  j["regret"] = r.metrics.regret;
  j["mean_regret"] = r.metrics.mean_regret();
  j["noneq"] = r.metrics.noneq;
  j["final_profile"] = r.final_profile;
  if (r.final_exploit) {
    const auto& w = *r.final_exploit;
    j["final_exploit"] = {{"subphase", w.subphase},
                          {"first", w.first},
                          {"last", w.last},
                          {"efficient_rounds", w.efficient_rounds},
                          {"efficient_fraction", w.efficient_fraction()}};
  } else {
    j["final_exploit"] = nullptr;
  }
  return j;
}

inline json curve_to_json(const AggregateCurve& c) {
  return {{"t", c.t},
          {"regret_mean", c.regret_mean},
          {"regret_std", c.regret_std},
          {"noneq_mean", c.noneq_mean},
          {"noneq_std", c.noneq_std},
          {"player_regret_mean", c.player_regret_mean}};
}

inline AggregateCurve curve_from_json(const json& j) {
  try {
    AggregateCurve c;
    c.t = j.at("t").get<std::vector<std::uint64_t>>();
    c.regret_mean = j.at("regret_mean").get<std::vector<double>>();
    c.regret_std = j.at("regret_std").get<std::vector<double>>();
    c.noneq_mean = j.at("noneq_mean").get<std::vector<double>>();
    c.noneq_std = j.at("noneq_std").get<std::vector<double>>();
    c.player_regret_mean = j.at("player_regret_mean").get<std::vector<std::vector<double>>>();
    const auto len = c.t.size();
    if (c.regret_mean.size() != len || c.regret_std.size() != len || c.noneq_mean.size() != len ||
        c.noneq_std.size() != len)
      throw ConfigError("curve columns have unequal length");
    for (const auto& p : c.player_regret_mean)
      if (p.size() != len) throw ConfigError("curve columns have unequal length");
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed curve: ") + e.what());
  }
}

inline json sweep_to_json(const Experiment& e, const SweepResult& s) {
  json runs = json::array();
  for (const auto& r : s.runs) runs.push_back(run_to_json(r));
  return {{"experiment", experiment_to_json(e)}, {"runs", runs}, {"curve", curve_to_json(s.curve)}};
}

// RFC 4180 with LF line endings.
inline std::string curve_to_csv(const AggregateCurve& c) {
  std::ostringstream out;
  out << "t,regret_mean,regret_std,noneq_mean,noneq_std";
  for (std::size_t j = 1; j <= c.player_regret_mean.size(); ++j) out << ",regret_p" << j;
  out << '\n';
  for (std::size_t i = 0; i < c.t.size(); ++i) {
    out << c.t[i] << ',' << format_double(c.regret_mean[i]) << ',' << format_double(c.regret_std[i]) << ','
        << format_double(c.noneq_mean[i]) << ',' << format_double(c.noneq_std[i]);
    for (const auto& p : c.player_regret_mean) out << ',' << format_double(p[i]);
    out << '\n';
  }
  return out.str();
}

inline std::string run_curve_to_csv(const SimulationResult& r) {
  std::ostringstream out;
  out << "t,mean_regret,noneq";
  const std::size_t n = r.metrics.regret.size();
  for (std::size_t j = 1; j <= n; ++j) out << ",regret_p" << j;
  out << '\n';
  for (const auto& row : r.curve) {
    double s = 0.0;
    for (double x : row.regret) s += x;
    out << row.t << ',' << format_double(s / static_cast<double>(n)) << ',' << row.noneq;
    for (double x : row.regret) out << ',' << format_double(x);
    out << '\n';
  }
  return out.str();
}

}  // namespace ppa
