#pragma once

// Monte Carlo study of equilibrium existence on randomly drawn games. Each
// game is probed with one improvement path from the all-on-resource-1 profile;
// a path that terminates proves a PNE exists. Cycling paths are escalated to
// exhaustive enumeration when the instance is small enough.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <boost/random/beta_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/student_t_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include "ppa/game.hpp"
#include "ppa/random.hpp"

namespace ppa {

enum class DistributionKind { kUniform01, kTruncNormal, kTruncStudentT, kBeta };

struct DistributionSpec {
  DistributionKind kind = DistributionKind::kUniform01;
  // Normal: (mean, sd). Student t: (dof, shift). Beta: (alpha, beta).
  double a = 0.0;
  double b = 0.0;

  static DistributionSpec uniform01() { return {DistributionKind::kUniform01, 0.0, 1.0}; }
  static DistributionSpec trunc_normal(double mean = 0.5, double sd = 0.1) {
    return {DistributionKind::kTruncNormal, mean, sd};
  }
  static DistributionSpec trunc_student_t(double dof = 5.0, double shift = 0.5) {
    return {DistributionKind::kTruncStudentT, dof, shift};
  }
  static DistributionSpec beta(double alpha = 0.5, double beta = 0.5) {
    return {DistributionKind::kBeta, alpha, beta};
  }

  static std::vector<DistributionSpec> all_defaults() {
    return {uniform01(), trunc_normal(), trunc_student_t(), beta()};
  }

  std::string name() const {
    switch (kind) {
      case DistributionKind::kUniform01: return "uniform";
      case DistributionKind::kTruncNormal: return "trunc_normal";
      case DistributionKind::kTruncStudentT: return "trunc_t";
      case DistributionKind::kBeta: return "beta";
    }
    return "unknown";
  }

  static DistributionSpec from_name(const std::string& name) {
    if (name == "uniform") return uniform01();
    if (name == "trunc_normal") return trunc_normal();
    if (name == "trunc_t") return trunc_student_t();
    if (name == "beta") return beta();
    throw std::invalid_argument("unknown distribution '" + name + "'");
  }
};

// One draw in [0, 1]. Out-of-range draws are rejected and redrawn rather than
// clamped, so the truncated laws keep a continuous density.
template <typename RngT>
double sample_value(const DistributionSpec& spec, RngT& rng) {
  switch (spec.kind) {
    case DistributionKind::kUniform01: {
      boost::random::uniform_real_distribution<double> d(0.0, 1.0);
      return d(rng);
    }
    case DistributionKind::kTruncNormal: {
      boost::random::normal_distribution<double> d(spec.a, spec.b);
      while (true) {
        const double x = d(rng);
        if (x >= 0.0 && x <= 1.0) return x;
      }
    }
    case DistributionKind::kTruncStudentT: {
      boost::random::student_t_distribution<double> d(spec.a);
      while (true) {
        const double x = d(rng) + spec.b;
        if (x >= 0.0 && x <= 1.0) return x;
      }
    }
    case DistributionKind::kBeta: {
      boost::random::beta_distribution<double> d(spec.a, spec.b);
      return d(rng);
    }
  }
  throw std::logic_error("unhandled distribution kind");
}

// Payoffs must be strictly positive.
template <typename RngT>
double sample_payoff(const DistributionSpec& spec, RngT& rng) {
  while (true) {
    const double x = sample_value(spec, rng);
    if (x > 0.0) return x;
  }
}

struct IntRange {
  std::size_t lo = 0;
  std::size_t hi = 0;
};

template <typename RngT>
GameConfig sample_game(const DistributionSpec& spec, IntRange n_range, IntRange k_range, RngT& rng) {
  if (n_range.lo > n_range.hi || k_range.lo > k_range.hi)
    throw std::invalid_argument("empty player or resource range");
  if (n_range.lo < 2 || k_range.lo < 2)
    throw std::invalid_argument("games need at least 2 players and 2 resources");
  boost::random::uniform_int_distribution<std::size_t> n_dist(n_range.lo, n_range.hi);
  boost::random::uniform_int_distribution<std::size_t> k_dist(k_range.lo, k_range.hi);
  const std::size_t n = n_dist(rng);
  const std::size_t k = k_dist(rng);

  std::vector<double> payoffs(k);
  for (auto& m : payoffs) m = sample_payoff(spec, rng);

  Matrix w(n, k);
  for (std::size_t c = 0; c < k; ++c) {
    bool any_positive = false;
    while (!any_positive) {
      for (std::size_t j = 0; j < n; ++j) {
        w(j, c) = sample_value(spec, rng);
        any_positive = any_positive || w(j, c) > 0.0;
      }
    }
  }
  return GameConfig(std::move(payoffs), std::move(w));
}

enum class ProbeVerdict {
  kConverged,        // path ended at a PNE
  kNoPne,            // path cycled; enumeration found no PNE
  kPneOffPath,       // path cycled; enumeration found a PNE elsewhere
  kCycleUndecided,   // path cycled; instance too large to enumerate
  kStepCapReached,   // neither converged nor cycled within max_steps
};

inline const char* to_string(ProbeVerdict v) noexcept {
  switch (v) {
    case ProbeVerdict::kConverged: return "converged";
    case ProbeVerdict::kNoPne: return "no_pne";
    case ProbeVerdict::kPneOffPath: return "pne_off_path";
    case ProbeVerdict::kCycleUndecided: return "cycle_undecided";
    case ProbeVerdict::kStepCapReached: return "step_cap";
  }
  return "unknown";
}

struct ProbeResult {
  PathResult path;
  ProbeVerdict verdict = ProbeVerdict::kConverged;
  std::size_t pne_count = 0;  // set only when enumeration ran
};

inline constexpr std::uint64_t kDefaultProbeSteps = 1'000'000;

inline ProbeResult existence_probe(const GameConfig& game, std::uint64_t max_steps = kDefaultProbeSteps,
                                   std::uint64_t enumeration_cap = kDefaultEnumerationCap) {
  ProbeResult r;
  r.path = improvement_path(game, Profile::uniform(game.num_players(), 0), max_steps);
  switch (r.path.outcome) {
    case PathOutcome::kConverged: r.verdict = ProbeVerdict::kConverged; break;
    case PathOutcome::kStepCapReached: r.verdict = ProbeVerdict::kStepCapReached; break;
    case PathOutcome::kCycleDetected: {
      auto count = profile_count(game.num_players(), game.num_resources());
      if (!count || *count > enumeration_cap) {
        r.verdict = ProbeVerdict::kCycleUndecided;
      } else {
        r.pne_count = enumerate_pnes(game, enumeration_cap).size();
        r.verdict = r.pne_count == 0 ? ProbeVerdict::kNoPne : ProbeVerdict::kPneOffPath;
      }
      break;
    }
  }
  return r;
}

struct MonteCarloConfig {
  std::vector<DistributionSpec> distributions = DistributionSpec::all_defaults();
  std::uint64_t trials = 1000;  // per distribution
  IntRange n_range{3, 8};
  IntRange k_range{3, 8};
  std::uint64_t max_steps = kDefaultProbeSteps;
  std::uint64_t seed = 0;
  std::uint64_t enumeration_cap = kDefaultEnumerationCap;
  unsigned threads = 1;
};

struct DistributionSummary {
  std::string distribution;
  std::uint64_t trials = 0;
  std::uint64_t converged = 0;
  std::uint64_t cycles = 0;
  std::uint64_t cap_hits = 0;
  std::uint64_t cycles_no_pne = 0;
  std::uint64_t cycles_pne_off_path = 0;
  std::uint64_t cycles_undecided = 0;
  std::vector<std::uint64_t> flagged_seeds;  // trial seeds of every non-converged probe

  // Games with a PNE proven, over all trials. Undecided and cap-hit games
  // count against the rate.
  double existence_rate() const noexcept {
    return trials ? static_cast<double>(converged + cycles_pne_off_path) / static_cast<double>(trials)
                  : 0.0;
  }
};

struct ExistenceSummary {
  std::vector<DistributionSummary> rows;
  DistributionSummary total;
};

namespace detail {

inline void tally(DistributionSummary& s, ProbeVerdict v, std::uint64_t seed) {
  ++s.trials;
  switch (v) {
    case ProbeVerdict::kConverged: ++s.converged; return;
    case ProbeVerdict::kStepCapReached: ++s.cap_hits; break;
    case ProbeVerdict::kNoPne: ++s.cycles; ++s.cycles_no_pne; break;
    case ProbeVerdict::kPneOffPath: ++s.cycles; ++s.cycles_pne_off_path; break;
    case ProbeVerdict::kCycleUndecided: ++s.cycles; ++s.cycles_undecided; break;
  }
  s.flagged_seeds.push_back(seed);
}

}  // namespace detail

// Seed of trial i of distribution d: cfg.seed + d * cfg.trials + i.
inline std::uint64_t mc_trial_seed(const MonteCarloConfig& cfg, std::size_t dist_index,
                                   std::uint64_t trial) noexcept {
  return cfg.seed + dist_index * cfg.trials + trial;
}

inline ProbeVerdict run_mc_trial(const MonteCarloConfig& cfg, std::size_t dist_index, std::uint64_t trial) {
  Rng rng(mc_trial_seed(cfg, dist_index, trial));
  const GameConfig game = sample_game(cfg.distributions[dist_index], cfg.n_range, cfg.k_range, rng);
  return existence_probe(game, cfg.max_steps, cfg.enumeration_cap).verdict;
}

// Deterministic in cfg regardless of thread count: verdicts are stored by
// trial index and reduced in order.
inline ExistenceSummary run_mc(const MonteCarloConfig& cfg) {
  if (cfg.trials < 1) throw std::invalid_argument("trials must be at least 1");
  if (cfg.distributions.empty()) throw std::invalid_argument("no distributions given");
  const std::size_t d_count = cfg.distributions.size();
  const std::uint64_t total = d_count * cfg.trials;
  std::vector<ProbeVerdict> verdicts(total);

  std::atomic<std::uint64_t> next{0};
  auto worker = [&] {
    for (std::uint64_t i = next++; i < total; i = next++)
      verdicts[i] = run_mc_trial(cfg, i / cfg.trials, i % cfg.trials);
  };
  const unsigned threads = std::max(1u, cfg.threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  ExistenceSummary out;
  out.total.distribution = "all";
  for (std::size_t d = 0; d < d_count; ++d) {
    DistributionSummary row;
    row.distribution = cfg.distributions[d].name();
    for (std::uint64_t i = 0; i < cfg.trials; ++i) {
      const auto v = verdicts[d * cfg.trials + i];
      detail::tally(row, v, mc_trial_seed(cfg, d, i));
      detail::tally(out.total, v, mc_trial_seed(cfg, d, i));
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

}  // namespace ppa
