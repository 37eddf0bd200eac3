#pragma once

// Decentralized agent policies. An agent sees only its own observations: the
// arm it pulled, its own reward and that arm's total reward.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include "ppa/bandit_env.hpp"
#include "ppa/perturbation.hpp"
#include "ppa/random.hpp"

namespace ppa {

// Rounds are numbered from 1. act(t) for every agent completes before any
// observe(t).
class Agent {
 public:
  virtual ~Agent() = default;
  virtual std::size_t act(std::uint64_t round) = 0;
  virtual void observe(std::uint64_t round, const Observation& obs) = 0;
  virtual std::string_view kind() const noexcept = 0;
};

// ---------------------------------------------------------------------------
// Trial-and-error learner
// ---------------------------------------------------------------------------

enum class Mood { kDiscontent, kContent, kWatchful, kHopeful };

inline const char* to_string(Mood m) noexcept {
  switch (m) {
    case Mood::kDiscontent: return "D";
    case Mood::kContent: return "C";
    case Mood::kWatchful: return "C-";
    case Mood::kHopeful: return "C+";
  }
  return "?";
}

struct MoodState {
  Mood mood = Mood::kDiscontent;
  std::size_t benchmark_arm = 0;
  double benchmark_utility = 0.0;

  bool operator==(const MoodState&) const = default;
};

struct LearnerParams {
  std::uint64_t explore_pulls = 1;  // c1: pulls of each arm during exploration
  double c2 = 1000.0;               // learning subphase s lasts ceil(c2 * s^eta) rounds
  double c3 = 200.0;                // exploitation subphase s lasts c3 * 2^s rounds
  double eta = 1.0;
  double epsilon = 0.003;           // experimentation rate, in (0, 1)
  double gamma_range = 0.0;         // perturbations drawn from [0, gamma_range]
  std::size_t rank = 1;             // 1-based player rank
  std::uint64_t horizon = 1;
  std::size_t num_arms = 2;
  std::size_t num_players = 2;

  void validate() const {
    if (explore_pulls < 1) throw std::invalid_argument("explore_pulls must be at least 1");
    if (!(c2 > 0.0) || !(c3 > 0.0) || !(eta > 0.0))
      throw std::invalid_argument("c2, c3 and eta must be positive");
    if (!(epsilon >= 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in [0, 1)");
    if (!(gamma_range >= 0.0)) throw std::invalid_argument("gamma_range must be non-negative");
    if (rank < 1) throw std::invalid_argument("rank is 1-based");
    if (num_arms < 2 || num_players < 2) throw std::invalid_argument("need at least 2 arms and 2 players");
  }
};

// 0-based arm pulled by player `rank` in exploration round t: (t + rank) mod K.
// In 1-based labels this is (t + j) mod K + 1.
inline std::size_t explore_arm(std::size_t rank, std::uint64_t round, std::size_t num_arms) {
  return static_cast<std::size_t>((round + rank) % num_arms);
}

// Acceptance exponent for a discontent player; lies in (0, 1/(3N)] on [0, 1+Gamma].
inline double mood_f(double u, std::size_t num_players, double gamma_range) {
  const double n = static_cast<double>(num_players);
  return -u / ((4.0 + 3.0 * gamma_range) * n) + 1.0 / (3.0 * n);
}

// Acceptance exponent for a content player's improving experiment.
inline double mood_g(double u, double gamma_range) {
  return -u / (4.0 + 3.0 * gamma_range) + 1.0 / 3.0;
}

template <typename RngT>
std::size_t choose_arm_by_mood(const MoodState& state, std::size_t num_arms, double epsilon, RngT& rng) {
  switch (state.mood) {
    case Mood::kDiscontent: {
      boost::random::uniform_int_distribution<std::size_t> d(0, num_arms - 1);
      return d(rng);
    }
    case Mood::kContent: {
      boost::random::uniform_real_distribution<double> u(0.0, 1.0);
      if (u(rng) >= epsilon) return state.benchmark_arm;
      boost::random::uniform_int_distribution<std::size_t> d(0, num_arms - 2);
      const std::size_t other = d(rng);
      return other < state.benchmark_arm ? other : other + 1;
    }
    case Mood::kWatchful:
    case Mood::kHopeful:
      return state.benchmark_arm;
  }
  return state.benchmark_arm;
}

struct MoodContext {
  std::size_t num_players = 2;
  double gamma_range = 0.0;
  double epsilon = 0.0;
  double tolerance = kTolerance;  // |u' - u| within this counts as equal
};

namespace detail {

template <typename RngT>
bool bernoulli(double p, RngT& rng) {
  boost::random::uniform_real_distribution<double> u(0.0, 1.0);
  return u(rng) < p;
}

}  // namespace detail

// Status transition after pulling `chosen` and computing utility u'.
template <typename RngT>
MoodState update_mood(const MoodState& s, std::size_t chosen, double u_prime, const MoodContext& ctx,
                      RngT& rng) {
  const double diff = u_prime - s.benchmark_utility;
  const bool up = diff > ctx.tolerance;
  const bool down = diff < -ctx.tolerance;
  switch (s.mood) {
    case Mood::kDiscontent: {
      const double p = std::pow(ctx.epsilon, mood_f(u_prime, ctx.num_players, ctx.gamma_range));
      if (detail::bernoulli(p, rng)) return {Mood::kContent, chosen, u_prime};
      return s;
    }
    case Mood::kContent: {
      if (chosen == s.benchmark_arm) {
        if (up) return {Mood::kHopeful, s.benchmark_arm, s.benchmark_utility};
        if (down) return {Mood::kWatchful, s.benchmark_arm, s.benchmark_utility};
        return s;
      }
      if (up) {
        const double p = std::pow(ctx.epsilon, mood_g(diff, ctx.gamma_range));
        if (detail::bernoulli(p, rng)) return {Mood::kContent, chosen, u_prime};
      }
      return s;
    }
    case Mood::kWatchful:
      if (up) return {Mood::kHopeful, s.benchmark_arm, s.benchmark_utility};
      if (down) return {Mood::kDiscontent, s.benchmark_arm, s.benchmark_utility};
      return {Mood::kContent, s.benchmark_arm, s.benchmark_utility};
    case Mood::kHopeful:
      if (up) return {Mood::kContent, s.benchmark_arm, u_prime};
      if (down) return {Mood::kWatchful, s.benchmark_arm, s.benchmark_utility};
      return {Mood::kContent, s.benchmark_arm, s.benchmark_utility};
  }
  return s;
}

// Arm with the most content rounds; lowest index on ties.
inline std::size_t pick_exploit_arm(std::span<const std::uint64_t> content_counts) {
  if (content_counts.empty()) throw std::invalid_argument("no arms");
  return static_cast<std::size_t>(
      std::max_element(content_counts.begin(), content_counts.end()) - content_counts.begin());
}

// Per-arm empirical means from exploration reward sums.
inline std::vector<double> finalize_estimates(std::span<const double> reward_sums, std::uint64_t pulls) {
  if (pulls < 1) throw std::invalid_argument("pulls must be at least 1");
  std::vector<double> mu(reward_sums.begin(), reward_sums.end());
  for (auto& m : mu) m /= static_cast<double>(pulls);
  return mu;
}

enum class PhaseKind { kExplore, kLearn, kExploit };

inline const char* to_string(PhaseKind p) noexcept {
  switch (p) {
    case PhaseKind::kExplore: return "explore";
    case PhaseKind::kLearn: return "learn";
    case PhaseKind::kExploit: return "exploit";
  }
  return "?";
}

struct PhaseSegment {
  PhaseKind kind = PhaseKind::kExplore;
  std::uint64_t subphase = 0;  // s, 0 for exploration
  std::uint64_t first = 1;     // first round (1-based, inclusive)
  std::uint64_t length = 0;    // untruncated length

  std::uint64_t last() const noexcept { return first + length - 1; }
};

// Round layout shared by all learners with the same parameters.
class PhaseSchedule {
 public:
  PhaseSchedule(std::uint64_t explore_pulls, std::size_t num_arms, double c2, double c3, double eta)
      : explore_rounds_(explore_pulls * num_arms), c2_(c2), c3_(c3), eta_(eta) {}

  explicit PhaseSchedule(const LearnerParams& p)
      : PhaseSchedule(p.explore_pulls, p.num_arms, p.c2, p.c3, p.eta) {}

  std::uint64_t explore_rounds() const noexcept { return explore_rounds_; }

  std::uint64_t learn_length(std::uint64_t s) const {
    return static_cast<std::uint64_t>(std::ceil(c2_ * std::pow(static_cast<double>(s), eta_)));
  }
  std::uint64_t exploit_length(std::uint64_t s) const {
    const double len = std::ceil(c3_ * std::ldexp(1.0, static_cast<int>(std::min<std::uint64_t>(s, 62))));
    return len >= 0x1p62 ? std::uint64_t{1} << 62 : static_cast<std::uint64_t>(len);
  }

  // First round of learning subphase s (s >= 1).
  std::uint64_t learn_start(std::uint64_t s) const {
    std::uint64_t t = explore_rounds_ + 1;
    for (std::uint64_t i = 1; i < s; ++i) t += learn_length(i) + exploit_length(i);
    return t;
  }

  PhaseSegment first_segment() const {
    if (explore_rounds_ > 0) return {PhaseKind::kExplore, 0, 1, explore_rounds_};
    return {PhaseKind::kLearn, 1, 1, learn_length(1)};
  }

  PhaseSegment next(const PhaseSegment& seg) const {
    const std::uint64_t start = seg.first + seg.length;
    switch (seg.kind) {
      case PhaseKind::kExplore: return {PhaseKind::kLearn, 1, start, learn_length(1)};
      case PhaseKind::kLearn: return {PhaseKind::kExploit, seg.subphase, start, exploit_length(seg.subphase)};
      default: return {PhaseKind::kLearn, seg.subphase + 1, start, learn_length(seg.subphase + 1)};
    }
  }

  PhaseSegment segment_at(std::uint64_t round) const {
    PhaseSegment seg = first_segment();
    while (seg.last() < round) seg = next(seg);
    return seg;
  }

  // Last exploitation subphase that starts within the horizon, if any.
  std::optional<PhaseSegment> final_exploit(std::uint64_t horizon) const {
    std::optional<PhaseSegment> found;
    for (PhaseSegment seg = first_segment(); seg.first <= horizon; seg = next(seg))
      if (seg.kind == PhaseKind::kExploit) found = seg;
    return found;
  }

 private:
  std::uint64_t explore_rounds_;
  double c2_, c3_, eta_;
};

class TrialErrorLearner final : public Agent {
 public:
  TrialErrorLearner(LearnerParams params, std::uint64_t seed)
      : p_((params.validate(), params)),
        schedule_(p_),
        rng_(seed),
        sums_(p_.num_arms, 0.0),
        mu_hat_(p_.num_arms, 0.0),
        gamma_(p_.num_arms, 0.0),
        q_subphase_(p_.num_arms, 0),
        q_total_(p_.num_arms, 0),
        segment_(schedule_.first_segment()) {
    if (segment_.kind == PhaseKind::kLearn) begin_learning();
  }

  std::string_view kind() const noexcept override { return "learner"; }

  std::size_t act(std::uint64_t round) override {
    if (round != round_ + 1) throw std::logic_error("learner rounds must be consecutive");
    switch (segment_.kind) {
      case PhaseKind::kExplore: last_arm_ = explore_arm(p_.rank, round, p_.num_arms); break;
      case PhaseKind::kLearn: last_arm_ = choose_arm_by_mood(mood_, p_.num_arms, p_.epsilon, rng_); break;
      default: last_arm_ = exploit_arm_; break;
    }
    return last_arm_;
  }

  void observe(std::uint64_t round, const Observation& obs) override {
    if (round != round_ + 1 || obs.arm != last_arm_) throw std::logic_error("observation out of sync");
    round_ = round;
    const std::size_t k = obs.arm;
    switch (segment_.kind) {
      case PhaseKind::kExplore:
        sums_[k] += obs.arm_total;
        break;
      case PhaseKind::kLearn: {
        last_u_prime_ = obs.own_reward * mu_hat_[k] / obs.arm_total + gamma_[k];
        mood_ = update_mood(mood_, k, last_u_prime_, context(), rng_);
        if (mood_.mood == Mood::kContent) {
          ++q_subphase_[k];
          ++q_total_[k];
        }
        break;
      }
      default:
        break;
    }
    if (round == segment_.last()) advance();
  }

  const LearnerParams& params() const noexcept { return p_; }
  const PhaseSchedule& schedule() const noexcept { return schedule_; }
  const PhaseSegment& segment() const noexcept { return segment_; }
  const MoodState& mood() const noexcept { return mood_; }
  const std::vector<double>& estimates() const noexcept { return mu_hat_; }
  const std::vector<double>& perturbations() const noexcept { return gamma_; }
  const std::vector<std::uint64_t>& content_counts() const noexcept { return q_total_; }
  const std::vector<std::uint64_t>& subphase_content_counts() const noexcept { return q_subphase_; }
  std::size_t exploit_arm() const noexcept { return exploit_arm_; }
  double last_utility() const noexcept { return last_u_prime_; }
  bool estimates_ready() const noexcept { return estimates_ready_; }

  // Overrides the status tuple within a learning subphase. Test hook.
  void set_mood(const MoodState& s) { mood_ = s; }

 private:
  MoodContext context() const { return {p_.num_players, p_.gamma_range, p_.epsilon, kTolerance}; }

  void begin_learning() {
    if (!estimates_ready_) finish_exploration();
    std::fill(q_subphase_.begin(), q_subphase_.end(), 0);
    mood_ = {Mood::kDiscontent, 0, 0.0};
  }

  void finish_exploration() {
    mu_hat_ = finalize_estimates(sums_, p_.explore_pulls);
    const Matrix g = sample_gamma(1, p_.num_arms, p_.gamma_range, rng_);
    for (std::size_t k = 0; k < p_.num_arms; ++k) gamma_[k] = g(0, k);
    estimates_ready_ = true;
  }

  void advance() {
    segment_ = schedule_.next(segment_);
    if (segment_.kind == PhaseKind::kLearn)
      begin_learning();
    else if (segment_.kind == PhaseKind::kExploit)
      exploit_arm_ = pick_exploit_arm(q_total_);
  }

  LearnerParams p_;
  PhaseSchedule schedule_;
  Rng rng_;
  std::vector<double> sums_;
  std::vector<double> mu_hat_;
  std::vector<double> gamma_;
  std::vector<std::uint64_t> q_subphase_;
  std::vector<std::uint64_t> q_total_;
  PhaseSegment segment_;
  MoodState mood_;
  std::uint64_t round_ = 0;
  std::size_t last_arm_ = 0;
  std::size_t exploit_arm_ = 0;
  double last_u_prime_ = 0.0;
  bool estimates_ready_ = false;
};

// ---------------------------------------------------------------------------
// Baselines
// ---------------------------------------------------------------------------

struct TotalRewardParams {
  double alpha = 100.0;
  std::size_t rank = 1;  // 1-based
  std::uint64_t horizon = 1;
  std::size_t num_arms = 2;
  std::size_t num_players = 2;

  // ceil(alpha * ln T)
  std::uint64_t explore_rounds() const {
    return static_cast<std::uint64_t>(std::ceil(alpha * std::log(static_cast<double>(horizon))));
  }
};

// Arm committed to by player `rank` given estimated arm means: the arm ranked
// ((rank - 1) mod min(N, K)) + 1 by descending estimate (lower index on ties).
inline std::size_t total_reward_commit_arm(std::span<const double> estimates, std::size_t rank,
                                           std::size_t num_players) {
  std::vector<std::size_t> order(estimates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return estimates[a] > estimates[b]; });
  const std::size_t slots = std::min(num_players, estimates.size());
  return order[(rank - 1) % slots];
}

// Explore-then-commit: uniform arms while averaging observed arm totals, then
// a fixed arm chosen so the roster covers the top min(N, K) arms.
class TotalRewardAgent final : public Agent {
 public:
  TotalRewardAgent(TotalRewardParams params, std::uint64_t seed)
      : p_(params), rng_(seed), sums_(p_.num_arms, 0.0), counts_(p_.num_arms, 0) {
    if (!(p_.alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    if (p_.rank < 1) throw std::invalid_argument("rank is 1-based");
    explore_rounds_ = p_.explore_rounds();
  }

  std::string_view kind() const noexcept override { return "total_reward"; }

  std::size_t act(std::uint64_t round) override {
    if (round <= explore_rounds_) {
      boost::random::uniform_int_distribution<std::size_t> d(0, p_.num_arms - 1);
      return d(rng_);
    }
    if (!committed_) {
      std::vector<double> est(p_.num_arms, 0.0);
      for (std::size_t k = 0; k < p_.num_arms; ++k)
        if (counts_[k]) est[k] = sums_[k] / static_cast<double>(counts_[k]);
      commit_arm_ = total_reward_commit_arm(est, p_.rank, p_.num_players);
      committed_ = true;
    }
    return commit_arm_;
  }

  void observe(std::uint64_t round, const Observation& obs) override {
    if (round <= explore_rounds_) {
      sums_[obs.arm] += obs.arm_total;
      ++counts_[obs.arm];
    }
  }

  std::uint64_t explore_rounds() const noexcept { return explore_rounds_; }
  bool committed() const noexcept { return committed_; }
  std::size_t commit_arm() const noexcept { return commit_arm_; }

 private:
  TotalRewardParams p_;
  Rng rng_;
  std::vector<double> sums_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t explore_rounds_ = 0;
  bool committed_ = false;
  std::size_t commit_arm_ = 0;
};

class RandomAgent final : public Agent {
 public:
  RandomAgent(std::size_t num_arms, std::uint64_t seed) : dist_(0, num_arms - 1), rng_(seed) {}

  std::string_view kind() const noexcept override { return "random"; }
  std::size_t act(std::uint64_t) override { return dist_(rng_); }
  void observe(std::uint64_t, const Observation&) override {}

 private:
  boost::random::uniform_int_distribution<std::size_t> dist_;
  Rng rng_;
};

}  // namespace ppa
