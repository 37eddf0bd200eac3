#pragma once

// Stochastic multi-round environment. Every round each arm k draws X_k(t) from
// its reward law; players on the same arm split X_k(t) in proportion to their
// weights. Each player observes its own share and the arm total. Regret and
// the non-efficient-round count are measured with the true expected payoffs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include <boost/random/beta_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include "ppa/game.hpp"
#include "ppa/random.hpp"

namespace ppa {

struct ArmLaw {
  enum class Kind { kBeta, kConstant };
  Kind kind = Kind::kConstant;
  double alpha = 0.0;  // kBeta
  double beta = 0.0;   // kBeta
  double value = 0.0;  // kConstant

  double mean() const noexcept { return kind == Kind::kBeta ? alpha / (alpha + beta) : value; }
};

class RewardModel {
 public:
  RewardModel() = default;
  explicit RewardModel(std::vector<ArmLaw> arms) : arms_(std::move(arms)) {
    for (const auto& a : arms_) {
      if (a.kind == ArmLaw::Kind::kBeta && !(a.alpha > 0.0 && a.beta > 0.0))
        throw std::invalid_argument("beta arm parameters must be positive");
      if (a.kind == ArmLaw::Kind::kConstant && !(a.value > 0.0 && a.value <= 1.0))
        throw std::invalid_argument("constant arm reward must lie in (0, 1]");
    }
  }

  static RewardModel beta(const std::vector<double>& alpha, const std::vector<double>& beta) {
    if (alpha.size() != beta.size()) throw std::invalid_argument("alpha and beta lengths differ");
    std::vector<ArmLaw> arms;
    for (std::size_t k = 0; k < alpha.size(); ++k)
      arms.push_back({ArmLaw::Kind::kBeta, alpha[k], beta[k], 0.0});
    return RewardModel(std::move(arms));
  }

  static RewardModel constant(std::span<const double> values) {
    std::vector<ArmLaw> arms;
    for (double v : values) arms.push_back({ArmLaw::Kind::kConstant, 0.0, 0.0, v});
    return RewardModel(std::move(arms));
  }

  // Beta(mu * c, (1 - mu) * c) per arm; an arm with mu = 1 is constant.
  static RewardModel beta_with_means(std::span<const double> means, double concentration) {
    if (!(concentration > 0.0)) throw std::invalid_argument("concentration must be positive");
    std::vector<ArmLaw> arms;
    for (double m : means) {
      if (m >= 1.0)
        arms.push_back({ArmLaw::Kind::kConstant, 0.0, 0.0, 1.0});
      else
        arms.push_back({ArmLaw::Kind::kBeta, m * concentration, (1.0 - m) * concentration, 0.0});
    }
    return RewardModel(std::move(arms));
  }

  // alpha_k, beta_k ~ Uniform(0, upper) independently per arm.
  template <typename RngT>
  static RewardModel sample_beta_arms(std::size_t num_arms, RngT& rng, double upper = 10.0) {
    boost::random::uniform_real_distribution<double> u(0.0, upper);
    std::vector<double> a(num_arms), b(num_arms);
    for (std::size_t k = 0; k < num_arms; ++k) {
      do a[k] = u(rng); while (a[k] <= 0.0);
      do b[k] = u(rng); while (b[k] <= 0.0);
    }
    return beta(a, b);
  }

  std::size_t num_arms() const noexcept { return arms_.size(); }
  const ArmLaw& arm(std::size_t k) const { return arms_.at(k); }
  const std::vector<ArmLaw>& arms() const noexcept { return arms_; }

  std::vector<double> means() const {
    std::vector<double> m;
    for (const auto& a : arms_) m.push_back(a.mean());
    return m;
  }

  // One draw in (0, 1]; an exact 0 is redrawn.
  template <typename RngT>
  double draw(std::size_t k, RngT& rng) const {
    const auto& a = arms_[k];
    if (a.kind == ArmLaw::Kind::kConstant) return a.value;
    boost::random::beta_distribution<double> d(a.alpha, a.beta);
    while (true) {
      const double x = d(rng);
      if (x > 0.0) return std::min(x, 1.0);
    }
  }

 private:
  std::vector<ArmLaw> arms_;
};

struct Observation {
  std::size_t arm = 0;
  double own_reward = 0.0;  // R_j(t)
  double arm_total = 0.0;   // X_k(t)
};

class Environment {
 public:
  Environment(GameConfig game, RewardModel model, std::uint64_t seed)
      : game_(std::move(game)), model_(std::move(model)), rng_(seed),
        totals_(game_.num_resources()), loads_(game_.num_resources()) {
    if (model_.num_arms() != game_.num_resources())
      throw std::invalid_argument("reward model and game disagree on the number of arms");
    const auto means = model_.means();
    for (std::size_t k = 0; k < means.size(); ++k)
      if (std::abs(means[k] - game_.payoff(k)) > 1e-9)
        throw std::invalid_argument("reward model mean of arm " + std::to_string(k + 1) +
                                    " differs from the game payoff");
  }

  const GameConfig& game() const noexcept { return game_; }
  const RewardModel& model() const noexcept { return model_; }

  // Draws X(t) for every arm and fills one observation per player.
  void step(const Profile& joint, std::vector<Observation>& observations) {
    game_.validate_profile(joint);
    for (std::size_t k = 0; k < totals_.size(); ++k) totals_[k] = model_.draw(k, rng_);
    std::fill(loads_.begin(), loads_.end(), 0.0);
    for (std::size_t j = 0; j < joint.size(); ++j) loads_[joint[j]] += game_.weight(j, joint[j]);
    observations.resize(joint.size());
    for (std::size_t j = 0; j < joint.size(); ++j) {
      const std::size_t k = joint[j];
      observations[j] = {k, detail::proportional_share(totals_[k], game_.weight(j, k), loads_[k]),
                         totals_[k]};
    }
  }

  std::vector<Observation> step(const Profile& joint) {
    std::vector<Observation> obs;
    step(joint, obs);
    return obs;
  }

  // Arm totals drawn by the most recent step.
  const std::vector<double>& last_totals() const noexcept { return totals_; }

 private:
  GameConfig game_;
  RewardModel model_;
  Rng rng_;
  std::vector<double> totals_;
  std::vector<double> loads_;
};

// Best unilateral counterfactual utility minus realized utility, with true
// payoffs. Never negative.
inline double instant_regret(const GameConfig& game, const Profile& joint, std::size_t player) {
  game.validate_profile(joint);
  detail::check_player(game, player);
  ProfileLoads loads(game, joint);
  const double realized = loads.utility(player);
  double best = realized;
  for (std::size_t r = 0; r < game.num_resources(); ++r)
    best = std::max(best, loads.deviation_utility(player, r));
  return best - realized;
}

struct RunMetrics {
  std::vector<double> regret;  // cumulative, per player
  std::uint64_t noneq = 0;     // rounds not at a most efficient PNE
  std::uint64_t rounds = 0;

  double mean_regret() const noexcept {
    if (regret.empty()) return 0.0;
    double s = 0.0;
    for (double r : regret) s += r;
    return s / static_cast<double>(regret.size());
  }

  bool operator==(const RunMetrics&) const = default;
};

using EfficientSet = std::unordered_set<Profile, ProfileHash>;

inline void update_noneq(RunMetrics& metrics, const Profile& joint, const EfficientSet& efficient) {
  if (!efficient.contains(joint)) ++metrics.noneq;
}

// Streaming accumulator for regret and noneq. Per-profile costs are memoized
// when the profile space is small.
class MetricsTracker {
 public:
  MetricsTracker(const GameConfig& game, const std::vector<Profile>& efficient_set)
      : game_(&game), efficient_(efficient_set.begin(), efficient_set.end()) {
    if (efficient_.empty())
      throw std::invalid_argument("no most efficient PNE: non-efficient round count is undefined");
    metrics_.regret.assign(game.num_players(), 0.0);
    auto count = profile_count(game.num_players(), game.num_resources());
    if (count && *count * game.num_players() <= kMemoLimit) memo_.resize(*count);
  }

  // Accounts one round and returns whether it was at an efficient PNE.
  bool record(const Profile& joint) {
    const Cost& c = cost(joint);
    for (std::size_t j = 0; j < c.regret.size(); ++j) metrics_.regret[j] += c.regret[j];
    if (!c.efficient) ++metrics_.noneq;
    ++metrics_.rounds;
    return c.efficient;
  }

  bool is_efficient(const Profile& joint) const { return efficient_.contains(joint); }
  const RunMetrics& metrics() const noexcept { return metrics_; }

 private:
  static constexpr std::uint64_t kMemoLimit = std::uint64_t{1} << 22;

  struct Cost {
    std::vector<double> regret;
    bool efficient = false;
  };

  Cost compute(const Profile& joint) const {
    Cost c;
    for (std::size_t j = 0; j < joint.size(); ++j) c.regret.push_back(instant_regret(*game_, joint, j));
    c.efficient = efficient_.contains(joint);
    return c;
  }

  const Cost& cost(const Profile& joint) {
    if (memo_.empty()) {
      scratch_ = compute(joint);
      return scratch_;
    }
    std::uint64_t index = 0;
    for (auto k : joint) index = index * game_->num_resources() + k;
    auto& slot = memo_[index];
    if (!slot) slot = compute(joint);
    return *slot;
  }

  const GameConfig* game_;
  EfficientSet efficient_;
  RunMetrics metrics_;
  std::vector<std::optional<Cost>> memo_;
  Cost scratch_;
};

}  // namespace ppa
