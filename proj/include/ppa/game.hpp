#pragma once

// Static analysis of the proportional payoff allocation game: N players each
// pick one of K resources; resource k pays mu_k per round, split among its
// choosers in proportion to their weights w_{j,k}.
//
// The C++ API is 0-based (players 0..N-1, resources 0..K-1). File formats and
// CLI output are 1-based; see json_io.hpp.

#include <algorithm>
#include <compare>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ppa/matrix.hpp"

namespace ppa {

// Absolute tolerance for utility comparisons on games with payoffs in (0, 1].
// GameConfig::tolerance() scales it with the largest payoff.
inline constexpr double kTolerance = 1e-12;

// Default guard for exhaustive enumeration: 2^20 profiles.
inline constexpr std::uint64_t kDefaultEnumerationCap = std::uint64_t{1} << 20;

class EnumerationLimitError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// One resource choice per player.
class Profile {
 public:
  using value_type = std::uint32_t;

  Profile() = default;
  explicit Profile(std::vector<value_type> choices) : choices_(std::move(choices)) {}

  static Profile uniform(std::size_t num_players, value_type resource) {
    return Profile(std::vector<value_type>(num_players, resource));
  }

  static Profile from_one_based(std::span<const int> labels) {
    std::vector<value_type> c;
    c.reserve(labels.size());
    for (int l : labels) {
      if (l < 1) throw std::invalid_argument("resource labels are 1-based");
      c.push_back(static_cast<value_type>(l - 1));
    }
    return Profile(std::move(c));
  }
  static Profile from_one_based(std::initializer_list<int> labels) {
    return from_one_based(std::span<const int>(labels.begin(), labels.size()));
  }

  std::size_t size() const noexcept { return choices_.size(); }
  value_type operator[](std::size_t j) const { return choices_[j]; }
  value_type& operator[](std::size_t j) { return choices_[j]; }
  auto begin() const noexcept { return choices_.begin(); }
  auto end() const noexcept { return choices_.end(); }
  const std::vector<value_type>& choices() const noexcept { return choices_; }

  std::vector<int> to_one_based() const {
    std::vector<int> out;
    out.reserve(choices_.size());
    for (auto c : choices_) out.push_back(static_cast<int>(c) + 1);
    return out;
  }

  // "(1,2,3)"
  std::string to_string() const {
    std::string s = "(";
    for (std::size_t j = 0; j < choices_.size(); ++j) {
      if (j) s += ',';
      s += std::to_string(choices_[j] + 1);
    }
    return s + ")";
  }

  auto operator<=>(const Profile&) const = default;
  bool operator==(const Profile&) const = default;

 private:
  std::vector<value_type> choices_;
};

struct ProfileHash {
  std::size_t operator()(const Profile& p) const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (auto c : p) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

enum class PayoffBound {
  kEnforced,  // 0 < mu_k <= 1
  kRelaxed,   // 0 < mu_k; used by scaling tests
};

class GameConfig {
 public:
  GameConfig(std::vector<double> payoffs, Matrix weights,
             PayoffBound bound = PayoffBound::kEnforced)
      : payoffs_(std::move(payoffs)), weights_(std::move(weights)) {
    validate(bound);
    double max_payoff = *std::max_element(payoffs_.begin(), payoffs_.end());
    tolerance_ = kTolerance * std::max(1.0, max_payoff);
  }

  GameConfig(std::vector<double> payoffs, const std::vector<std::vector<double>>& weights,
             PayoffBound bound = PayoffBound::kEnforced)
      : GameConfig(std::move(payoffs), Matrix::from_rows(weights), bound) {}

  std::size_t num_players() const noexcept { return weights_.rows(); }
  std::size_t num_resources() const noexcept { return payoffs_.size(); }
  double payoff(std::size_t k) const { return payoffs_.at(k); }
  std::span<const double> payoffs() const noexcept { return payoffs_; }
  double weight(std::size_t j, std::size_t k) const noexcept { return weights_(j, k); }
  const Matrix& weights() const noexcept { return weights_; }

  // Equality slack for utility comparisons in this game.
  double tolerance() const noexcept { return tolerance_; }

  // True when max_j w_{j,k} == 1 for every resource. Not enforced.
  bool weights_normalized() const {
    for (std::size_t k = 0; k < num_resources(); ++k) {
      double m = 0.0;
      for (std::size_t j = 0; j < num_players(); ++j) m = std::max(m, weights_(j, k));
      if (std::abs(m - 1.0) > kTolerance) return false;
    }
    return true;
  }

  void validate_profile(const Profile& profile) const {
    if (profile.size() != num_players())
      throw std::invalid_argument("profile length " + std::to_string(profile.size()) +
                                  " does not match player count " +
                                  std::to_string(num_players()));
    for (auto k : profile)
      if (k >= num_resources()) throw std::out_of_range("profile names a resource out of range");
  }

  GameConfig with_scaled_payoffs(double factor) const {
    if (!(factor > 0.0)) throw std::invalid_argument("scale factor must be positive");
    std::vector<double> scaled = payoffs_;
    for (auto& m : scaled) m *= factor;
    return GameConfig(std::move(scaled), weights_, PayoffBound::kRelaxed);
  }

  friend bool operator==(const GameConfig& a, const GameConfig& b) {
    return a.payoffs_ == b.payoffs_ && a.weights_ == b.weights_;
  }

 private:
  void validate(PayoffBound bound) const {
    const std::size_t n = weights_.rows();
    const std::size_t k = payoffs_.size();
    if (n < 2 || k < 2) throw std::invalid_argument("game needs at least 2 players and 2 resources");
    if (weights_.cols() != k)
      throw std::invalid_argument("weight matrix must have one column per resource");
    for (double m : payoffs_) {
      if (!(m > 0.0) || !std::isfinite(m)) throw std::invalid_argument("payoffs must be positive");
      if (bound == PayoffBound::kEnforced && m > 1.0)
        throw std::invalid_argument("payoffs must lie in (0, 1]");
    }
    for (std::size_t c = 0; c < k; ++c) {
      bool any_positive = false;
      for (std::size_t r = 0; r < n; ++r) {
        double w = weights_(r, c);
        if (!(w >= 0.0 && w <= 1.0)) throw std::invalid_argument("weights must lie in [0, 1]");
        any_positive = any_positive || w > 0.0;
      }
      if (!any_positive)
        throw std::invalid_argument("resource " + std::to_string(c + 1) +
                                    " has no player with positive weight");
    }
  }

  std::vector<double> payoffs_;
  Matrix weights_;
  double tolerance_ = kTolerance;
};

namespace detail {

// Never exceeds `payoff`; a sole positive-weight chooser gets it exactly.
inline double proportional_share(double payoff, double own_weight, double load) noexcept {
  if (!(load > 0.0)) return 0.0;
  if (own_weight >= load) return payoff;
  return std::min(payoff, payoff * (own_weight / load));
}

inline void check_player(const GameConfig& g, std::size_t player) {
  if (player >= g.num_players()) throw std::out_of_range("player index out of range");
}

inline void check_resource(const GameConfig& g, std::size_t resource) {
  if (resource >= g.num_resources()) throw std::out_of_range("resource index out of range");
}

}  // namespace detail

// Per-resource weight totals for one profile; answers utility and unilateral
// deviation queries in O(1) each.
class ProfileLoads {
 public:
  ProfileLoads(const GameConfig& game, const Profile& profile)
      : game_(&game), profile_(&profile), loads_(game.num_resources(), 0.0) {
    for (std::size_t j = 0; j < profile.size(); ++j) loads_[profile[j]] += game.weight(j, profile[j]);
  }

  double load(std::size_t k) const noexcept { return loads_[k]; }

  double utility(std::size_t j) const noexcept {
    const auto k = (*profile_)[j];
    return detail::proportional_share(game_->payoff(k), game_->weight(j, k), loads_[k]);
  }

  // Utility player j would get by moving alone to resource r.
  double deviation_utility(std::size_t j, std::size_t r) const noexcept {
    if (r == (*profile_)[j]) return utility(j);
    const double w = game_->weight(j, r);
    return detail::proportional_share(game_->payoff(r), w, loads_[r] + w);
  }

  double deviation_gain(std::size_t j, std::size_t r) const noexcept {
    if (r == (*profile_)[j]) return 0.0;
    return deviation_utility(j, r) - utility(j);
  }

  // Largest gain over all players and all resources other than their own.
  double max_deviation_gain() const noexcept {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < profile_->size(); ++j)
      for (std::size_t r = 0; r < game_->num_resources(); ++r)
        if (r != (*profile_)[j]) best = std::max(best, deviation_gain(j, r));
    return best;
  }

 private:
  const GameConfig* game_;
  const Profile* profile_;
  std::vector<double> loads_;
};

inline double utility(const GameConfig& game, const Profile& profile, std::size_t player) {
  game.validate_profile(profile);
  detail::check_player(game, player);
  return ProfileLoads(game, profile).utility(player);
}

inline double welfare(const GameConfig& game, const Profile& profile) {
  game.validate_profile(profile);
  ProfileLoads loads(game, profile);
  double total = 0.0;
  for (std::size_t j = 0; j < profile.size(); ++j) total += loads.utility(j);
  return total;
}

inline double deviation_gain(const GameConfig& game, const Profile& profile, std::size_t player,
                             std::size_t new_resource) {
  game.validate_profile(profile);
  detail::check_player(game, player);
  detail::check_resource(game, new_resource);
  return ProfileLoads(game, profile).deviation_gain(player, new_resource);
}

inline bool is_epsilon_pne(const GameConfig& game, const Profile& profile, double epsilon) {
  if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be non-negative");
  game.validate_profile(profile);
  if (epsilon == std::numeric_limits<double>::max() || std::isinf(epsilon)) return true;
  return ProfileLoads(game, profile).max_deviation_gain() <= epsilon + game.tolerance();
}

inline bool is_pne(const GameConfig& game, const Profile& profile) {
  return is_epsilon_pne(game, profile, 0.0);
}

// K^N, or nullopt on 64-bit overflow.
inline std::optional<std::uint64_t> profile_count(std::size_t num_players, std::size_t num_resources) {
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < num_players; ++i) {
    if (total > std::numeric_limits<std::uint64_t>::max() / num_resources) return std::nullopt;
    total *= num_resources;
  }
  return total;
}

inline void require_enumerable(const GameConfig& game, std::uint64_t cap) {
  auto count = profile_count(game.num_players(), game.num_resources());
  if (!count || *count > cap)
    throw EnumerationLimitError("instance too large for exhaustive enumeration: K^N = " +
                                std::to_string(game.num_resources()) + "^" +
                                std::to_string(game.num_players()) + " exceeds cap " +
                                std::to_string(cap));
}

// Visits every profile in lexicographic order (last player varies fastest).
template <typename Visitor>
void for_each_profile(std::size_t num_players, std::size_t num_resources, Visitor&& visit) {
  Profile p = Profile::uniform(num_players, 0);
  while (true) {
    visit(std::as_const(p));
    std::size_t j = num_players;
    while (j > 0) {
      --j;
      if (++p[j] < num_resources) break;
      p[j] = 0;
      if (j == 0) return;
    }
  }
}

inline std::vector<Profile> enumerate_pnes(const GameConfig& game,
                                           std::uint64_t cap = kDefaultEnumerationCap) {
  require_enumerable(game, cap);
  std::vector<Profile> out;
  for_each_profile(game.num_players(), game.num_resources(), [&](const Profile& p) {
    if (ProfileLoads(game, p).max_deviation_gain() <= game.tolerance()) out.push_back(p);
  });
  return out;
}

struct EfficientPnes {
  std::vector<Profile> profiles;   // empty when the game has no PNE
  std::optional<double> welfare;   // common welfare of `profiles`
};

inline EfficientPnes select_most_efficient(const GameConfig& game, const std::vector<Profile>& pnes) {
  EfficientPnes best;
  for (const auto& p : pnes) {
    const double w = welfare(game, p);
    if (!best.welfare || w > *best.welfare + game.tolerance()) {
      best.profiles.assign(1, p);
      best.welfare = w;
    } else if (std::abs(w - *best.welfare) <= game.tolerance()) {
      best.profiles.push_back(p);
    }
  }
  return best;
}

inline EfficientPnes most_efficient_pnes(const GameConfig& game,
                                         std::uint64_t cap = kDefaultEnumerationCap) {
  return select_most_efficient(game, enumerate_pnes(game, cap));
}

// Identification margins. delta_ne is the smallest loss any PNE player suffers
// by deviating; delta_none is, over non-equilibria, the smallest largest gain.
struct GapReport {
  std::optional<double> delta_ne;
  std::optional<double> delta_none;
  double delta = 0.0;
  bool has_pne = false;
  std::optional<Profile> binding_ne;    // profile attaining delta_ne
  std::optional<Profile> binding_none;  // profile attaining delta_none
};

inline GapReport compute_gaps(const GameConfig& game, std::uint64_t cap = kDefaultEnumerationCap) {
  require_enumerable(game, cap);
  GapReport r;
  for_each_profile(game.num_players(), game.num_resources(), [&](const Profile& p) {
    const double gain = ProfileLoads(game, p).max_deviation_gain();
    if (gain <= game.tolerance()) {
      const double loss = std::max(0.0, -gain);
      if (!r.delta_ne || loss < *r.delta_ne) {
        r.delta_ne = loss;
        r.binding_ne = p;
      }
    } else if (!r.delta_none || gain < *r.delta_none) {
      r.delta_none = gain;
      r.binding_none = p;
    }
  });
  r.has_pne = r.delta_ne.has_value();
  if (r.delta_ne && r.delta_none)
    r.delta = std::min(*r.delta_ne, *r.delta_none);
  else
    r.delta = r.delta_ne ? *r.delta_ne : *r.delta_none;
  return r;
}

struct ImprovementStep {
  std::size_t player = 0;
  std::size_t resource = 0;
  double gain = 0.0;
};

// Lowest-index player with a strictly improving deviation, moved to their
// best resource (lowest index among ties). nullopt at a PNE.
inline std::optional<ImprovementStep> best_improvement_step(const GameConfig& game,
                                                            const Profile& profile) {
  game.validate_profile(profile);
  ProfileLoads loads(game, profile);
  const double tol = game.tolerance();
  for (std::size_t j = 0; j < profile.size(); ++j) {
    std::optional<ImprovementStep> best;
    for (std::size_t r = 0; r < game.num_resources(); ++r) {
      if (r == profile[j]) continue;
      const double g = loads.deviation_gain(j, r);
      if (g > tol && (!best || g > best->gain + tol)) best = ImprovementStep{j, r, g};
    }
    if (best) return best;
  }
  return std::nullopt;
}

enum class PathOutcome { kConverged, kCycleDetected, kStepCapReached };

inline const char* to_string(PathOutcome o) noexcept {
  switch (o) {
    case PathOutcome::kConverged: return "converged";
    case PathOutcome::kCycleDetected: return "cycle";
    case PathOutcome::kStepCapReached: return "step_cap";
  }
  return "unknown";
}

struct PathResult {
  PathOutcome outcome = PathOutcome::kConverged;
  Profile final_profile;
  std::uint64_t steps_taken = 0;
  // Step indices t1 < t2 at which the path visited the same profile.
  std::optional<std::pair<std::uint64_t, std::uint64_t>> cycle_witness;
};

struct NoStepObserver {
  void operator()(std::uint64_t, const Profile&, const ImprovementStep&) const noexcept {}
};

// Follows best_improvement_step from `start`. The step rule is deterministic,
// so revisiting a profile proves the path never terminates. `on_step` sees
// each step together with the profile it is applied to.
template <typename StepObserver = NoStepObserver>
PathResult improvement_path(const GameConfig& game, const Profile& start, std::uint64_t max_steps,
                            StepObserver&& on_step = {}) {
  if (max_steps < 1) throw std::invalid_argument("max_steps must be at least 1");
  game.validate_profile(start);
  std::unordered_map<Profile, std::uint64_t, ProfileHash> visited;
  Profile current = start;
  visited.emplace(current, 0);
  std::uint64_t steps = 0;
  while (true) {
    auto step = best_improvement_step(game, current);
    if (!step) return {PathOutcome::kConverged, current, steps, std::nullopt};
    if (steps == max_steps) return {PathOutcome::kStepCapReached, current, steps, std::nullopt};
    on_step(steps, std::as_const(current), *step);
    current[step->player] = static_cast<Profile::value_type>(step->resource);
    ++steps;
    auto [it, inserted] = visited.emplace(current, steps);
    if (!inserted)
      return {PathOutcome::kCycleDetected, current, steps, std::make_pair(it->second, steps)};
  }
}

struct ScenarioFlags {
  bool longtail = false;                 // payoff ratios exceed n0 / eps0 pairwise
  bool partially_heterogeneous = false;  // each player's weight is the same on every resource
  bool homogeneous_players = false;      // all players share each resource's weight
  bool homogeneous_resources = false;    // all payoffs equal
  std::size_t n0 = 0;                    // most positive-weight players on one resource
  double eps0 = 0.0;                     // smallest positive weight

  bool existence_guaranteed() const noexcept {
    return longtail || partially_heterogeneous || homogeneous_players || homogeneous_resources;
  }
};

inline ScenarioFlags classify_scenario(const GameConfig& game) {
  const std::size_t n = game.num_players();
  const std::size_t k = game.num_resources();
  ScenarioFlags f;
  f.eps0 = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t positive = 0;
    for (std::size_t j = 0; j < n; ++j) {
      const double w = game.weight(j, c);
      if (w > 0.0) {
        ++positive;
        f.eps0 = std::min(f.eps0, w);
      }
    }
    f.n0 = std::max(f.n0, positive);
  }

  const double threshold = static_cast<double>(f.n0) / f.eps0;
  f.longtail = true;
  for (std::size_t a = 0; a < k && f.longtail; ++a)
    for (std::size_t b = a + 1; b < k; ++b) {
      const double ma = game.payoff(a), mb = game.payoff(b);
      if (!(ma / mb > threshold || mb / ma > threshold)) {
        f.longtail = false;
        break;
      }
    }

  f.partially_heterogeneous = true;
  for (std::size_t j = 0; j < n && f.partially_heterogeneous; ++j)
    for (std::size_t c = 1; c < k; ++c)
      if (std::abs(game.weight(j, c) - game.weight(j, 0)) > kTolerance) {
        f.partially_heterogeneous = false;
        break;
      }

  f.homogeneous_players = true;
  for (std::size_t c = 0; c < k && f.homogeneous_players; ++c)
    for (std::size_t j = 1; j < n; ++j)
      if (std::abs(game.weight(j, c) - game.weight(0, c)) > kTolerance) {
        f.homogeneous_players = false;
        break;
      }

  f.homogeneous_resources = true;
  for (std::size_t c = 1; c < k; ++c)
    if (std::abs(game.payoff(c) - game.payoff(0)) > kTolerance) f.homogeneous_resources = false;
  return f;
}

}  // namespace ppa
