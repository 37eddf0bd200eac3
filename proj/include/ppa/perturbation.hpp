#pragma once

// The perturbed game built from per-player payoff estimates plus small random
// offsets gamma_{j,k} in [0, Gamma]. Its welfare-maximal equilibrium is unique
// almost surely and, when the estimates and offsets are small relative to the
// game's identification margin, coincides with an efficient equilibrium of the
// true game.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include <boost/random/uniform_real_distribution.hpp>

#include "ppa/game.hpp"
#include "ppa/matrix.hpp"

namespace ppa {

class PerturbedGame {
 public:
  PerturbedGame(GameConfig base, Matrix mu_hat, Matrix gamma, double gamma_range)
      : base_(std::move(base)),
        mu_hat_(std::move(mu_hat)),
        gamma_(std::move(gamma)),
        gamma_range_(gamma_range) {
    const auto n = base_.num_players(), k = base_.num_resources();
    if (mu_hat_.rows() != n || mu_hat_.cols() != k || gamma_.rows() != n || gamma_.cols() != k)
      throw std::invalid_argument("estimate and perturbation matrices must be N x K");
    if (!(gamma_range_ >= 0.0)) throw std::invalid_argument("perturbation range must be non-negative");
    for (double g : gamma_.data())
      if (!(g >= 0.0 && g <= gamma_range_))
        throw std::invalid_argument("perturbation outside [0, Gamma]");
  }

  // Every player estimates the true payoffs exactly; no perturbation.
  static PerturbedGame exact(const GameConfig& base) {
    const auto n = base.num_players(), k = base.num_resources();
    Matrix mu(n, k);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t c = 0; c < k; ++c) mu(j, c) = base.payoff(c);
    return PerturbedGame(base, std::move(mu), Matrix(n, k), 0.0);
  }

  const GameConfig& base() const noexcept { return base_; }
  const Matrix& mu_hat() const noexcept { return mu_hat_; }
  const Matrix& gamma() const noexcept { return gamma_; }
  double gamma_range() const noexcept { return gamma_range_; }

  // Largest |mu_hat_{j,k} - mu_k|.
  double estimate_error() const noexcept {
    double e = 0.0;
    for (std::size_t j = 0; j < mu_hat_.rows(); ++j)
      for (std::size_t k = 0; k < mu_hat_.cols(); ++k)
        e = std::max(e, std::abs(mu_hat_(j, k) - base_.payoff(k)));
    return e;
  }

 private:
  GameConfig base_;
  Matrix mu_hat_;
  Matrix gamma_;
  double gamma_range_;
};

namespace detail {

// Perturbed utilities for every player of one profile. An empty-load resource
// contributes a zero share; the offset is added regardless.
class PerturbedLoads {
 public:
  PerturbedLoads(const PerturbedGame& pg, const Profile& profile)
      : pg_(&pg), profile_(&profile), loads_(pg.base(), profile) {}

  double utility(std::size_t j) const noexcept { return deviation_utility(j, (*profile_)[j]); }

  double deviation_utility(std::size_t j, std::size_t r) const noexcept {
    const auto& g = pg_->base();
    const double w = g.weight(j, r);
    const double load = r == (*profile_)[j] ? loads_.load(r) : loads_.load(r) + w;
    return proportional_share(pg_->mu_hat()(j, r), w, load) + pg_->gamma()(j, r);
  }

  double max_deviation_gain() const noexcept {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < profile_->size(); ++j) {
      const double u = utility(j);
      for (std::size_t r = 0; r < pg_->base().num_resources(); ++r)
        if (r != (*profile_)[j]) best = std::max(best, deviation_utility(j, r) - u);
    }
    return best;
  }

 private:
  const PerturbedGame* pg_;
  const Profile* profile_;
  ProfileLoads loads_;
};

}  // namespace detail

inline double perturbed_utility(const PerturbedGame& pg, const Profile& profile, std::size_t player) {
  pg.base().validate_profile(profile);
  detail::check_player(pg.base(), player);
  return detail::PerturbedLoads(pg, profile).utility(player);
}

inline double perturbed_welfare(const PerturbedGame& pg, const Profile& profile) {
  pg.base().validate_profile(profile);
  detail::PerturbedLoads loads(pg, profile);
  double total = 0.0;
  for (std::size_t j = 0; j < profile.size(); ++j) total += loads.utility(j);
  return total;
}

inline bool is_perturbed_pne(const PerturbedGame& pg, const Profile& profile) {
  pg.base().validate_profile(profile);
  return detail::PerturbedLoads(pg, profile).max_deviation_gain() <= pg.base().tolerance();
}

template <typename Rng>
Matrix sample_gamma(std::size_t num_players, std::size_t num_resources, double gamma_range, Rng& rng) {
  if (!(gamma_range >= 0.0)) throw std::invalid_argument("perturbation range must be non-negative");
  Matrix m(num_players, num_resources);
  if (gamma_range == 0.0) return m;
  boost::random::uniform_real_distribution<double> dist(0.0, gamma_range);
  for (std::size_t j = 0; j < num_players; ++j)
    for (std::size_t k = 0; k < num_resources; ++k) m(j, k) = dist(rng);
  return m;
}

struct PerturbationCertificate {
  double estimate_error = 0.0;  // max_{j,k} |mu_hat - mu|
  double gamma_range = 0.0;
  double delta = 0.0;
  bool cond_delta_ok = false;  // estimate_error < delta / (4K)
  bool cond_gamma_ok = false;  // gamma_range <= delta / (4N)

  bool certified() const noexcept { return cond_delta_ok && cond_gamma_ok; }
};

inline PerturbationCertificate certify(const PerturbedGame& pg, const GapReport& gaps) {
  if (!gaps.has_pne)
    throw std::invalid_argument("game has no pure equilibrium; the transfer guarantee does not apply");
  const auto n = static_cast<double>(pg.base().num_players());
  const auto k = static_cast<double>(pg.base().num_resources());
  PerturbationCertificate c;
  c.estimate_error = pg.estimate_error();
  c.gamma_range = pg.gamma_range();
  c.delta = gaps.delta;
  c.cond_delta_ok = c.estimate_error < gaps.delta / (4.0 * k);
  c.cond_gamma_ok = c.gamma_range <= gaps.delta / (4.0 * n);
  return c;
}

inline std::vector<Profile> enumerate_perturbed_pnes(const PerturbedGame& pg,
                                                     std::uint64_t cap = kDefaultEnumerationCap) {
  const auto& g = pg.base();
  require_enumerable(g, cap);
  std::vector<Profile> out;
  for_each_profile(g.num_players(), g.num_resources(), [&](const Profile& p) {
    if (detail::PerturbedLoads(pg, p).max_deviation_gain() <= g.tolerance()) out.push_back(p);
  });
  return out;
}

// All perturbed equilibria sharing the maximal perturbed welfare. More than one
// entry is a probability-zero tie under continuous offsets.
inline std::vector<Profile> perturbed_efficient_pnes(const PerturbedGame& pg,
                                                     std::uint64_t cap = kDefaultEnumerationCap) {
  std::vector<Profile> best;
  std::optional<double> best_welfare;
  const double tol = pg.base().tolerance();
  for (const auto& p : enumerate_perturbed_pnes(pg, cap)) {
    const double w = perturbed_welfare(pg, p);
    if (!best_welfare || w > *best_welfare + tol) {
      best.assign(1, p);
      best_welfare = w;
    } else if (std::abs(w - *best_welfare) <= tol) {
      best.push_back(p);
    }
  }
  return best;
}

// Welfare-maximal perturbed equilibrium; lexicographically smallest on ties.
inline std::optional<Profile> most_efficient_pne_of_perturbed(
    const PerturbedGame& pg, std::uint64_t cap = kDefaultEnumerationCap) {
  auto best = perturbed_efficient_pnes(pg, cap);
  if (best.empty()) return std::nullopt;
  return best.front();
}

}  // namespace ppa
