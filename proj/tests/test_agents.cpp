#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "oracles.hpp"
#include "ppa/agents.hpp"
#include "ppa/json_io.hpp"

using namespace ppa;

namespace {

LearnerParams small_params(std::size_t rank, std::size_t n, std::size_t k) {
  LearnerParams p;
  p.explore_pulls = 3;
  p.c2 = 50;
  p.c3 = 10;
  p.eta = 1;
  p.epsilon = 0.01;
  p.gamma_range = 0.001;
  p.rank = rank;
  p.horizon = 100000;
  p.num_arms = k;
  p.num_players = n;
  return p;
}

}  // namespace

TEST(Explore, ArmFormula) {
  EXPECT_EQ(explore_arm(1, 1, 5) + 1, 3u);
  for (std::size_t j = 1; j <= 7; ++j) {
    std::vector<int> hits(5, 0);
    for (std::uint64_t t = 1; t <= 5; ++t) ++hits[explore_arm(j, t, 5)];
    EXPECT_EQ(hits, std::vector<int>(5, 1));
  }
  for (std::uint64_t t = 1; t <= 20; ++t) EXPECT_EQ(explore_arm(2, t, 5), explore_arm(7, t, 5));
}

TEST(Explore, FinalizeEstimates) {
  const std::vector<double> sums{1.5, 0.3};
  const auto mu = finalize_estimates(sums, 3);
  EXPECT_DOUBLE_EQ(mu[0], 0.5);
  EXPECT_DOUBLE_EQ(mu[1], 0.1);
  EXPECT_THROW(finalize_estimates(sums, 0), std::invalid_argument);
}

TEST(MoodFunctions, Values) {
  EXPECT_DOUBLE_EQ(mood_f(0.0, 3, 0.0), 1.0 / 9.0);
  EXPECT_NEAR(mood_f(1.0, 3, 0.0), 1.0 / 36.0, 1e-15);
  EXPECT_NEAR(mood_g(0.5, 0.0), 0.2083333333333333, 1e-15);
  for (double gamma : {0.0, 0.01, 0.1})
    for (double u = 0.0; u <= 1.0 + gamma; u += 0.01) {
      EXPECT_GT(mood_f(u, 4, gamma), 0.0);
      EXPECT_LT(mood_f(u, 4, gamma), 1.0 / 8.0);
      EXPECT_GT(mood_g(u, gamma), 0.0);
      EXPECT_LT(mood_g(u, gamma), 0.5);
    }
}

TEST(ChooseArm, Frequencies) {
  Rng rng(1);
  const int draws = 100000;
  int bench = 0;
  std::vector<int> off(5, 0);
  for (int i = 0; i < draws; ++i) {
    const auto a = choose_arm_by_mood({Mood::kContent, 1, 0.3}, 5, 0.003, rng);
    bench += a == 1;
    ++off[a];
  }
  EXPECT_NEAR(bench / double(draws), 0.997, 0.002);

  std::vector<int> counts(4, 0);
  for (int i = 0; i < draws; ++i) ++counts[choose_arm_by_mood({Mood::kDiscontent, 0, 0.0}, 4, 0.003, rng)];
  for (int c : counts) EXPECT_NEAR(c / double(draws), 0.25, 0.01);

  for (int i = 0; i < 1000; ++i) {
    EXPECT_EQ(choose_arm_by_mood({Mood::kHopeful, 1, 0.3}, 5, 0.5, rng), 1u);
    EXPECT_EQ(choose_arm_by_mood({Mood::kWatchful, 3, 0.3}, 5, 0.5, rng), 3u);
  }
  // epsilon = 0.5 on K = 3: each other arm 0.25
  std::vector<int> c3(3, 0);
  for (int i = 0; i < draws; ++i) ++c3[choose_arm_by_mood({Mood::kContent, 2, 0.3}, 3, 0.5, rng)];
  EXPECT_NEAR(c3[0] / double(draws), 0.25, 0.01);
  EXPECT_NEAR(c3[1] / double(draws), 0.25, 0.01);
}

TEST(UpdateMood, DeterministicTransitions) {
  Rng rng(2);
  const MoodContext ctx{3, 0.0, 0.01, kTolerance};
  const MoodState content{Mood::kContent, 2, 0.4};
  EXPECT_EQ(update_mood(content, 2, 0.4, ctx, rng), content);
  EXPECT_EQ(update_mood(content, 2, 0.5, ctx, rng), (MoodState{Mood::kHopeful, 2, 0.4}));
  EXPECT_EQ(update_mood(content, 2, 0.3, ctx, rng), (MoodState{Mood::kWatchful, 2, 0.4}));
  // explored arm without improvement: unchanged
  EXPECT_EQ(update_mood(content, 1, 0.4, ctx, rng), content);
  EXPECT_EQ(update_mood(content, 1, 0.1, ctx, rng), content);

  const MoodState watch{Mood::kWatchful, 2, 0.4};
  EXPECT_EQ(update_mood(watch, 2, 0.5, ctx, rng), (MoodState{Mood::kHopeful, 2, 0.4}));
  EXPECT_EQ(update_mood(watch, 2, 0.4, ctx, rng), (MoodState{Mood::kContent, 2, 0.4}));
  EXPECT_EQ(update_mood(watch, 2, 0.3, ctx, rng), (MoodState{Mood::kDiscontent, 2, 0.4}));

  const MoodState hope{Mood::kHopeful, 2, 0.4};
  EXPECT_EQ(update_mood(hope, 2, 0.5, ctx, rng), (MoodState{Mood::kContent, 2, 0.5}));
  EXPECT_EQ(update_mood(hope, 2, 0.4, ctx, rng), (MoodState{Mood::kContent, 2, 0.4}));
  EXPECT_EQ(update_mood(hope, 2, 0.3, ctx, rng), (MoodState{Mood::kWatchful, 2, 0.4}));

  // equality within tolerance
  EXPECT_EQ(update_mood(content, 2, 0.4 + 1e-14, ctx, rng), content);
}

TEST(UpdateMood, AcceptanceFrequencies) {
  Rng rng(4);
  const int trials = 100000;
  // N = 2, Gamma = 0: F(u) = -u/8 + 1/6 = 0.1 at u = 8/15
  const double u = 8.0 / 15.0;
  ASSERT_NEAR(mood_f(u, 2, 0.0), 0.1, 1e-15);
  const MoodContext ctx{2, 0.0, 0.01, kTolerance};
  int accepted = 0;
  for (int i = 0; i < trials; ++i) {
    const auto s = update_mood({Mood::kDiscontent, 0, 0.0}, 1, u, ctx, rng);
    if (s.mood == Mood::kContent) {
      ++accepted;
      EXPECT_EQ(s.benchmark_arm, 1u);
      EXPECT_EQ(s.benchmark_utility, u);
    }
  }
  EXPECT_NEAR(accepted / double(trials), std::pow(0.01, 0.1), 0.01);

  // content experiment that improves by 0.2: probability eps^G(0.2)
  int switched = 0;
  for (int i = 0; i < trials; ++i)
    switched += update_mood({Mood::kContent, 0, 0.3}, 1, 0.5, ctx, rng).benchmark_arm == 1;
  EXPECT_NEAR(switched / double(trials), std::pow(0.01, mood_g(0.2, 0.0)), 0.01);
}

TEST(PickExploit, TieBreakAndCumulative) {
  const std::vector<std::uint64_t> a{0, 0, 7};
  EXPECT_EQ(pick_exploit_arm(a), 2u);
  const std::vector<std::uint64_t> b{5, 9, 9};
  EXPECT_EQ(pick_exploit_arm(b) + 1, 2u);
  const std::vector<std::uint64_t> c{2 + 0, 0 + 5};
  EXPECT_EQ(pick_exploit_arm(c) + 1, 2u);
}

TEST(Schedule, LearnStartMatchesClosedForm) {
  for (double eta : {1.0, 2.0}) {
    PhaseSchedule s(4, 5, 1000, 200, eta);
    EXPECT_EQ(s.explore_rounds(), 20u);
    for (std::uint64_t sub = 1; sub <= 8; ++sub) {
      std::uint64_t expected = 4 * 5 + 1;
      for (std::uint64_t i = 1; i < sub; ++i)
        expected += 1000 * std::uint64_t(std::ceil(std::pow(double(i), eta))) + 200 * (std::uint64_t{1} << i);
      EXPECT_EQ(s.learn_start(sub), expected);
      const auto seg = s.segment_at(expected);
      EXPECT_EQ(seg.kind, PhaseKind::kLearn);
      EXPECT_EQ(seg.subphase, sub);
      EXPECT_EQ(seg.first, expected);
      const auto ex = s.segment_at(expected + seg.length);
      EXPECT_EQ(ex.kind, PhaseKind::kExploit);
      EXPECT_EQ(ex.length, 200u << sub);
    }
  }
  PhaseSchedule frac(1, 2, 10.5, 3, 1.5);
  EXPECT_EQ(frac.learn_length(2), std::uint64_t(std::ceil(10.5 * std::pow(2.0, 1.5))));
}

TEST(Schedule, FinalExploit) {
  PhaseSchedule s(1, 2, 10, 5, 1);
  // explore 1-2, learn 3-12, exploit 13-22, learn 23-42, exploit 43-62
  EXPECT_FALSE(s.final_exploit(12).has_value());
  EXPECT_EQ(s.final_exploit(13)->first, 13u);
  EXPECT_EQ(s.final_exploit(42)->first, 13u);
  EXPECT_EQ(s.final_exploit(50)->first, 43u);
  EXPECT_EQ(s.final_exploit(50)->subphase, 2u);
}

TEST(Learner, ExplorationEstimatesAndPerturbations) {
  const std::vector<double> mu{0.9, 0.5, 0.2};
  GameConfig g(mu, std::vector<std::vector<double>>{{1, 1, 1}, {1, 1, 1}});
  Environment env(g, RewardModel::constant(mu), 1);
  auto p0 = small_params(1, 2, 3), p1 = small_params(2, 2, 3);
  TrialErrorLearner a(p0, 10), b(p1, 11);
  std::vector<Observation> obs;
  std::map<std::size_t, int> pulls;
  for (std::uint64_t t = 1; t <= 9; ++t) {
    EXPECT_EQ(a.segment().kind, PhaseKind::kExplore);
    Profile joint(std::vector<Profile::value_type>{Profile::value_type(a.act(t)), Profile::value_type(b.act(t))});
    ++pulls[joint[0]];
    env.step(joint, obs);
    a.observe(t, obs[0]);
    b.observe(t, obs[1]);
  }
  EXPECT_EQ(pulls, (std::map<std::size_t, int>{{0, 3}, {1, 3}, {2, 3}}));
  EXPECT_EQ(a.segment().kind, PhaseKind::kLearn);
  ASSERT_TRUE(a.estimates_ready());
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(a.estimates()[k], mu[k], 1e-15);
  for (double gm : a.perturbations()) {
    EXPECT_GE(gm, 0.0);
    EXPECT_LE(gm, 0.001);
  }
  EXPECT_EQ(a.mood(), (MoodState{Mood::kDiscontent, 0, 0.0}));
  EXPECT_THROW(a.act(11), std::logic_error);
}

TEST(Learner, UtilityIsDeterministicPerProfile) {
  const std::vector<double> mu{0.9, 0.5};
  GameConfig g(mu, std::vector<std::vector<double>>{{1.0, 1.0}, {0.5, 0.5}});
  LearnerParams p = small_params(1, 2, 2);
  p.explore_pulls = 1;
  p.gamma_range = 0.0;
  TrialErrorLearner a(p, 3);
  // exploration, with totals equal to the means
  a.act(1);
  a.observe(1, {explore_arm(1, 1, 2), 0.0, mu[explore_arm(1, 1, 2)]});
  a.act(2);
  a.observe(2, {explore_arm(1, 2, 2), 0.0, mu[explore_arm(1, 2, 2)]});
  ASSERT_EQ(a.segment().kind, PhaseKind::kLearn);
  // share 1 / 1.5 of whatever total the arm draws
  for (std::uint64_t t = 3; t < 40; ++t) {
    const auto arm = a.act(t);
    const double x = 0.05 + 0.9 * double(t % 7) / 7.0;
    a.observe(t, {arm, x / 1.5, x});
    EXPECT_NEAR(a.last_utility(), mu[arm] / 1.5, 1e-12);
  }
}

TEST(Learner, ContentCountsAndExploitChoice) {
  Rng rng(9);
  const auto g = load_game(oracle::data_path("worked_example.json"));
  Environment env(g, RewardModel::beta_with_means(g.payoffs(), 10.0), 77);
  std::vector<std::unique_ptr<TrialErrorLearner>> ls;
  for (std::size_t j = 1; j <= 3; ++j) ls.push_back(std::make_unique<TrialErrorLearner>(small_params(j, 3, 3), 100 + j));
  std::vector<Observation> obs;
  Profile joint = Profile::uniform(3, 0);
  for (std::uint64_t t = 1; t <= 3000; ++t) {
    for (std::size_t j = 0; j < 3; ++j) joint[j] = Profile::value_type(ls[j]->act(t));
    env.step(joint, obs);
    for (std::size_t j = 0; j < 3; ++j) {
      const auto before = ls[j]->content_counts();
      const auto seg = ls[j]->segment();
      ls[j]->observe(t, obs[j]);
      const auto& after = ls[j]->content_counts();
      std::uint64_t added = 0;
      for (std::size_t k = 0; k < 3; ++k) added += after[k] - before[k];
      if (seg.kind != PhaseKind::kLearn) {
        EXPECT_EQ(added, 0u);
      } else {
        EXPECT_EQ(added, ls[j]->mood().mood == Mood::kContent ? 1u : 0u);
      }
      if (seg.kind == PhaseKind::kExploit) {
        EXPECT_EQ(joint[j], pick_exploit_arm(ls[j]->content_counts()));
      }
      // new learning subphase: per-subphase counters and status reset
      if (ls[j]->segment().kind == PhaseKind::kLearn && ls[j]->segment().first == t + 1) {
        EXPECT_EQ(ls[j]->subphase_content_counts(), std::vector<std::uint64_t>(3, 0));
        EXPECT_EQ(ls[j]->mood(), (MoodState{Mood::kDiscontent, 0, 0.0}));
      }
      EXPECT_GE(ls[j]->mood().benchmark_utility, 0.0);
      EXPECT_LE(ls[j]->mood().benchmark_utility, 1.0 + 0.001);
    }
  }
}

// Decisions depend only on (params, seed, own observations): replaying the
// observations one learner saw reproduces its actions exactly.
TEST(Learner, ReplayReproducesDecisions) {
  const auto g = load_game(oracle::data_path("worked_example.json"));
  for (int other_kind = 0; other_kind < 2; ++other_kind) {
    Environment env(g, RewardModel::beta_with_means(g.payoffs(), 10.0), 5 + other_kind);
    TrialErrorLearner me(small_params(1, 3, 3), 42);
    std::vector<std::unique_ptr<Agent>> others;
    for (std::size_t j = 2; j <= 3; ++j) {
      if (other_kind == 0)
        others.push_back(std::make_unique<RandomAgent>(3, 900 + j));
      else
        others.push_back(std::make_unique<TotalRewardAgent>(TotalRewardParams{1.0, j, 2000, 3, 3}, 900 + j));
    }
    std::vector<std::size_t> acts;
    std::vector<Observation> seen, obs;
    for (std::uint64_t t = 1; t <= 2000; ++t) {
      Profile joint(std::vector<Profile::value_type>{Profile::value_type(me.act(t)),
                                                     Profile::value_type(others[0]->act(t)),
                                                     Profile::value_type(others[1]->act(t))});
      env.step(joint, obs);
      me.observe(t, obs[0]);
      others[0]->observe(t, obs[1]);
      others[1]->observe(t, obs[2]);
      acts.push_back(joint[0]);
      seen.push_back(obs[0]);
    }
    TrialErrorLearner replay(small_params(1, 3, 3), 42);
    for (std::uint64_t t = 1; t <= 2000; ++t) {
      ASSERT_EQ(replay.act(t), acts[t - 1]) << "round " << t;
      replay.observe(t, seen[t - 1]);
    }
    EXPECT_EQ(replay.mood(), me.mood());
    EXPECT_EQ(replay.content_counts(), me.content_counts());
  }
}

// With epsilon = 0, learners that are Content at an equilibrium never move.
TEST(Learner, ContentAbsorptionAtEquilibrium) {
  const auto g = load_game(oracle::data_path("worked_example.json"));
  Environment env(g, RewardModel::beta_with_means(g.payoffs(), 10.0), 8);
  std::vector<std::unique_ptr<TrialErrorLearner>> ls;
  for (std::size_t j = 1; j <= 3; ++j) {
    auto p = small_params(j, 3, 3);
    p.explore_pulls = 2000;
    p.epsilon = 0.0;
    p.c2 = 5000;
    ls.push_back(std::make_unique<TrialErrorLearner>(p, 50 + j));
  }
  std::vector<Observation> obs;
  Profile joint = Profile::uniform(3, 0);
  std::uint64_t t = 1;
  for (; ls[0]->segment().kind == PhaseKind::kExplore; ++t) {
    for (std::size_t j = 0; j < 3; ++j) joint[j] = Profile::value_type(ls[j]->act(t));
    env.step(joint, obs);
    for (std::size_t j = 0; j < 3; ++j) ls[j]->observe(t, obs[j]);
  }
  const Profile target = Profile::from_one_based({1, 2, 3});
  for (std::size_t j = 0; j < 3; ++j) {
    const std::size_t k = target[j];
    const double share = g.weight(j, k) / g.weight(j, k);  // alone on k
    ls[j]->set_mood({Mood::kContent, k, ls[j]->estimates()[k] * share + ls[j]->perturbations()[k]});
  }
  const std::uint64_t stop = t + 3000;
  for (; t < stop; ++t) {
    for (std::size_t j = 0; j < 3; ++j) joint[j] = Profile::value_type(ls[j]->act(t));
    EXPECT_EQ(joint, target);
    env.step(joint, obs);
    for (std::size_t j = 0; j < 3; ++j) {
      ls[j]->observe(t, obs[j]);
      EXPECT_EQ(ls[j]->mood().mood, Mood::kContent);
      EXPECT_EQ(ls[j]->mood().benchmark_arm, target[j]);
    }
  }
}

TEST(TotalReward, CommitArms) {
  const std::vector<double> est{0.9, 0.8, 0.7, 0.2, 0.1};
  std::set<std::size_t> arms;
  for (std::size_t j = 1; j <= 3; ++j) arms.insert(total_reward_commit_arm(est, j, 3) + 1);
  EXPECT_EQ(arms, (std::set<std::size_t>{1, 2, 3}));

  const std::vector<double> est3{0.9, 0.8, 0.7};
  std::vector<std::size_t> picks;
  for (std::size_t j = 1; j <= 5; ++j) picks.push_back(total_reward_commit_arm(est3, j, 5) + 1);
  EXPECT_EQ(picks, (std::vector<std::size_t>{1, 2, 3, 1, 2}));

  EXPECT_EQ((TotalRewardParams{100.0, 1, 1000000, 3, 3}.explore_rounds()), 1382u);
}

TEST(TotalReward, ExploresThenCommits) {
  const std::vector<double> mu{0.2, 0.9, 0.5};
  GameConfig g(mu, std::vector<std::vector<double>>{{1, 1, 1}, {1, 1, 1}});
  Environment env(g, RewardModel::beta_with_means(mu, 20.0), 1);
  TotalRewardAgent a({20.0, 1, 10000, 3, 2}, 3), b({20.0, 2, 10000, 3, 2}, 4);
  std::vector<Observation> obs;
  for (std::uint64_t t = 1; t <= 1000; ++t) {
    Profile joint(std::vector<Profile::value_type>{Profile::value_type(a.act(t)), Profile::value_type(b.act(t))});
    env.step(joint, obs);
    a.observe(t, obs[0]);
    b.observe(t, obs[1]);
    if (t > a.explore_rounds()) {
      EXPECT_EQ(joint[0], 1u);
      EXPECT_EQ(joint[1], 2u);
    }
  }
  EXPECT_TRUE(a.committed());
  EXPECT_EQ(a.explore_rounds(), std::uint64_t(std::ceil(20.0 * std::log(10000.0))));
}

TEST(RandomAgent, UniformAndReproducible) {
  RandomAgent a(4, 7), b(4, 7);
  std::vector<int> counts(4, 0);
  for (std::uint64_t t = 1; t <= 100000; ++t) {
    const auto x = a.act(t);
    EXPECT_EQ(x, b.act(t));
    ++counts[x];
  }
  for (int c : counts) EXPECT_NEAR(c / 1e5, 0.25, 0.01);
}

TEST(LearnerParams, Validation) {
  auto p = small_params(1, 2, 2);
  p.epsilon = 1.0;
  EXPECT_THROW(TrialErrorLearner(p, 1), std::invalid_argument);
  p = small_params(0, 2, 2);
  EXPECT_THROW(TrialErrorLearner(p, 1), std::invalid_argument);
  p = small_params(1, 2, 2);
  p.explore_pulls = 0;
  EXPECT_THROW(TrialErrorLearner(p, 1), std::invalid_argument);
}
