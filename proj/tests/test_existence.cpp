#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "ppa/existence.hpp"
#include "ppa/json_io.hpp"

using namespace ppa;

TEST(Distributions, NamesRoundTrip) {
  for (const auto& d : DistributionSpec::all_defaults()) EXPECT_EQ(DistributionSpec::from_name(d.name()).kind, d.kind);
  EXPECT_THROW(DistributionSpec::from_name("cauchy"), std::invalid_argument);
}

TEST(Distributions, SupportAndMoments) {
  Rng rng(17);
  const int n = 200000;
  struct Expect {
    DistributionSpec spec;
    double mean;
    double tol;
  };
  // Truncation of N(0.5, 0.1) at [0, 1] is symmetric about 0.5 and removes
  // almost no mass; t(5)+0.5 truncated is symmetric about 0.5; Beta(0.5, 0.5)
  // has mean 0.5 and variance 1/8.
  for (const auto& e : {Expect{DistributionSpec::uniform01(), 0.5, 0.003},
                        Expect{DistributionSpec::trunc_normal(), 0.5, 0.002},
                        Expect{DistributionSpec::trunc_student_t(), 0.5, 0.003},
                        Expect{DistributionSpec::beta(), 0.5, 0.003}}) {
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = sample_value(e.spec, rng);
      ASSERT_GE(x, 0.0);
      ASSERT_LE(x, 1.0);
      sum += x;
      sq += x * x;
    }
    const double mean = sum / n;
    EXPECT_NEAR(mean, e.mean, e.tol) << e.spec.name();
    const double var = sq / n - mean * mean;
    if (e.spec.kind == DistributionKind::kUniform01) {
      EXPECT_NEAR(var, 1.0 / 12.0, 0.002);
    }
    if (e.spec.kind == DistributionKind::kTruncNormal) {
      EXPECT_NEAR(var, 0.01, 0.0005);
    }
    if (e.spec.kind == DistributionKind::kBeta) {
      EXPECT_NEAR(var, 0.125, 0.002);
    }
  }
}

TEST(SampleGame, RangesAndValidity) {
  Rng rng(5);
  for (int t = 0; t < 500; ++t) {
    const auto g = sample_game(DistributionSpec::beta(), {3, 8}, {3, 8}, rng);
    EXPECT_GE(g.num_players(), 3u);
    EXPECT_LE(g.num_players(), 8u);
    EXPECT_GE(g.num_resources(), 3u);
    EXPECT_LE(g.num_resources(), 8u);
    for (double m : g.payoffs()) EXPECT_GT(m, 0.0);
  }
  EXPECT_THROW(sample_game(DistributionSpec::uniform01(), {5, 3}, {3, 3}, rng), std::invalid_argument);
  EXPECT_THROW(sample_game(DistributionSpec::uniform01(), {1, 3}, {3, 3}, rng), std::invalid_argument);
}

TEST(Probe, Verdicts) {
  const auto worked = load_game(oracle::data_path("worked_example.json"));
  const auto ok = existence_probe(worked);
  EXPECT_EQ(ok.verdict, ProbeVerdict::kConverged);
  EXPECT_TRUE(is_epsilon_pne(worked, ok.path.final_profile, 0.0));

  const auto no_pne = load_game(oracle::data_path("no_pne_7x4.json"));
  const auto cyc = existence_probe(no_pne);
  EXPECT_EQ(cyc.verdict, ProbeVerdict::kNoPne);
  EXPECT_EQ(cyc.pne_count, 0u);

  EXPECT_EQ(existence_probe(no_pne, kDefaultProbeSteps, 100).verdict, ProbeVerdict::kCycleUndecided);
  EXPECT_EQ(existence_probe(no_pne, 1).verdict, ProbeVerdict::kStepCapReached);
}

TEST(Probe, SoundnessAgainstEnumeration) {
  Rng rng(9);
  for (int t = 0; t < 300; ++t) {
    const auto g = sample_game(DistributionSpec::uniform01(), {2, 5}, {2, 4}, rng);
    const auto r = existence_probe(g);
    const bool has_pne = !enumerate_pnes(g).empty();
    if (r.verdict == ProbeVerdict::kConverged) {
      EXPECT_TRUE(is_epsilon_pne(g, r.path.final_profile, 0.0));
      EXPECT_TRUE(has_pne);
    }
    if (r.verdict == ProbeVerdict::kNoPne) {
      EXPECT_FALSE(has_pne);
    }
    if (r.verdict == ProbeVerdict::kPneOffPath) {
      EXPECT_TRUE(has_pne);
    }
  }
}

TEST(MonteCarlo, SingleTrialReproducible) {
  MonteCarloConfig cfg;
  cfg.distributions = {DistributionSpec::uniform01()};
  cfg.trials = 1;
  cfg.seed = 123;
  const auto a = run_mc(cfg), b = run_mc(cfg);
  ASSERT_EQ(a.rows.size(), 1u);
  EXPECT_EQ(a.rows[0].trials, 1u);
  EXPECT_EQ(a.rows[0].converged, b.rows[0].converged);
  EXPECT_EQ(a.rows[0].flagged_seeds, b.rows[0].flagged_seeds);
}

TEST(MonteCarlo, ThreadCountDoesNotChangeResults) {
  MonteCarloConfig cfg;
  cfg.trials = 150;
  cfg.seed = 1000;
  cfg.threads = 1;
  const auto a = run_mc(cfg);
  cfg.threads = 3;
  const auto b = run_mc(cfg);
  ASSERT_EQ(a.rows.size(), 4u);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].distribution, b.rows[i].distribution);
    EXPECT_EQ(a.rows[i].converged, b.rows[i].converged);
    EXPECT_EQ(a.rows[i].cycles, b.rows[i].cycles);
    EXPECT_EQ(a.rows[i].flagged_seeds, b.rows[i].flagged_seeds);
  }
  EXPECT_EQ(a.total.trials, 600u);
  EXPECT_EQ(a.total.converged + a.total.cycles + a.total.cap_hits, a.total.trials);
}

TEST(MonteCarlo, TrialMatchesStandaloneProbe) {
  MonteCarloConfig cfg;
  cfg.distributions = {DistributionSpec::trunc_normal(), DistributionSpec::beta()};
  cfg.trials = 10;
  cfg.seed = 55;
  // trial 3 of the second distribution
  Rng rng(mc_trial_seed(cfg, 1, 3));
  EXPECT_EQ(mc_trial_seed(cfg, 1, 3), 55u + 10u + 3u);
  const auto g = sample_game(DistributionSpec::beta(), cfg.n_range, cfg.k_range, rng);
  EXPECT_EQ(run_mc_trial(cfg, 1, 3), existence_probe(g).verdict);
}

TEST(MonteCarlo, DisjointSeedRangesAgree) {
  MonteCarloConfig cfg;
  cfg.distributions = {DistributionSpec::uniform01()};
  cfg.trials = 2000;
  cfg.seed = 0;
  const double a = run_mc(cfg).rows[0].existence_rate();
  cfg.seed = 1'000'000;
  const double b = run_mc(cfg).rows[0].existence_rate();
  EXPECT_LT(std::abs(a - b), 0.005);
  EXPECT_GE(a, 0.99);
}
