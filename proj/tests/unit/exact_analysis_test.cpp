#include "frameless/exact_analysis.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "frameless/small_oracle.hpp"
#include "oracles.hpp"

namespace frameless {
namespace {

using testing::StateKey;

std::map<StateKey, double> as_map(const StateDistribution& dist) {
  std::map<StateKey, double> out;
  dist.for_each([&](DecoderState s, double v) { out[{s.c, s.r}] = v; });
  return out;
}

void expect_same_law(const std::map<StateKey, double>& got, const std::map<StateKey, double>& want, double tol) {
  for (const auto& [key, v] : want) {
    const auto it = got.find(key);
    const double g = it == got.end() ? 0.0 : it->second;
    EXPECT_NEAR(g, v, tol) << "state (" << key.first << ", " << key.second << ")";
  }
  for (const auto& [key, v] : got) {
    if (!want.contains(key)) EXPECT_NEAR(v, 0.0, tol) << "unexpected state (" << key.first << ", " << key.second << ")";
  }
}

// Theorem-style joint transition summed over every feasible (a, b) pair.
std::map<StateKey, double> direct_transition(const std::map<StateKey, double>& from, int u, double q) {
  std::map<StateKey, double> out;
  for (const auto& [key, mass] : from) {
    const auto [c, r] = key;
    if (r == 0) continue;
    for (int b = 0; b <= c; ++b) {
      for (int a = 1; a <= r; ++a) {
        const double w = testing::exact_choose(c, b) * std::pow(q, b) * std::pow(1.0 - q, c - b) *
                         testing::exact_choose(r - 1, a - 1) * std::pow(1.0 / u, a - 1) *
                         std::pow(1.0 - 1.0 / u, r - a);
        out[{c - b, r - a + b}] += mass * w;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// initial_state

TEST(InitialState, SingleSlotThreeOutcomes) {
  const auto omega = binomial_omega(5, 2.0);
  const auto dist = initial_state(omega, 1);
  EXPECT_NEAR(dist.at(1, 0), 1.0 - omega[0] - omega[1], 1e-15);
  EXPECT_NEAR(dist.at(0, 1), omega[1], 1e-15);
  EXPECT_NEAR(dist.at(0, 0), omega[0], 1e-15);
  EXPECT_EQ(dist.u(), 5);
}

TEST(InitialState, AllSlotsEmpty) {
  const auto dist = initial_state(binomial_omega(3, 0.0), 2);
  EXPECT_EQ(dist.at(0, 0), 1.0);
  EXPECT_EQ(dist.live_states(), 1u);
}

TEST(InitialState, MatchesLabelledEnumeration) {
  const auto omega = binomial_omega(3, 1.5);
  const auto want = testing::enumerate_initial_state(omega[0], omega[1], 1.0 - omega[0] - omega[1], 3);
  expect_same_law(as_map(initial_state(omega, 3)), want, 1e-15);
}

TEST(InitialState, LargerSlotCountsConserveMass) {
  const auto omega = binomial_omega(100, 2.5);
  const auto dist = initial_state(omega, 250);
  EXPECT_NEAR(dist.accounted_mass(), 1.0, 1e-12);
  EXPECT_LT(dist.pruned_mass(), 1e-12);
  EXPECT_NEAR(dist.failure_mass(), 0.0, 0.0);
}

// ---------------------------------------------------------------------------
// q_u

TEST(CloudDeparture, FirstStepClosedForm) {
  for (int n : {3, 10, 100}) {
    const auto omega = binomial_omega(n, 2.5);
    const double want = (2.0 * omega[2] / n) / (1.0 - omega[0] - omega[1]);
    EXPECT_NEAR(q_u(omega, n), want, 1e-14 * std::max(1.0, want)) << "n=" << n;
  }
}

TEST(CloudDeparture, MatchesLiteralRatioOfSums) {
  for (int n : {3, 4, 10, 40}) {
    for (double beta : {0.5, 1.5, 2.5}) {
      const auto omega = binomial_omega(n, beta);
      const std::vector<double> w(omega.values().begin(), omega.values().end());
      for (int u = 2; u <= n; ++u) {
        const double want = testing::q_u_literal(w, n, u);
        EXPECT_NEAR(q_u(omega, u), want, 1e-10 * std::max(want, 1e-3)) << "n=" << n << " u=" << u;
      }
    }
  }
}

TEST(CloudDeparture, AlwaysAProbability) {
  for (double beta : {0.3, 2.5, 8.0}) {
    const auto omega = binomial_omega(200, beta);
    for (int u = 2; u <= 200; ++u) {
      const double q = q_u(omega, u);
      EXPECT_GE(q, 0.0);
      EXPECT_LE(q, 1.0);
    }
    EXPECT_EQ(q_u(omega, 2), 1.0);
  }
}

TEST(CloudDeparture, NoCloudIsDegenerate) {
  const DegreeDistribution omega(4, {0.4, 0.6, 0.0, 0.0, 0.0});
  EXPECT_THROW(q_u(omega, 3), degenerate_distribution_error);
  EXPECT_THROW(q_u(binomial_omega(4, 2.0), 1), degenerate_distribution_error);
}

TEST(CloudDeparture, AgreesWithSlotSampling) {
  const auto omega = binomial_omega(4, 2.0);
  const std::vector<double> w(omega.values().begin(), omega.values().end());
  const double sampled = testing::sample_q_u(w, 4, 3, 1'000'000, 2024);
  // About 6.9e5 cloud samples; 4 sigma of a proportion near 0.46.
  EXPECT_NEAR(q_u(omega, 3), sampled, 4.0 * std::sqrt(0.25 / 6.9e5));
}

TEST(CloudDeparture, RejectsStageOutOfRange) {
  const auto omega = binomial_omega(4, 2.0);
  EXPECT_THROW(q_u(omega, 0), config_error);
  EXPECT_THROW(q_u(omega, 5), config_error);
}

// ---------------------------------------------------------------------------
// transition

TEST(Transition, LoneRippleSlotEmpties) {
  for (int n : {1, 3, 7}) {
    StateDistribution dist = initial_state(DegreeDistribution(n, [&] {
                                             std::vector<double> w(static_cast<std::size_t>(n) + 1, 0.0);
                                             w[1] = 1.0;
                                             return w;
                                           }()),
                                           1);
    ASSERT_EQ(dist.at(0, 1), 1.0);
    const auto next = transition(dist, 0.37);
    EXPECT_EQ(next.u(), n - 1);
    EXPECT_NEAR(next.at(0, 0), 1.0, 1e-15);
  }
}

TEST(Transition, OneCloudOneRippleLastUser) {
  // u = 1 with a (1, 1) source: the ripple slot always leaves, the cloud slot
  // enters with probability q.
  const double q = 0.3;
  const auto want = direct_transition({{{1, 1}, 1.0}}, 1, q);
  EXPECT_NEAR(want.at({0, 1}), q, 1e-15);
  EXPECT_NEAR(want.at({1, 0}), 1.0 - q, 1e-15);
  EXPECT_NEAR(transition_probability({1, 1}, {1, 1, q}, 1), q, 1e-15);
  EXPECT_NEAR(transition_probability({1, 1}, {1, 0, q}, 1), 1.0 - q, 1e-15);
}

TEST(Transition, InfeasibleCountsHaveZeroProbability) {
  EXPECT_EQ(transition_probability({3, 0}, {1, 0, 0.5}, 4), 0.0);
  EXPECT_EQ(transition_probability({3, 2}, {0, 0, 0.5}, 4), 0.0);
  EXPECT_EQ(transition_probability({3, 2}, {3, 0, 0.5}, 4), 0.0);
  EXPECT_EQ(transition_probability({3, 2}, {1, 4, 0.5}, 4), 0.0);
}

TEST(Transition, TwoPassMatchesJointTransition) {
  const auto omega = binomial_omega(30, 2.5);
  StateDistribution dist = initial_state(omega, 40, 0.0);
  for (int step = 0; step < 6; ++step) {
    const int u = dist.u();
    const double q = q_u(omega, u);
    const auto from = as_map(dist);
    auto want = direct_transition(from, u, q);
    dist = transition(dist, q, 0.0);
    expect_same_law(as_map(dist), want, 1e-14);
  }
}

TEST(Transition, ConservesMassBeforePruning) {
  const auto omega = binomial_omega(60, 2.7);
  StateDistribution dist = initial_state(omega, 80, 0.0);
  TransitionWorkspace ws;
  while (dist.u() > 0) {
    const double q = dist.needs_cloud_departure() ? q_u(omega, dist.u()) : 0.0;
    const double before = dist.accounted_mass();
    dist.advance(q, 0.0, ws);
    EXPECT_NEAR(dist.accounted_mass(), before, 1e-12);
  }
}

TEST(Transition, SupportNeverGrows) {
  const auto omega = binomial_omega(20, 2.5);
  StateDistribution dist = initial_state(omega, 30, 0.0);
  int largest = 30;
  while (dist.u() > 0) {
    const double q = dist.needs_cloud_departure() ? q_u(omega, dist.u()) : 0.0;
    int before = 0;
    dist.for_each([&](DecoderState s, double) { before = std::max(before, s.c + s.r); });
    EXPECT_LE(before, largest);
    dist = transition(dist, q, 0.0);
    int after = 0;
    dist.for_each([&](DecoderState s, double) { after = std::max(after, s.c + s.r); });
    // One ripple slot always leaves.
    EXPECT_LT(after, std::max(before, 1));
    largest = before;
  }
}

TEST(Transition, StageLawMatchesExhaustiveDecoding) {
  const int n = 3, m = 3;
  const double p = 1.0 / 3.0;
  const auto law = testing::enumerate_decoder_law(n, m, p);
  const auto omega = binomial_omega(n, 1.0);
  StateDistribution dist = initial_state(omega, m, 0.0);
  expect_same_law(as_map(dist), law.live[3], 1e-14);
  while (dist.u() > 0) {
    const int u = dist.u();
    const double q = dist.needs_cloud_departure() ? q_u(omega, u) : 0.0;
    dist = transition(dist, q, 0.0);
    EXPECT_NEAR(dist.failure_mass_by_u()[static_cast<std::size_t>(u)], law.failure[static_cast<std::size_t>(u)], 1e-14);
    expect_same_law(as_map(dist), law.live[static_cast<std::size_t>(u - 1)], 1e-14);
  }
}

TEST(Transition, RejectsFinishedDecoder) {
  StateDistribution dist = initial_state(binomial_omega(1, 0.5), 2);
  dist = transition(dist, 0.0);
  EXPECT_EQ(dist.u(), 0);
  EXPECT_THROW(transition(dist, 0.0), config_error);
  EXPECT_THROW(transition(initial_state(binomial_omega(2, 1.0), 2), 1.5), config_error);
}

// ---------------------------------------------------------------------------
// analyze

TEST(Analyze, SingleUser) {
  const auto r = analyze(ProtocolConfig::single(1, 0.4, 1));
  EXPECT_NEAR(r.per, 0.6, 1e-15);
  EXPECT_NEAR(r.throughput, 0.4, 1e-15);
  const auto five = analyze(ProtocolConfig::single(1, 0.1, 5));
  EXPECT_NEAR(five.per, std::pow(0.9, 5), 1e-15);
}

TEST(Analyze, SilentUsers) {
  for (int n : {1, 5, 40}) {
    for (int m : {1, 7, 60}) {
      const auto r = analyze(ProtocolConfig::single(n, 0.0, m));
      EXPECT_EQ(r.per, 1.0);
      EXPECT_EQ(r.throughput, 0.0);
    }
  }
}

TEST(Analyze, EveryoneAlwaysTransmits) {
  const auto r = analyze(ProtocolConfig::single(4, 4.0, 6));
  EXPECT_NEAR(r.per, 1.0, 1e-15);
  EXPECT_NEAR(r.failure_profile[4], 1.0, 1e-15);
}

TEST(Analyze, MatchesExhaustiveOracle) {
  for (int n = 1; n <= 3; ++n) {
    for (int m = 1; m <= 5; ++m) {
      for (double beta : {0.5, 1.0, 1.5, 2.5}) {
        if (beta > n) continue;
        const auto cfg = ProtocolConfig::single(n, beta, m);
        const auto dp = analyze(cfg);
        const auto oracle = enumerate_exact(cfg);
        EXPECT_NEAR(dp.per, oracle.exact_per, 1e-12) << cfg.describe();
        EXPECT_NEAR(dp.throughput, oracle.exact_throughput, 1e-12) << cfg.describe();
      }
    }
  }
}

TEST(Analyze, FrozenOracleFixture) {
  // 1185 / 4096 from exact rational enumeration.
  EXPECT_NEAR(analyze(ProtocolConfig::single(3, 1.5, 4)).per, 1185.0 / 4096.0, 1e-12);
}

TEST(Analyze, RegressionAtHundredUsers) {
  const auto r = analyze(ProtocolConfig::single(100, 2.5, 140));
  EXPECT_NEAR(r.per, 0.0440616422767, 1e-11);
  EXPECT_NEAR(r.throughput, 0.682813112659, 1e-11);
  EXPECT_LT(r.pruned_mass, 1e-9);
  EXPECT_LT(r.conservation_defect, 1e-9);
  EXPECT_FALSE(r.approximate);
}

TEST(Analyze, ThroughputIdentity) {
  for (int m : {40, 55, 90}) {
    const auto r = analyze(ProtocolConfig::single(50, 2.47, m));
    EXPECT_NEAR(r.throughput * m, 50 * (1.0 - r.per), 1e-12);
  }
}

TEST(Analyze, EqualStageLoadsMatchSingleStage) {
  const auto single = analyze(ProtocolConfig::single(50, 2.8, 90));
  const auto staged = analyze(ProtocolConfig::two_stage(50, 2.8, 2.8, 40, 90));
  EXPECT_NEAR(staged.per, single.per, 1e-12);
  EXPECT_NEAR(staged.throughput, single.throughput, 1e-12);
  EXPECT_TRUE(staged.approximate);
}

TEST(Analyze, TwoStageBeforeSwitchIsExact) {
  const auto staged = analyze(ProtocolConfig::two_stage(50, 2.47, 4.05, 66, 60));
  EXPECT_FALSE(staged.approximate);
  EXPECT_EQ(staged.per, analyze(ProtocolConfig::single(50, 2.47, 60)).per);
}

TEST(Analyze, PoissonModeIsCloseAndFlagged) {
  AnalysisOptions poisson;
  poisson.omega_mode = OmegaMode::kPoisson;
  const auto approx = analyze(ProtocolConfig::single(100, 2.5, 140), poisson);
  const auto exact = analyze(ProtocolConfig::single(100, 2.5, 140));
  EXPECT_TRUE(approx.approximate);
  EXPECT_NEAR(approx.throughput, exact.throughput, 0.02);
}

TEST(Analyze, MassLedgerBalances) {
  const auto r = analyze(ProtocolConfig::single(80, 2.6, 110));
  double absorbed = 0.0;
  for (double v : r.failure_profile) absorbed += v;
  EXPECT_NEAR(absorbed + r.success_mass + r.pruned_mass, 1.0, 1e-9);
  EXPECT_EQ(r.failure_profile[0], 0.0);
  EXPECT_EQ(r.omega.size(), 81u);
}

TEST(Analyze, PruningIsPessimistic) {
  AnalysisOptions coarse;
  coarse.prune_threshold = 1e-8;
  const auto cfg = ProtocolConfig::single(60, 2.5, 120);
  const auto pruned = analyze(cfg, coarse);
  const auto fine = analyze(cfg);
  EXPECT_GT(pruned.pruned_mass, fine.pruned_mass);
  EXPECT_GE(pruned.per, fine.per - 1e-12);
  EXPECT_LE(pruned.per - fine.per, pruned.pruned_mass + 1e-12);
}

}  // namespace
}  // namespace frameless
