#include "frameless/small_oracle.hpp"

#include <gtest/gtest.h>

namespace frameless {
namespace {

TEST(EnumerateExact, SingleUserTwoSlots) {
  // The lone user is resolved by any slot it joins.
  const auto r = enumerate_exact(ProtocolConfig::single(1, 0.5, 2));
  EXPECT_NEAR(r.exact_per, 0.25, 1e-15);
  EXPECT_EQ(r.enumerated_graphs, 4u);
}

TEST(EnumerateExact, TwoUsersOneSlot) {
  for (double beta : {0.0, 0.3, 1.0, 1.7, 2.0}) {
    const double p = beta / 2;
    const auto r = enumerate_exact(ProtocolConfig::single(2, beta, 1));
    EXPECT_NEAR(r.exact_per, 1.0 - p * (1.0 - p), 1e-15) << "beta=" << beta;
  }
}

TEST(EnumerateExact, FrozenFixture) {
  // 1185 / 4096, cross-checked with an exact rational enumeration.
  const auto r = enumerate_exact(ProtocolConfig::single(3, 1.5, 4));
  EXPECT_NEAR(r.exact_per, 1185.0 / 4096.0, 1e-15);
  EXPECT_NEAR(r.exact_throughput, 3.0 * (1.0 - 1185.0 / 4096.0) / 4.0, 1e-15);
  EXPECT_EQ(r.enumerated_graphs, 4096u);
}

TEST(EnumerateExact, ProbabilitiesSumToOne) {
  for (double beta : {0.5, 1.0, 2.5}) {
    const auto r = enumerate_exact(ProtocolConfig::single(3, beta, 5));
    EXPECT_NEAR(r.total_probability, 1.0, 1e-12);
    EXPECT_GE(r.exact_per, 0.0);
    EXPECT_LE(r.exact_per, 1.0);
  }
  const auto staged = enumerate_exact(ProtocolConfig::two_stage(3, 1.0, 2.5, 2, 5));
  EXPECT_NEAR(staged.total_probability, 1.0, 1e-12);
}

TEST(EnumerateExact, TwoStageSlotOrderDoesNotMatter) {
  // Swapping which slots carry which load relabels slots only.
  const auto a = enumerate_exact(ProtocolConfig::two_stage(3, 1.0, 2.5, 2, 4));
  const auto b = enumerate_exact(ProtocolConfig::two_stage(3, 2.5, 1.0, 2, 4));
  EXPECT_NEAR(a.exact_per, b.exact_per, 1e-14);
}

TEST(EnumerateExact, RejectsLargeInstances) {
  EXPECT_THROW(enumerate_exact(ProtocolConfig::single(5, 1.0, 5)), config_error);
  EXPECT_NO_THROW(enumerate_exact(ProtocolConfig::single(4, 1.0, 4)));
}

}  // namespace
}  // namespace frameless
