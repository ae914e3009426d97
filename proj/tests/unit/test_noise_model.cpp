#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "support.hpp"

using namespace ddtune;

TEST(GaussianNsd, PeakValueAtLarmor) {
  const GaussianNsd nsd{0.005, 0.5, 3.5, 0.006, std::nullopt};
  EXPECT_DOUBLE_EQ(evaluate_nsd(nsd, 3.5), 0.505);
}

TEST(GaussianNsd, ZeroAmplitudeIsFloor) {
  const GaussianNsd nsd{0.005, 0.0, 3.5, 0.006, std::nullopt};
  for (double w : {0.001, 1.0, 3.5, 8.5}) EXPECT_DOUBLE_EQ(evaluate_nsd(nsd, w), 0.005);
}

TEST(GaussianNsd, ValidateRejectsBadParameters) {
  EXPECT_THROW((GaussianNsd{-1.0, 0.5, 3.5, 0.006, std::nullopt}.validate()), DomainError);
  EXPECT_THROW((GaussianNsd{0.0, -0.5, 3.5, 0.006, std::nullopt}.validate()), DomainError);
  EXPECT_THROW((GaussianNsd{0.0, 0.5, 3.5, 0.0, std::nullopt}.validate()), DomainError);
  EXPECT_THROW((GaussianNsd{0.0, 0.5, 0.0, 0.006, std::nullopt}.validate()), DomainError);
}

TEST(GaussianNsd, ScaledMultipliesAmplitudes) {
  const GaussianNsd nsd{0.005, 0.5, 3.5, 0.006, std::nullopt};
  const auto s = nsd.scaled(3.0);
  for (double w : {0.5, 3.5, 3.51, 7.0}) EXPECT_NEAR(s(w), 3.0 * nsd(w), 1e-15);
}

TEST(ThreeComponentNsd, PureOneOverF) {
  const ThreeComponentNsd nsd{0.0, 0.0, 1.0, 1.0, 2.0};
  EXPECT_DOUBLE_EQ(evaluate_nsd(nsd, 4.0), 0.5);
}

TEST(ThreeComponentNsd, NonPositiveOmegaIsDomainError) {
  const ThreeComponentNsd nsd{0.1, 0.2, 1.0, 0.3, 0.4};
  EXPECT_THROW(nsd(0.0), DomainError);
  EXPECT_THROW(nsd(-1.0), DomainError);
}

TEST(ThreeComponentNsd, ValidateRejectsBadParameters) {
  EXPECT_THROW((ThreeComponentNsd{-1, 0, 1, 1, 0}.validate()), DomainError);
  EXPECT_THROW((ThreeComponentNsd{0, 0, 1, 0, 0}.validate()), DomainError);
  EXPECT_THROW((ThreeComponentNsd{0, 0, 1, 1, -1}.validate()), DomainError);
}

TEST(Larmor, FieldConversion) {
  EXPECT_NEAR(larmor_from_field(520.0), 2.0 * std::numbers::pi * 1.0705e-3 * 520.0, 1e-12);
  EXPECT_NEAR(larmor_from_field(520.0), 3.4975, 1e-4);
  EXPECT_NEAR(larmor_from_field(538.0), 3.6186, 1e-4);
  EXPECT_DOUBLE_EQ(larmor_from_field(520.0, 1.0705e-3, false), 1.0705e-3 * 520.0);
}

TEST(Larmor, NonPositiveFieldIsDomainError) {
  EXPECT_THROW(larmor_from_field(0.0), DomainError);
  EXPECT_THROW(larmor_from_field(-5.0), DomainError);
  EXPECT_THROW(larmor_from_field(520.0, 0.0), DomainError);
}

TEST(Sampler, DefaultRangesAndCount) {
  EnvironmentSampler s;
  s.seed = 17;
  const auto envs = sample_environments(s);
  ASSERT_EQ(envs.size(), 1000u);
  for (const auto& e : envs) {
    EXPECT_TRUE(s.ranges.y0.contains(e.y0));
    EXPECT_TRUE(s.ranges.a.contains(e.a));
    EXPECT_TRUE(s.ranges.w1.contains(e.w1));
    ASSERT_TRUE(e.source_b.has_value());
    EXPECT_TRUE(s.ranges.field_gauss.contains(*e.source_b));
    EXPECT_DOUBLE_EQ(e.v_L, larmor_from_field(*e.source_b));
    EXPECT_NO_THROW(e.validate());
  }
}

TEST(Sampler, DegenerateRangesGiveExactValues) {
  EnvironmentSampler s;
  s.count = 1;
  s.ranges = {{0.004, 0.004}, {0.5, 0.5}, {530.0, 530.0}, {0.007, 0.007}};
  const auto envs = sample_environments(s);
  ASSERT_EQ(envs.size(), 1u);
  EXPECT_EQ(envs[0].y0, 0.004);
  EXPECT_EQ(envs[0].a, 0.5);
  EXPECT_EQ(*envs[0].source_b, 530.0);
  EXPECT_EQ(envs[0].w1, 0.007);
}

TEST(Sampler, SameSeedSameOutput) {
  EnvironmentSampler s;
  s.count = 50;
  s.seed = 99;
  const auto a = sample_environments(s);
  const auto b = sample_environments(s);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].y0, b[i].y0);
    EXPECT_EQ(a[i].a, b[i].a);
    EXPECT_EQ(a[i].v_L, b[i].v_L);
    EXPECT_EQ(a[i].w1, b[i].w1);
  }
  s.seed = 100;
  EXPECT_NE(sample_environments(s)[0].y0, a[0].y0);
}

TEST(Sampler, ValidateRejectsBadConfig) {
  EnvironmentSampler s;
  s.count = 0;
  EXPECT_THROW(sample_environments(s), ConfigError);
  s = {};
  s.ranges.a = {0.7, 0.3};
  EXPECT_THROW(sample_environments(s), ConfigError);
  s = {};
  s.gamma = 0.0;
  EXPECT_THROW(sample_environments(s), ConfigError);
  s = {};
  s.ranges.field_gauss = {0.0, 10.0};
  EXPECT_THROW(sample_environments(s), ConfigError);
}

// Properties

TEST(NoiseModelProperty, GaussianAtLeastFloorAndPeaksAtLarmor) {
  testing_support::SequenceGen gen(1);
  for (int trial = 0; trial < 200; ++trial) {
    const GaussianNsd nsd{gen.uniform(0.0, 0.01), gen.uniform(0.0, 1.0), gen.uniform(1.0, 7.0),
                          gen.uniform(0.004, 0.5), std::nullopt};
    const FrequencyGrid grid;
    double best = -1.0;
    double best_w = 0.0;
    for (std::size_t i = 0; i < grid.n_points; ++i) {
      const double w = grid.at(i);
      const double v = nsd(w);
      ASSERT_GE(v, nsd.y0);
      if (v > best) {
        best = v;
        best_w = w;
      }
    }
    EXPECT_LE(std::abs(best_w - nsd.v_L), grid.spacing());
    EXPECT_GE(nsd(nsd.v_L), best);
  }
}

TEST(NoiseModelProperty, ThreeComponentNonNegative) {
  testing_support::SequenceGen gen(2);
  for (int trial = 0; trial < 200; ++trial) {
    const ThreeComponentNsd nsd{gen.uniform(0, 1), gen.uniform(0, 1), gen.uniform(0.1, 8), gen.uniform(0.01, 2),
                                gen.uniform(0, 1)};
    for (double w = 0.001; w < 8.5; w += 0.137) ASSERT_GE(nsd(w), 0.0);
  }
}

TEST(NoiseModelProperty, MarginalMeansNearMidpoints) {
  EnvironmentSampler s;
  s.seed = 2024;
  const auto envs = sample_environments(s);
  double y0 = 0, a = 0, b = 0, w1 = 0;
  for (const auto& e : envs) {
    y0 += e.y0;
    a += e.a;
    b += *e.source_b;
    w1 += e.w1;
  }
  const double n = static_cast<double>(envs.size());
  EXPECT_NEAR(y0 / n, s.ranges.y0.midpoint(), 0.05 * s.ranges.y0.midpoint());
  EXPECT_NEAR(a / n, s.ranges.a.midpoint(), 0.05 * s.ranges.a.midpoint());
  EXPECT_NEAR(b / n, s.ranges.field_gauss.midpoint(), 0.05 * s.ranges.field_gauss.midpoint());
  EXPECT_NEAR(w1 / n, s.ranges.w1.midpoint(), 0.05 * s.ranges.w1.midpoint());
}

TEST(Rng, Uniform01InRangeAndDeterministic) {
  Rng a(5), b(5);
  for (int i = 0; i < 10000; ++i) {
    const double x = a.uniform01();
    ASSERT_GE(x, 0.0);
    ASSERT_LT(x, 1.0);
    ASSERT_EQ(x, b.uniform01());
  }
}

TEST(Rng, FirstEngineOutputMatchesStandard) {
  // mt19937_64 with the default seed yields 9981545732273789042 as its 10000th output.
  Rng r(5489u);
  std::uint64_t x = 0;
  for (int i = 0; i < 10000; ++i) x = r.next();
  EXPECT_EQ(x, 9981545732273789042ULL);
}

TEST(Rng, UniformIndexCoversRangeEvenly) {
  Rng r(8);
  std::array<int, 4> counts{};
  for (int i = 0; i < 40000; ++i) ++counts[r.uniform_index(4)];
  for (int c : counts) EXPECT_NEAR(c, 10000, 4 * std::sqrt(40000 * 0.25 * 0.75));
}

TEST(Rng, NormalMoments) {
  Rng r(9);
  double s = 0, s2 = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    s += x;
    s2 += x * x;
  }
  EXPECT_NEAR(s / n, 0.0, 0.02);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(Rng, DeriveSeedSeparatesStreams) {
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  EXPECT_EQ(derive_seed(7, 3), derive_seed(7, 3));
}
