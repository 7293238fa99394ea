#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "maxcon/cube.hpp"
#include "maxcon/vertex.hpp"
#include "oracles.hpp"

using namespace maxcon;

TEST(Vertex, StringRoundTripAndLevel) {
  const auto v = Vertex::from_string("00111111");
  EXPECT_EQ(v.size(), 8u);
  EXPECT_EQ(v.level(), 6u);
  EXPECT_FALSE(v.test(0));
  EXPECT_TRUE(v.test(2));
  EXPECT_EQ(v.to_string(), "00111111");
  EXPECT_EQ(v.indices(), (std::vector<std::size_t>{2, 3, 4, 5, 6, 7}));
  EXPECT_THROW(Vertex::from_string("01a"), std::invalid_argument);
}

TEST(Vertex, FlipAndOrder) {
  const auto a = Vertex::from_string("0110");
  EXPECT_EQ(flip(a, 0).to_string(), "1110");
  EXPECT_EQ(a.flipped(1).to_string(), "0010");
  EXPECT_TRUE(Vertex::from_string("0100").precedes(a));
  EXPECT_FALSE(Vertex::from_string("1000").precedes(a));
  EXPECT_EQ((a & Vertex::from_string("1100")).to_string(), "0100");
  EXPECT_THROW((void)a.test(4), std::out_of_range);
}

TEST(Vertex, MaskConversion) {
  const auto v = Vertex::from_mask(0b1011, 5);
  EXPECT_EQ(v.to_string(), "11010");
  EXPECT_EQ(v.to_mask(), 0b1011u);
  EXPECT_EQ(Vertex::full(3).level(), 3u);
}

TEST(Measure, PointValue) {
  EXPECT_NEAR(measure(Vertex::from_string("1100"), 0.3), 0.3 * 0.3 * 0.7 * 0.7, 1e-15);
  EXPECT_THROW(measure(Vertex(2), 1.0), std::invalid_argument);
}

TEST(Measure, SumsToOne) {
  for (double q : {0.05, 0.3, 0.5, 0.77}) {
    for (std::size_t n : {1u, 5u, 12u}) {
      double total = 0.0;
      for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
        total += measure(Vertex::from_mask(m, n), q);
      }
      EXPECT_NEAR(total, 1.0, 1e-12) << "q=" << q << " n=" << n;
    }
  }
}

TEST(Measure, ParityConstants) {
  for (double q : {0.1, 0.5, 0.9}) {
    const BernoulliMeasure mu(q);
    EXPECT_NEAR(mu.q_minus() * mu.q_plus(), -1.0, 1e-14);
    // chi_i has mean zero and unit variance under mu_q.
    EXPECT_NEAR(q * mu.q_minus() + (1 - q) * mu.q_plus(), 0.0, 1e-14);
    EXPECT_NEAR(q * mu.q_minus() * mu.q_minus() + (1 - q) * mu.q_plus() * mu.q_plus(), 1.0,
                1e-14);
  }
}

TEST(Sampling, LevelSamplerHitsTheSlice) {
  Rng rng(9);
  for (int t = 0; t < 100; ++t) EXPECT_EQ(sample_level(10, 4, rng).level(), 4u);
  EXPECT_THROW(sample_level(3, 4, rng), std::invalid_argument);
}

TEST(Sampling, BernoulliFrequency) {
  Rng rng(10);
  std::size_t ones = 0;
  for (int t = 0; t < 4000; ++t) ones += sample_bernoulli(10, 0.3, rng).level();
  EXPECT_NEAR(static_cast<double>(ones) / 40000.0, 0.3, 0.01);
}

TEST(TruthTable, ExactInfluenceMatchesDirectSum) {
  std::mt19937_64 rng(77);
  for (int t = 0; t < 30; ++t) {
    const std::size_t n = 3 + t % 8;
    const auto g = ref::random_monotone(n, rng);
    const FunctionAdapter f(n, g);
    const auto table = TruthTable::tabulate(f);
    EXPECT_TRUE(table.is_monotone());
    for (double q : {0.2, 0.5, 0.8}) {
      const auto inf = exact_weighted_influences(table, q);
      for (std::size_t i = 0; i < n; ++i) {
        EXPECT_NEAR(inf[i], ref::direct_influence(g, n, i, q), 1e-13);
      }
    }
  }
}

TEST(TruthTable, DetectsNonMonotone) {
  const FunctionAdapter parity(3, [](const Vertex& b) { return b.level() % 2 == 1; });
  EXPECT_FALSE(TruthTable::tabulate(parity).is_monotone());
}

TEST(TruthTable, EnforcesCap) {
  const FunctionAdapter f(23, [](const Vertex&) { return false; });
  EXPECT_THROW(TruthTable::tabulate(f), std::invalid_argument);
}

TEST(TruthTable, ParallelTabulationIsIdentical) {
  std::mt19937_64 rng(1);
  const auto g = ref::random_monotone(14, rng);
  const FunctionAdapter f(14, g);
  const auto a = TruthTable::tabulate(f, 1);
  const auto b = TruthTable::tabulate(f, 4);
  for (std::uint64_t m = 0; m < (1u << 14); ++m) ASSERT_EQ(a.at(m), b.at(m));
}

TEST(FourierIdentity, InfluenceIsScaledFirstOrderCoefficient) {
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 40; ++t) {
    const std::size_t n = 2 + t % 11;
    const FunctionAdapter f(n, ref::random_monotone(n, rng));
    const auto table = TruthTable::tabulate(f);
    for (double q : {0.1, 0.3, 0.5, 0.7}) {
      const auto inf = exact_weighted_influences(table, q);
      const auto fourier = exact_fourier_first_order_all(table, q);
      for (std::size_t i = 0; i < n; ++i) {
        EXPECT_NEAR(inf[i], -fourier[i] / std::sqrt(q * (1 - q)), 1e-12);
      }
    }
  }
}

TEST(FourierIdentity, FailsForNonMonotone) {
  // The identity needs monotonicity; parity on 2 bits breaks it.
  const FunctionAdapter parity(2, [](const Vertex& b) { return b.level() == 1; });
  const double inf = exact_weighted_influence(parity, 0, 0.5);
  const double fourier = exact_fourier_first_order(parity, 0, 0.5);
  EXPECT_GT(std::abs(inf + fourier / 0.5), 0.5);
}
