#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <random>

#include "maxcon/cube.hpp"
#include "oracles.hpp"

using namespace maxcon;

namespace {

// Expectation of the paper-mode estimate, summed over every base vertex.
double paper_expectation(const ref::RandomMonotone& g, std::size_t i, double q, std::size_t h) {
  const std::size_t n = g.n;
  const double qm = -std::sqrt((1 - q) / q);
  const double qp = std::sqrt(q / (1 - q));
  auto mu = [&](std::uint64_t m) {
    const int l = std::popcount(m);
    return std::pow(q, l) * std::pow(1 - q, static_cast<double>(n) - l);
  };
  auto term = [&](std::uint64_t m) {
    const bool bit = (m >> i) & 1u;
    return g(Vertex::from_mask(m, n)) ? (bit ? qm : qp) * mu(m) : 0.0;
  };
  double e = 0.0;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
    e += mu(m) * (term(m) + term(m ^ (std::uint64_t{1} << i)));
  }
  const double half = static_cast<double>(h / 2);
  return -half * e / (static_cast<double>(h) * std::sqrt(q * (1 - q)));
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = i;
  return out;
}

}  // namespace

TEST(BernoulliEstimator, UnbiasedModeConvergesToInfluence) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 4; ++t) {
    const auto g = ref::random_monotone(7, rng);
    const FunctionAdapter f(7, g);
    for (double q : {0.3, 0.5, 0.7}) {
      const auto report = estimate_influence_bernoulli(f, all_indices(7), q, 40000, 17 + t,
                                                       EstimatorMode::unbiased);
      for (std::size_t i = 0; i < 7; ++i) {
        EXPECT_NEAR(*report.scores[i], ref::direct_influence(g, 7, i, q), 0.02)
            << "t=" << t << " q=" << q << " i=" << i;
      }
    }
  }
}

TEST(BernoulliEstimator, PaperModeConvergesToItsExpectation) {
  std::mt19937_64 rng(6);
  const auto g = ref::random_monotone(6, rng);
  const FunctionAdapter f(6, g);
  for (double q : {0.3, 0.6}) {
    const auto report =
        estimate_influence_bernoulli(f, all_indices(6), q, 60000, 3, EstimatorMode::paper);
    for (std::size_t i = 0; i < 6; ++i) {
      const double expected = paper_expectation(g, i, q, 60000);
      EXPECT_NEAR(*report.scores[i], expected, 0.05 * std::abs(expected) + 1e-3);
    }
  }
}

TEST(BernoulliEstimator, PaperAndUnbiasedAgreeOnRankingAtHalf) {
  // At q = 0.5 the paper weights are a constant multiple of the unbiased ones.
  std::mt19937_64 rng(8);
  const auto g = ref::random_monotone(8, rng);
  const FunctionAdapter f(8, g);
  const auto a = estimate_influence_bernoulli(f, all_indices(8), 0.5, 500, 9, EstimatorMode::paper);
  const auto b =
      estimate_influence_bernoulli(f, all_indices(8), 0.5, 500, 9, EstimatorMode::unbiased);
  const double ratio = std::pow(0.5, 8);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(*a.scores[i], *b.scores[i] * ratio, 1e-15);
}

TEST(BernoulliEstimator, OnlyRequestedIndicesAreScored) {
  const FunctionAdapter f(5, [](const Vertex& b) { return b.level() > 2; });
  const std::vector<std::size_t> idx{1, 3};
  const auto r = estimate_influence_bernoulli(f, idx, 0.4, 10, 1);
  EXPECT_FALSE(r.scores[0].has_value());
  EXPECT_TRUE(r.scores[1].has_value());
  EXPECT_TRUE(r.scores[3].has_value());
  EXPECT_EQ(r.to_json()["scores"].size(), 2u);
}

TEST(BernoulliEstimator, IndependentOfThreadCountAndRequestSet) {
  std::mt19937_64 rng(11);
  const FunctionAdapter f(12, ref::random_monotone(12, rng));
  const auto all = all_indices(12);
  const auto one = estimate_influence_bernoulli(f, all, 0.3, 300, 42, EstimatorMode::paper, 1);
  const auto four = estimate_influence_bernoulli(f, all, 0.3, 300, 42, EstimatorMode::paper, 4);
  const std::vector<std::size_t> subset{4, 7};
  const auto part = estimate_influence_bernoulli(f, subset, 0.3, 300, 42, EstimatorMode::paper, 3);
  for (std::size_t i = 0; i < 12; ++i) EXPECT_EQ(*one.scores[i], *four.scores[i]);
  EXPECT_EQ(*part.scores[4], *one.scores[4]);
  EXPECT_EQ(*part.scores[7], *one.scores[7]);
}

TEST(BernoulliEstimator, ShortcutsSkipOracleCalls) {
  std::atomic<int> calls{0};
  const FunctionAdapter f(10, [&](const Vertex& b) {
    ++calls;
    return b.level() > 4;
  });
  const std::vector<std::size_t> idx{0};
  const auto r = estimate_influence_bernoulli(f, idx, 0.5, 200, 7);
  EXPECT_GT(r.shortcut_hits, 0u);
  EXPECT_EQ(static_cast<std::uint64_t>(calls.load()) + r.shortcut_hits, 200u);
}

TEST(BernoulliEstimator, RejectsBadArguments) {
  const FunctionAdapter f(4, [](const Vertex&) { return true; });
  const std::vector<std::size_t> ok{0};
  const std::vector<std::size_t> bad{4};
  EXPECT_THROW(estimate_influence_bernoulli(f, ok, 0.0, 10, 1), std::invalid_argument);
  EXPECT_THROW(estimate_influence_bernoulli(f, ok, 0.5, 1, 1), std::invalid_argument);
  EXPECT_THROW(estimate_influence_bernoulli(f, bad, 0.5, 10, 1), std::out_of_range);
}

TEST(BernoulliEstimator, LargeCubesReportLogScale) {
  const std::size_t n = 2000;
  const FunctionAdapter f(n, [](const Vertex& b) { return b.level() > 700; });
  const std::vector<std::size_t> idx{0, 1};
  const auto r = estimate_influence_bernoulli(f, idx, 0.35, 50, 1);
  EXPECT_LT(r.log_scale, -600.0);
  EXPECT_TRUE(std::isfinite(*r.scores[0]));
  EXPECT_TRUE(r.to_json().contains("log_scale"));
}

TEST(HammingEstimator, ConvergesToSliceSensitivity) {
  std::mt19937_64 rng(13);
  const auto g = ref::random_monotone(9, rng);
  const FunctionAdapter f(9, g);
  const std::size_t k = 5;
  for (std::size_t i = 0; i < 9; ++i) {
    std::size_t sensitive = 0;
    std::size_t total = 0;
    for (std::uint64_t m = 0; m < 512; ++m) {
      if (std::popcount(m) != static_cast<int>(k)) continue;
      ++total;
      const auto b = Vertex::from_mask(m, 9);
      if (g(b) != g(b.flipped(i))) ++sensitive;
    }
    const std::vector<std::size_t> idx{i};
    const auto r = estimate_influence_hamming(f, idx, k, 20000, 4);
    EXPECT_NEAR(*r.scores[i], static_cast<double>(sensitive) / total, 0.015);
  }
}

TEST(HammingEstimator, LevelRange) {
  const FunctionAdapter f(8, [](const Vertex& b) { return b.level() > 3; }, std::size_t{2});
  const std::vector<std::size_t> idx{0};
  EXPECT_THROW(estimate_influence_hamming(f, idx, 2, 10, 1), std::invalid_argument);
  EXPECT_THROW(estimate_influence_hamming(f, idx, 8, 10, 1), std::invalid_argument);
  EXPECT_NO_THROW(estimate_influence_hamming(f, idx, 3, 10, 1));
  EXPECT_EQ(estimate_influence_hamming(f, idx, 3, 10, 1).to_json()["measure"], "hamming");
}

TEST(ExactReport, CarriesEveryIndex) {
  const FunctionAdapter f(4, [](const Vertex& b) { return b.level() > 1; });
  const auto r = exact_influence_report(TruthTable::tabulate(f), 0.5);
  ASSERT_EQ(r.scores.size(), 4u);
  // Sensitive when the other three hold exactly one point: 3 vertices, both halves.
  EXPECT_NEAR(*r.scores[0], 6.0 / 16.0, 1e-15);
}
