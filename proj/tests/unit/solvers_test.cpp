#include <gtest/gtest.h>

#include <numeric>

#include "maxcon/datagen.hpp"
#include "maxcon/solvers.hpp"
#include "maxcon/theory.hpp"
#include "oracles.hpp"

using namespace maxcon;

namespace {

GeneratedData line(std::uint64_t seed, std::size_t n = 15, double fraction = 0.3) {
  GenSpec g;
  g.n = n;
  g.dim = 2;
  g.outlier_fraction = fraction;
  g.seed = seed;
  return gen_hyperplane_data(g);
}

SolverConfig config(std::uint64_t seed) {
  SolverConfig c;
  c.epsilon = 0.1;
  c.q = 0.3;
  c.h = 300;
  c.seed = seed;
  return c;
}

// Independent post-check: the value over the set, via the reference oracle,
// and theta's residuals.
void expect_valid(const LinearDataset& d, const SolveResult& r, double eps) {
  EXPECT_LE(ref::brute_force_chebyshev_value(d, r.inlier_set), eps + 1e-9) << r.method;
  for (auto i : r.inlier_set) EXPECT_LE(residual(d, i, r.theta), eps + 1e-9) << r.method;
}

}  // namespace

TEST(SolverConfig, RangesAreEnforcedByDefault) {
  SolverConfig c;
  EXPECT_NO_THROW(c.validate(15, 2));
  c.q = 0.5;
  EXPECT_THROW(c.validate(15, 2), std::invalid_argument);
  c.q = 0.1;  // below (p+1)/n = 0.2
  EXPECT_THROW(c.validate(15, 2), std::invalid_argument);
  c.q = 0.3;
  c.h = 50;
  EXPECT_THROW(c.validate(15, 2), std::invalid_argument);
  c.enforce_ranges = false;
  EXPECT_NO_THROW(c.validate(15, 2));
}

TEST(SolverConfig, JsonRoundTrip) {
  SolverConfig c;
  c.q = 0.25;
  c.local_expansion = LocalExpansion::off;
  c.estimator_mode = EstimatorMode::unbiased;
  c.max_evaluations = 77;
  const auto back = SolverConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
}

TEST(WiMaxcon, AllInliersNeedNoRemovals) {
  const auto g = line(1, 15, 0.0);
  const auto r = wi_maxcon(g.data, config(1));
  EXPECT_EQ(r.consensus_size(), 15u);
  EXPECT_EQ(r.iterations, 0u);
}

TEST(WiMaxcon, FeasibleAndSoundOnLineData) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const auto g = line(seed, 15 + seed % 8);
    const auto exact = exact_solve(g.data, 0.1);
    const auto r = wi_maxcon(g.data, config(seed));
    expect_valid(g.data, r, 0.1);
    EXPECT_LE(r.consensus_size(), exact.consensus_size());
    EXPECT_LE(r.iterations, g.data.size() - 2);
    EXPECT_EQ(r.removed.size(), r.iterations);
  }
}

TEST(WiMaxcon, UsuallyOptimal) {
  int optimal = 0;
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    const auto g = line(seed);
    optimal += wi_maxcon(g.data, config(seed)).consensus_size() ==
               exact_solve(g.data, 0.1).consensus_size();
  }
  EXPECT_GE(optimal, 17);
}

TEST(WiMaxcon, DeterministicAcrossRunsAndThreads) {
  const auto g = line(7, 20);
  auto c = config(3);
  const auto a = wi_maxcon(g.data, c);
  const auto b = wi_maxcon(g.data, c);
  c.threads = 3;
  const auto t = wi_maxcon(g.data, c);
  EXPECT_EQ(a.inlier_set, b.inlier_set);
  EXPECT_EQ(a.removed, t.removed);
  EXPECT_EQ(a.inlier_set, t.inlier_set);
  EXPECT_EQ(a.oracle_evaluations, t.oracle_evaluations);
}

TEST(WiMaxcon, ExpansionPlacements) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto g = line(seed, 18);
    auto c = config(seed);
    c.local_expansion = LocalExpansion::off;
    const auto off = wi_maxcon(g.data, c);
    c.local_expansion = LocalExpansion::post_loop;
    const auto post = wi_maxcon(g.data, c);
    c.local_expansion = LocalExpansion::per_iteration;
    const auto per = wi_maxcon(g.data, c);
    EXPECT_GE(post.consensus_size(), off.consensus_size());
    EXPECT_TRUE(std::includes(post.inlier_set.begin(), post.inlier_set.end(),
                              off.inlier_set.begin(), off.inlier_set.end()));
    // Expanding an infeasible set never accepts a point.
    EXPECT_EQ(per.inlier_set, off.inlier_set);
    if (off.iterations >= 2) EXPECT_GT(per.oracle_evaluations, off.oracle_evaluations);
    expect_valid(g.data, per, 0.1);
  }
}

TEST(WiMaxcon, EvaluationBudgetStopsEarly) {
  const auto g = line(2, 25, 0.4);
  auto c = config(2);
  c.max_evaluations = 1;
  const auto r = wi_maxcon(g.data, c);
  EXPECT_TRUE(r.budget_exhausted);
  expect_valid(g.data, r, 0.1);
}

TEST(WiMaxcon, RejectsTooFewPoints) {
  Eigen::MatrixXd a(2, 2);
  a << 1, 1, 2, 1;
  const LinearDataset d(a, Eigen::VectorXd::Zero(2));
  EXPECT_THROW(wi_maxcon(d, config(0)), std::invalid_argument);
}

TEST(MbfMaxcon, MatchesWiOnLineData) {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    const auto g = line(seed);
    const auto w = wi_maxcon(g.data, config(seed));
    const auto m = mbf_maxcon(g.data, config(seed));
    expect_valid(g.data, m, 0.1);
    EXPECT_LE(std::abs(static_cast<long>(w.consensus_size()) -
                       static_cast<long>(m.consensus_size())),
              1);
  }
}

TEST(MbfMaxcon, InliersOfCleanStructureHaveZeroHammingInfluence) {
  // One structure of 9 points out of 14, p = 2: below the structure's level
  // an inlier flip never changes the value.
  std::vector<std::size_t> members{0, 1, 2, 4, 5, 7, 8, 10, 13};
  const StructuredFunction f(StructureSpec(14, 2, {Vertex::from_indices(14, members)}));
  std::vector<std::size_t> all(14);
  std::iota(all.begin(), all.end(), std::size_t{0});
  for (std::size_t level = 4; level <= 9; ++level) {
    const auto r = estimate_influence_hamming(f, all, level, 256, level);
    for (std::size_t i = 0; i < 14; ++i) {
      const bool inlier = std::binary_search(members.begin(), members.end(), i);
      if (inlier) EXPECT_EQ(*r.scores[i], 0.0) << "level " << level << " point " << i;
      // Outlier sensitivity is tiny near the structure's own level.
      else if (level <= 6) EXPECT_GT(*r.scores[i], 0.0) << "level " << level << " point " << i;
    }
  }
}

TEST(LocalExpansion, AddsAMissingInlier) {
  const auto g = line(4, 15);
  const auto exact = exact_solve(g.data, 0.1);
  IndexSet partial = exact.inlier_set;
  const std::size_t dropped = partial[3];
  partial.erase(partial.begin() + 3);
  const auto grown = local_expansion(g.data, 0.1, partial);
  EXPECT_TRUE(std::binary_search(grown.begin(), grown.end(), dropped));
  EXPECT_EQ(grown.size(), exact.inlier_set.size());
}

TEST(LocalExpansion, FixedPointAndTrivialCases) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto g = line(seed, 16);
    const IndexSet start(g.inliers.begin(), g.inliers.begin() + 3);
    const auto once = local_expansion(g.data, 0.1, start);
    EXPECT_EQ(local_expansion(g.data, 0.1, once), once);
    EXPECT_LE(ref::brute_force_chebyshev_value(g.data, once), 0.1 + 1e-9);
  }
  const auto clean = line(1, 10, 0.0);
  IndexSet all(10);
  std::iota(all.begin(), all.end(), std::size_t{0});
  EXPECT_EQ(local_expansion(clean.data, 0.1, all), all);
  const auto noisy = line(3, 15);
  EXPECT_THROW(local_expansion(noisy.data, 0.1, all), std::invalid_argument);
}

TEST(Ransac, RequiredIterations) {
  EXPECT_EQ(ransac_required_iterations(0.7, 2, 0.99), 7u);
  EXPECT_EQ(ransac_required_iterations(1.0, 2, 0.99), 1u);
  EXPECT_EQ(ransac_required_iterations(0.0, 2, 0.99, 500), 500u);
}

TEST(Ransac, NoiselessDataInOneHypothesis) {
  GenSpec g;
  g.n = 20;
  g.dim = 3;
  g.inlier_noise = 1e-9;
  g.outlier_noise_min = 1e-9;
  g.seed = 3;
  const auto data = gen_hyperplane_data(g);
  RansacBudget b;
  b.iterations = 1;
  EXPECT_EQ(ransac(data.data, 1e-6, b, 1).consensus_size(), 20u);
  EXPECT_EQ(lo_ransac(data.data, 1e-6, b, 1).consensus_size(), 20u);
}

TEST(Ransac, ConfidenceStopMatchesFormula) {
  // With 30% outliers and p = 2 the standard count is about 7 hypotheses;
  // early poor hypotheses push the adaptive count a little higher.
  double total = 0.0;
  const int runs = 200;
  for (int s = 0; s < runs; ++s) {
    const auto g = line(500 + s, 40);
    RansacBudget b;
    b.confidence = 0.99;
    total += static_cast<double>(ransac(g.data, 0.1, b, s).iterations);
  }
  const double mean = total / runs;
  EXPECT_GE(mean, 7.0);
  EXPECT_LE(mean, 12.0);
}

TEST(Ransac, ResultsAreConsensusOfTheta) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto g = line(s, 30);
    RansacBudget b;
    b.iterations = 50;
    const auto r = ransac(g.data, 0.1, b, s);
    const auto l = lo_ransac(g.data, 0.1, b, s);
    expect_valid(g.data, r, 0.1);
    expect_valid(g.data, l, 0.1);
    EXPECT_GE(l.consensus_size(), r.consensus_size());
  }
}

TEST(Ransac, DepthZeroIsPlainRansac) {
  const auto g = line(9, 30);
  RansacBudget b;
  b.iterations = 40;
  const auto r = ransac(g.data, 0.1, b, 5);
  const auto l = lo_ransac(g.data, 0.1, b, 5, 0);
  EXPECT_EQ(r.inlier_set, l.inlier_set);
  EXPECT_EQ(r.iterations, l.iterations);
  EXPECT_EQ(r.theta, l.theta);
}

TEST(Ransac, DegenerateSamplesAreSkipped) {
  Eigen::MatrixXd a(6, 2);
  a << 1, 1, 1, 1, 1, 1, 2, 1, 3, 1, 4, 1;
  Eigen::VectorXd y(6);
  y << 1, 1, 1, 2, 3, 4;
  RansacBudget b;
  b.iterations = 200;
  const auto r = ransac(LinearDataset(a, y), 0.01, b, 1);
  EXPECT_GT(r.skipped_samples, 0u);
  EXPECT_EQ(r.consensus_size(), 6u);
}

TEST(Ransac, EvaluationBudget) {
  const auto g = line(1, 30);
  RansacBudget b;
  b.max_evaluations = 10;
  EXPECT_LE(lo_ransac(g.data, 0.1, b, 1).oracle_evaluations, 10u);
}

TEST(SolveResult, JsonFields) {
  const auto g = line(1);
  const auto j = wi_maxcon(g.data, config(1)).to_json();
  for (const char* key : {"method", "consensus_size", "inlier_indices", "theta", "iterations",
                          "oracle_evaluations", "runtime_ms", "seed", "config"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["method"], "wi");
}
