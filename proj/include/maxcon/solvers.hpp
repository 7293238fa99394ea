#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "maxcon/cube.hpp"
#include "maxcon/models.hpp"

namespace maxcon {

/// Where the greedy local expansion runs. post_loop expands the final
/// feasible set. per_iteration expands after every removal while the set is
/// still infeasible, which by monotonicity never adds a point.
enum class LocalExpansion { post_loop, per_iteration, off };

std::string to_string(LocalExpansion placement);
LocalExpansion parse_local_expansion(const std::string& text);

struct SolverConfig {
  double epsilon = 0.1;
  double q = 0.3;
  std::size_t h = 300;
  /// MBF samples at level p + 1 + offset.
  std::size_t hamming_level_offset = 1;
  LocalExpansion local_expansion = LocalExpansion::post_loop;
  EstimatorMode estimator_mode = EstimatorMode::paper;
  std::uint64_t seed = 0;
  std::optional<double> time_budget_ms;
  /// Cap on LP solves; the loop stops before starting an iteration past it.
  std::optional<std::uint64_t> max_evaluations;
  /// Reject q outside [(p+1)/n, 0.4] and h outside [100, 500].
  bool enforce_ranges = true;
  unsigned threads = 1;

  void validate(std::size_t n, std::size_t p) const;
  nlohmann::json to_json() const;
  static SolverConfig from_json(const nlohmann::json& j);
};

struct SolveResult {
  std::string method;
  IndexSet inlier_set;
  ModelParams theta;
  std::size_t iterations = 0;
  std::uint64_t oracle_evaluations = 0;
  double runtime_ms = 0.0;
  std::uint64_t seed = 0;
  /// Stopped by a time or evaluation budget; inlier_set is then the
  /// consensus of the last model.
  bool budget_exhausted = false;
  /// Points removed by the influence loop, in order.
  IndexSet removed;
  /// Degenerate minimal samples skipped by the RANSAC family.
  std::size_t skipped_samples = 0;
  nlohmann::json config;

  std::size_t consensus_size() const { return inlier_set.size(); }
  nlohmann::json to_json() const;
};

/// Removes the basis point of highest Bernoulli weighted influence until
/// the surviving set is feasible.
SolveResult wi_maxcon(const LinearDataset& data, const SolverConfig& config);

/// Same loop with influences sampled uniformly on one Hamming level.
SolveResult mbf_maxcon(const LinearDataset& data, const SolverConfig& config);

/// One pass over the points outside `inliers` in index order, keeping each
/// whose addition stays feasible. Throws if `inliers` is infeasible.
IndexSet local_expansion(const LinearDataset& data, double epsilon, IndexSet inliers);

struct RansacBudget {
  std::optional<std::size_t> iterations;
  std::optional<double> time_ms;
  /// Adaptive stop once the best consensus makes this success probability.
  std::optional<double> confidence;
  /// Hypotheses plus local refits.
  std::optional<std::uint64_t> max_evaluations;
  /// Safety cap used whatever else is set.
  std::size_t hard_cap = 1'000'000;

  bool unbounded() const { return !iterations && !time_ms && !confidence && !max_evaluations; }
  nlohmann::json to_json() const;
  static RansacBudget from_json(const nlohmann::json& j);
};

/// Hypotheses needed to draw one all-inlier minimal sample with the given
/// confidence; saturates at `cap`.
std::size_t ransac_required_iterations(double inlier_ratio, std::size_t sample_size,
                                       double confidence, std::size_t cap = 1'000'000);

SolveResult ransac(const LinearDataset& data, double epsilon, const RansacBudget& budget,
                   std::uint64_t seed);

/// RANSAC with a minimax refit on the consensus of each new best hypothesis,
/// repeated up to `depth` times while it improves. depth 0 is plain RANSAC.
SolveResult lo_ransac(const LinearDataset& data, double epsilon, const RansacBudget& budget,
                      std::uint64_t seed, std::size_t depth = 2);

/// exact_maxcon_bases wrapped as a SolveResult.
SolveResult exact_solve(const LinearDataset& data, double epsilon);

}  // namespace maxcon
