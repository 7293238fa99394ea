#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "maxcon/vertex.hpp"

namespace maxcon {

using ModelParams = Eigen::VectorXd;
using IndexSet = std::vector<std::size_t>;

/// n data points a_i (rows of `features`, length p) with responses y_i.
/// Residuals are |a_i . theta - y_i|.
class LinearDataset {
 public:
  LinearDataset(Eigen::MatrixXd features, Eigen::VectorXd responses);

  std::size_t size() const { return static_cast<std::size_t>(features_.rows()); }
  std::size_t dimension() const { return static_cast<std::size_t>(features_.cols()); }

  const Eigen::MatrixXd& features() const { return features_; }
  const Eigen::VectorXd& responses() const { return responses_; }

  /// CSV with header x1,...,xp,y.
  static LinearDataset read_csv(std::istream& in);
  static LinearDataset read_csv_file(const std::string& path);
  void write_csv(std::ostream& out) const;

 private:
  Eigen::MatrixXd features_;
  Eigen::VectorXd responses_;
};

double residual(const LinearDataset& data, std::size_t i, const ModelParams& theta);
/// Residuals of every point.
Eigen::VectorXd residuals(const LinearDataset& data, const ModelParams& theta);

struct MinimaxFit {
  ModelParams theta;
  double value = 0.0;
  IndexSet active_set;
};

/// Thrown when the LP solver fails to converge.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown by exact oracles that refuse an over-budget enumeration.
class BudgetExceeded : public std::runtime_error {
 public:
  BudgetExceeded(const std::string& what, double estimate)
      : std::runtime_error(what), estimate_(estimate) {}
  double estimate() const { return estimate_; }

 private:
  double estimate_;
};

inline double active_tolerance(double value) { return 1e-8 * (1.0 + value); }

/// Chebyshev (L-infinity) fit over `subset`: minimises the maximum absolute
/// residual. Solved as the dual LP with a deterministic simplex.
MinimaxFit minimax_fit(const LinearDataset& data, std::span<const std::size_t> subset);

/// f(S) = 1 iff the minimax value over S exceeds epsilon. Safe for
/// concurrent evaluation; the LP-solve counter is atomic.
class FeasibilityOracle final : public BooleanFunction {
 public:
  FeasibilityOracle(const LinearDataset& data, double epsilon);
  FeasibilityOracle(const FeasibilityOracle& other);

  const LinearDataset& dataset() const { return *data_; }
  double epsilon() const { return epsilon_; }

  std::size_t dimension() const override { return data_->size(); }
  bool operator()(const Vertex& b) const override;
  std::optional<std::size_t> model_dimension() const override { return data_->dimension(); }

  /// Feasibility of an explicit index set (true = feasible).
  bool feasible(std::span<const std::size_t> subset) const;
  /// Same, but always solves the LP (no combinatorial-dimension shortcut).
  bool feasible_by_lp(std::span<const std::size_t> subset) const;

  std::uint64_t evaluations() const { return evaluations_.load(std::memory_order_relaxed); }
  void reset_evaluations() { evaluations_.store(0); }

 private:
  const LinearDataset* data_;
  double epsilon_;
  mutable std::atomic<std::uint64_t> evaluations_{0};
};

/// Boolean function on the sub-cube spanned by `members` of a larger
/// feasibility problem: local bit j selects global point members[j].
class RestrictedOracle final : public BooleanFunction {
 public:
  RestrictedOracle(const FeasibilityOracle& oracle, IndexSet members)
      : oracle_(&oracle), members_(std::move(members)) {}

  std::size_t dimension() const override { return members_.size(); }
  bool operator()(const Vertex& b) const override;
  std::optional<std::size_t> model_dimension() const override {
    return oracle_->model_dimension();
  }
  const IndexSet& members() const { return members_; }

 private:
  const FeasibilityOracle* oracle_;
  IndexSet members_;
};

bool feasibility(const FeasibilityOracle& oracle, const Vertex& subset);

/// Active support of the minimax fit of an infeasible subset.
IndexSet basis(const LinearDataset& data, std::span<const std::size_t> subset, double epsilon);

struct ConsensusSolution {
  IndexSet inliers;
  ModelParams theta;
};

/// Points with residual <= epsilon under theta.
IndexSet consensus_set(const LinearDataset& data, const ModelParams& theta, double epsilon);

/// Ground truth by enumerating every (p+1)-subset and counting the consensus
/// of its minimax model.
ConsensusSolution exact_maxcon_bases(const LinearDataset& data, double epsilon,
                                     double max_subsets = 5e6);

/// Largest feasible vertex by descending-level enumeration of {0,1}^n.
IndexSet exact_maxcon_enumerate(const BooleanFunction& f, std::size_t cap = 22);

}  // namespace maxcon
