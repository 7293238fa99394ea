// Chebyshev (minimax) regression through its LP dual.
//
// Primal:  min t  s.t.  -t <= a_i . theta - y_i <= t  for i in S.
// Dual:    max sum_i y_i (u_i - v_i)
//          s.t. sum_i a_i (u_i - v_i) = 0,  sum_i (u_i + v_i) = 1,  u, v >= 0.
//
// The dual has only p + 1 equality rows, so a dense tableau stays tiny even
// for hundreds of points. theta is recovered from the simplex multipliers of
// the final basis, read off the artificial columns.

#include "chebyshev.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "maxcon/models.hpp"

namespace maxcon::detail {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-11;
constexpr double kRatioTieTol = 1e-12;
constexpr double kPhaseOneTol = 1e-7;
constexpr int kDegenerateBeforeBland = 50;

class Tableau {
 public:
  Tableau(Eigen::Index rows, Eigen::Index cols)
      : t_(Eigen::MatrixXd::Zero(rows + 1, cols + 1)), basis_(rows), rows_(rows), cols_(cols) {}

  double& at(Eigen::Index r, Eigen::Index c) { return t_(r, c); }
  double rhs(Eigen::Index r) const { return t_(r, cols_); }
  double cost(Eigen::Index c) const { return t_(rows_, c); }
  /// -z for the current objective row.
  double objective() const { return t_(rows_, cols_); }
  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }
  std::vector<Eigen::Index>& basis() { return basis_; }

  void pivot(Eigen::Index r, Eigen::Index c) {
    t_.row(r) /= t_(r, c);
    for (Eigen::Index k = 0; k <= rows_; ++k) {
      if (k == r) continue;
      const double factor = t_(k, c);
      if (factor != 0.0) t_.row(k) -= factor * t_.row(r);
    }
    basis_[r] = c;
  }

  void set_objective(const Eigen::VectorXd& costs) {
    for (Eigen::Index c = 0; c <= cols_; ++c) t_(rows_, c) = c < cols_ ? costs(c) : 0.0;
    for (Eigen::Index r = 0; r < rows_; ++r) {
      const double cb = costs(basis_[r]);
      if (cb != 0.0) t_.row(rows_) -= cb * t_.row(r);
    }
  }

 private:
  Eigen::MatrixXd t_;
  std::vector<Eigen::Index> basis_;
  Eigen::Index rows_;
  Eigen::Index cols_;
};

enum class Outcome { optimal, stopped, failed };

// Primal simplex over columns [0, enterable). Dantzig pricing with lowest
// index ties, switching permanently to Bland's rule after a run of
// degenerate pivots. `stop` is polled after every pivot.
template <class Stop>
Outcome run_simplex(Tableau& tab, Eigen::Index enterable, Stop stop) {
  const Eigen::Index max_iter = 50 * (tab.rows() + tab.cols()) + 100;
  bool bland = false;
  int degenerate_run = 0;
  for (Eigen::Index iter = 0; iter < max_iter; ++iter) {
    Eigen::Index enter = -1;
    double best = -kCostTol;
    for (Eigen::Index c = 0; c < enterable; ++c) {
      const double d = tab.cost(c);
      if (d < best) {
        enter = c;
        if (bland) break;
        best = d;
      }
    }
    if (enter < 0) return Outcome::optimal;

    Eigen::Index leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (Eigen::Index r = 0; r < tab.rows(); ++r) {
      const double a = tab.at(r, enter);
      if (a <= kPivotTol) continue;
      const double ratio = std::max(0.0, tab.rhs(r)) / a;
      if (ratio < best_ratio - kRatioTieTol ||
          (ratio <= best_ratio + kRatioTieTol && leave >= 0 &&
           tab.basis()[r] < tab.basis()[leave])) {
        best_ratio = std::min(best_ratio, ratio);
        leave = r;
      }
    }
    if (leave < 0) return Outcome::failed;  // unbounded: impossible for this LP

    if (best_ratio <= kRatioTieTol) {
      if (++degenerate_run > kDegenerateBeforeBland) bland = true;
    } else {
      degenerate_run = 0;
    }
    tab.pivot(leave, enter);
    if (stop(tab)) return Outcome::stopped;
  }
  return Outcome::failed;
}

}  // namespace

ChebyshevResult solve_chebyshev(const LinearDataset& data, std::span<const std::size_t> subset,
                                std::optional<double> stop_above) {
  const auto m = static_cast<Eigen::Index>(subset.size());
  const auto p = static_cast<Eigen::Index>(data.dimension());
  const Eigen::MatrixXd& a = data.features();
  const Eigen::VectorXd& y = data.responses();

  // Column scaling of the features and a global response scale keep the
  // tableau entries O(1) for pixel-sized linearised inputs.
  Eigen::VectorXd scale = Eigen::VectorXd::Zero(p);
  double y_scale = 1.0;
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto i = static_cast<Eigen::Index>(subset[k]);
    y_scale = std::max(y_scale, std::abs(y(i)));
    for (Eigen::Index j = 0; j < p; ++j) scale(j) = std::max(scale(j), std::abs(a(i, j)));
  }
  for (Eigen::Index j = 0; j < p; ++j) {
    if (scale(j) == 0.0) scale(j) = 1.0;
  }

  const Eigen::Index rows = p + 1;
  const Eigen::Index real_cols = 2 * m;
  const Eigen::Index cols = real_cols + rows;
  Tableau tab(rows, cols);
  Eigen::VectorXd costs = Eigen::VectorXd::Zero(cols);
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto i = static_cast<Eigen::Index>(subset[k]);
    for (Eigen::Index j = 0; j < p; ++j) {
      const double v = a(i, j) / scale(j);
      tab.at(j, k) = v;
      tab.at(j, m + k) = -v;
    }
    tab.at(p, k) = 1.0;
    tab.at(p, m + k) = 1.0;
    costs(k) = -y(i) / y_scale;
    costs(m + k) = y(i) / y_scale;
  }
  tab.at(p, cols) = 1.0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    tab.at(r, real_cols + r) = 1.0;
    tab.basis()[r] = real_cols + r;
  }

  // Phase 1: minimise the sum of artificials. u = v = 1/(2m) is always
  // feasible, so a small leftover sum is round-off from long pivot runs
  // (seen around 1e-9 on 8-dimensional subsets), not infeasibility.
  Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(cols);
  phase1.tail(rows).setOnes();
  tab.set_objective(phase1);
  if (run_simplex(tab, real_cols, [](const Tableau&) { return false; }) != Outcome::optimal ||
      std::abs(tab.objective()) > kPhaseOneTol) {
    throw SolverError("Chebyshev LP phase 1 did not converge");
  }
  // Drive remaining artificials out of the basis; rows where that is
  // impossible are linearly dependent and keep a zero-level artificial.
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (tab.basis()[r] < real_cols) continue;
    Eigen::Index best_c = -1;
    double best_abs = kPivotTol;
    for (Eigen::Index c = 0; c < real_cols; ++c) {
      const double v = std::abs(tab.at(r, c));
      if (v > best_abs) {
        best_abs = v;
        best_c = c;
      }
    }
    if (best_c >= 0) tab.pivot(r, best_c);
  }

  // Phase 2. -z equals the current dual objective divided by y_scale, which
  // lower-bounds the minimax value at every step.
  tab.set_objective(costs);
  ChebyshevResult result;
  const auto outcome = run_simplex(tab, real_cols, [&](const Tableau& t) {
    return stop_above && t.objective() * y_scale > *stop_above;
  });
  if (outcome == Outcome::failed) throw SolverError("Chebyshev LP phase 2 did not converge");
  result.exceeded = outcome == Outcome::stopped;
  result.lower_bound = tab.objective() * y_scale;

  // Multipliers pi_r = -(reduced cost of artificial r); theta_j = -pi_j * ys / s_j.
  result.theta.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    result.theta(j) = tab.cost(real_cols + j) * y_scale / scale(j);
  }
  return result;
}

}  // namespace maxcon::detail
