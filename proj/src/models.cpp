#include "maxcon/models.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "chebyshev.hpp"

namespace maxcon {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto first = cell.find_first_not_of(" \t\r");
    const auto last = cell.find_last_not_of(" \t\r");
    cells.push_back(first == std::string::npos ? "" : cell.substr(first, last - first + 1));
  }
  return cells;
}

void check_subset(const LinearDataset& data, std::span<const std::size_t> subset) {
  for (auto i : subset) {
    if (i >= data.size()) throw std::out_of_range("data index out of range");
  }
}

double binomial_estimate(std::size_t n, std::size_t k) {
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
}

}  // namespace

LinearDataset::LinearDataset(Eigen::MatrixXd features, Eigen::VectorXd responses)
    : features_(std::move(features)), responses_(std::move(responses)) {
  if (features_.rows() < 1) throw std::invalid_argument("dataset needs at least one point");
  if (features_.cols() < 1) throw std::invalid_argument("model dimension must be at least 1");
  if (features_.rows() != responses_.size()) {
    throw std::invalid_argument("feature rows and responses differ in length");
  }
  if (!features_.allFinite() || !responses_.allFinite()) {
    throw std::invalid_argument("dataset contains non-finite values");
  }
}

LinearDataset LinearDataset::read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("empty dataset CSV");
  const auto header = split_csv_line(line);
  if (header.size() < 2 || header.back() != "y") {
    throw std::invalid_argument("dataset CSV header must be x1,...,xp,y");
  }
  const std::size_t p = header.size() - 1;
  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != p + 1) {
      throw std::invalid_argument("dataset CSV row " + std::to_string(rows + 1) + " has " +
                                  std::to_string(cells.size()) + " fields, expected " +
                                  std::to_string(p + 1));
    }
    for (const auto& c : cells) {
      std::size_t used = 0;
      const double v = std::stod(c, &used);
      if (used != c.size()) throw std::invalid_argument("malformed number in dataset CSV: " + c);
      values.push_back(v);
    }
    ++rows;
  }
  Eigen::MatrixXd features(rows, p);
  Eigen::VectorXd responses(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < p; ++j) features(r, j) = values[r * (p + 1) + j];
    responses(r) = values[r * (p + 1) + p];
  }
  return LinearDataset(std::move(features), std::move(responses));
}

LinearDataset LinearDataset::read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);
  return read_csv(in);
}

void LinearDataset::write_csv(std::ostream& out) const {
  const auto old_precision = out.precision(17);
  for (std::size_t j = 0; j < dimension(); ++j) out << 'x' << (j + 1) << ',';
  out << "y\n";
  for (Eigen::Index r = 0; r < features_.rows(); ++r) {
    for (Eigen::Index j = 0; j < features_.cols(); ++j) out << features_(r, j) << ',';
    out << responses_(r) << '\n';
  }
  out.precision(old_precision);
}

double residual(const LinearDataset& data, std::size_t i, const ModelParams& theta) {
  if (i >= data.size()) throw std::out_of_range("data index out of range");
  if (static_cast<std::size_t>(theta.size()) != data.dimension()) {
    throw std::invalid_argument("theta length differs from model dimension");
  }
  const double r = std::abs(data.features().row(i).dot(theta) - data.responses()(i));
  if (!std::isfinite(r)) throw std::domain_error("non-finite residual");
  return r;
}

Eigen::VectorXd residuals(const LinearDataset& data, const ModelParams& theta) {
  return (data.features() * theta - data.responses()).cwiseAbs();
}

MinimaxFit minimax_fit(const LinearDataset& data, std::span<const std::size_t> subset) {
  if (subset.empty()) throw std::invalid_argument("minimax fit needs a nonempty subset");
  check_subset(data, subset);
  auto solved = detail::solve_chebyshev(data, subset);

  MinimaxFit fit;
  fit.theta = std::move(solved.theta);
  std::vector<double> r(subset.size());
  for (std::size_t k = 0; k < subset.size(); ++k) r[k] = residual(data, subset[k], fit.theta);
  fit.value = *std::max_element(r.begin(), r.end());
  const double cutoff = fit.value - active_tolerance(fit.value);
  for (std::size_t k = 0; k < subset.size(); ++k) {
    if (r[k] >= cutoff) fit.active_set.push_back(subset[k]);
  }
  std::sort(fit.active_set.begin(), fit.active_set.end());
  return fit;
}

// ---------------------------------------------------------------------------

FeasibilityOracle::FeasibilityOracle(const LinearDataset& data, double epsilon)
    : data_(&data), epsilon_(epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("epsilon must be positive and finite");
  }
}

FeasibilityOracle::FeasibilityOracle(const FeasibilityOracle& other)
    : data_(other.data_), epsilon_(other.epsilon_), evaluations_(other.evaluations()) {}

bool FeasibilityOracle::operator()(const Vertex& b) const {
  if (b.size() != data_->size()) throw std::invalid_argument("vertex length differs from n");
  if (b.level() <= data_->dimension()) return false;
  const auto idx = b.indices();
  return !feasible_by_lp(idx);
}

bool FeasibilityOracle::feasible(std::span<const std::size_t> subset) const {
  if (subset.size() <= data_->dimension()) {
    check_subset(*data_, subset);
    return true;
  }
  return feasible_by_lp(subset);
}

bool FeasibilityOracle::feasible_by_lp(std::span<const std::size_t> subset) const {
  if (subset.empty()) return true;
  check_subset(*data_, subset);
  evaluations_.fetch_add(1, std::memory_order_relaxed);
  const auto solved = detail::solve_chebyshev(*data_, subset, epsilon_);
  if (solved.exceeded) return false;
  double worst = 0.0;
  for (auto i : subset) worst = std::max(worst, residual(*data_, i, solved.theta));
  return worst <= epsilon_;
}

bool RestrictedOracle::operator()(const Vertex& b) const {
  if (b.size() != members_.size()) throw std::invalid_argument("vertex length differs");
  if (b.level() <= oracle_->dataset().dimension()) return false;
  IndexSet global;
  global.reserve(b.level());
  for (auto j : b.indices()) global.push_back(members_[j]);
  return !oracle_->feasible_by_lp(global);
}

bool feasibility(const FeasibilityOracle& oracle, const Vertex& subset) { return oracle(subset); }

IndexSet basis(const LinearDataset& data, std::span<const std::size_t> subset, double epsilon) {
  const auto fit = minimax_fit(data, subset);
  if (fit.value <= epsilon) {
    throw std::logic_error("basis requested for a feasible subset (minimax value " +
                           std::to_string(fit.value) + " <= epsilon)");
  }
  return fit.active_set;
}

IndexSet consensus_set(const LinearDataset& data, const ModelParams& theta, double epsilon) {
  const Eigen::VectorXd r = residuals(data, theta);
  IndexSet out;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    if (r(i) <= epsilon) out.push_back(static_cast<std::size_t>(i));
  }
  return out;
}

ConsensusSolution exact_maxcon_bases(const LinearDataset& data, double epsilon,
                                     double max_subsets) {
  const std::size_t n = data.size();
  const std::size_t p = data.dimension();

  // Fallback when no (p+1)-subset is feasible: a p-subset fits exactly.
  ConsensusSolution best;
  {
    IndexSet head(std::min(n, p));
    std::iota(head.begin(), head.end(), std::size_t{0});
    const auto fit = minimax_fit(data, head);
    best.theta = fit.theta;
    best.inliers = consensus_set(data, fit.theta, epsilon);
  }
  if (n <= p) return best;

  const std::size_t k = p + 1;
  const double total = binomial_estimate(n, k);
  if (total > max_subsets) {
    throw BudgetExceeded("exact_maxcon_bases would enumerate about " +
                             std::to_string(static_cast<long long>(total)) +
                             " subsets (budget " +
                             std::to_string(static_cast<long long>(max_subsets)) + ")",
                         total);
  }

  IndexSet combo(k);
  std::iota(combo.begin(), combo.end(), std::size_t{0});
  for (;;) {
    // Any model's consensus is feasible, so infeasible bases are counted too.
    const auto fit = minimax_fit(data, combo);
    auto inliers = consensus_set(data, fit.theta, epsilon);
    if (inliers.size() > best.inliers.size()) {
      best.inliers = std::move(inliers);
      best.theta = fit.theta;
    }
    // next combination in lexicographic order
    std::size_t pos = k;
    while (pos > 0 && combo[pos - 1] == n - k + pos - 1) --pos;
    if (pos == 0) break;
    ++combo[pos - 1];
    for (std::size_t j = pos; j < k; ++j) combo[j] = combo[j - 1] + 1;
  }
  return best;
}

IndexSet exact_maxcon_enumerate(const BooleanFunction& f, std::size_t cap) {
  const std::size_t n = f.dimension();
  if (n > cap || n > 63) {
    throw BudgetExceeded("exact_maxcon_enumerate refuses n = " + std::to_string(n) +
                             " (cap " + std::to_string(cap) + ")",
                         std::ldexp(1.0, static_cast<int>(std::min<std::size_t>(n, 1000))));
  }
  const std::uint64_t limit = std::uint64_t{1} << n;
  for (std::size_t level = n + 1; level-- > 0;) {
    if (level == 0) return {};
    // Gosper's hack: masks with `level` bits set, ascending.
    std::uint64_t mask = (std::uint64_t{1} << level) - 1;
    while (mask < limit) {
      const auto v = Vertex::from_mask(mask, n);
      if (!f(v)) return v.indices();
      const std::uint64_t c = mask & (~mask + 1);
      const std::uint64_t r = mask + c;
      mask = (((r ^ mask) >> 2) / c) | r;
    }
  }
  return {};
}

}  // namespace maxcon
