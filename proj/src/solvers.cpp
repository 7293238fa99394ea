#include "maxcon/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

#include "maxcon/parallel.hpp"

namespace maxcon {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

IndexSet iota_set(std::size_t n) {
  IndexSet s(n);
  std::iota(s.begin(), s.end(), std::size_t{0});
  return s;
}

IndexSet expand(const FeasibilityOracle& oracle, IndexSet inliers) {
  std::sort(inliers.begin(), inliers.end());
  const std::size_t n = oracle.dataset().size();
  IndexSet trial;
  for (std::size_t j = 0; j < n; ++j) {
    if (std::binary_search(inliers.begin(), inliers.end(), j)) continue;
    trial = inliers;
    trial.insert(std::upper_bound(trial.begin(), trial.end(), j), j);
    if (oracle.feasible(trial)) inliers = std::move(trial);
  }
  return inliers;
}

// Picks the global index to drop from the infeasible set `members` given
// the basis of its minimax fit (sorted, global indices).
using Chooser = std::function<std::size_t(const FeasibilityOracle& oracle, const IndexSet& members,
                                          const IndexSet& basis, std::size_t iteration)>;

SolveResult influence_loop(const LinearDataset& data, const SolverConfig& config,
                           const std::string& method, const Chooser& choose) {
  const auto start = Clock::now();
  const std::size_t n = data.size();
  const std::size_t p = data.dimension();
  if (n <= p) throw std::invalid_argument("need more points than the model dimension");
  config.validate(n, p);

  const FeasibilityOracle oracle(data, config.epsilon);
  std::uint64_t fits = 0;
  auto evaluations = [&] { return oracle.evaluations() + fits; };

  SolveResult result;
  result.method = method;
  result.seed = config.seed;
  result.config = config.to_json();

  IndexSet members = iota_set(n);
  while (members.size() > p) {
    const auto fit = minimax_fit(data, members);
    ++fits;
    if (fit.value <= config.epsilon) break;
    if (config.local_expansion == LocalExpansion::per_iteration && result.iterations > 0) {
      // The listed placement: expansion of the still-infeasible set after a
      // removal. Monotonicity rejects every candidate, so this only spends
      // oracle calls; the output matches `off`.
      members = expand(oracle, std::move(members));
    }
    const bool out_of_time = config.time_budget_ms && elapsed_ms(start) > *config.time_budget_ms;
    const bool out_of_evals = config.max_evaluations && evaluations() >= *config.max_evaluations;
    if (out_of_time || out_of_evals) {
      result.budget_exhausted = true;
      result.theta = fit.theta;
      result.inlier_set = consensus_set(data, fit.theta, config.epsilon);
      break;
    }
    const std::size_t drop = choose(oracle, members, fit.active_set, result.iterations);
    members.erase(std::find(members.begin(), members.end(), drop));
    result.removed.push_back(drop);
    ++result.iterations;
  }

  if (!result.budget_exhausted) {
    if (config.local_expansion == LocalExpansion::post_loop) {
      members = expand(oracle, std::move(members));
    }
    const auto fit = minimax_fit(data, members);
    ++fits;
    result.theta = fit.theta;
    result.inlier_set = std::move(members);
  }
  result.oracle_evaluations = evaluations();
  result.runtime_ms = elapsed_ms(start);
  return result;
}

// Positions of `basis` inside the sorted `members`.
std::vector<std::size_t> local_positions(const IndexSet& members, const IndexSet& basis) {
  std::vector<std::size_t> out;
  for (auto b : basis) {
    out.push_back(static_cast<std::size_t>(
        std::lower_bound(members.begin(), members.end(), b) - members.begin()));
  }
  return out;
}

// argmax over the basis; ties go to the lowest global index.
std::size_t pick_max(const IndexSet& basis, const std::vector<std::size_t>& local,
                     const InfluenceReport& report) {
  std::size_t best = basis.front();
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < basis.size(); ++k) {
    const double s = report.scores[local[k]].value_or(0.0);
    if (s > best_score) {
      best_score = s;
      best = basis[k];
    }
  }
  return best;
}

struct RansacRun {
  ModelParams theta;
  std::size_t best = 0;
  std::size_t iterations = 0;
  std::uint64_t evaluations = 0;
  std::size_t skipped = 0;
  bool has_model = false;
};

SolveResult run_ransac(const LinearDataset& data, double epsilon, const RansacBudget& budget,
                       std::uint64_t seed, std::size_t depth, const std::string& method) {
  const auto start = Clock::now();
  const std::size_t n = data.size();
  const std::size_t p = data.dimension();
  if (n < p) throw std::invalid_argument("need at least p points");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");

  RansacBudget b = budget;
  if (!b.iterations && !b.time_ms && !b.confidence && !b.max_evaluations) b.confidence = 0.99;
  if (b.confidence && !(*b.confidence > 0.0 && *b.confidence < 1.0)) {
    throw std::invalid_argument("confidence must lie in (0, 1)");
  }

  Rng rng = make_stream(seed, {0x7Au});
  const IndexSet all = iota_set(n);
  RansacRun run;
  run.theta = ModelParams::Zero(static_cast<Eigen::Index>(p));
  std::size_t required = b.hard_cap;

  auto count = [&](const ModelParams& theta) {
    return static_cast<std::size_t>((residuals(data, theta).array() <= epsilon).count());
  };

  IndexSet sample;
  Eigen::MatrixXd a(p, p);
  Eigen::VectorXd y(p);
  for (;;) {
    if (run.iterations >= b.hard_cap) break;
    if (b.iterations && run.iterations >= *b.iterations) break;
    if (b.confidence && run.iterations >= required) break;
    if (b.max_evaluations && run.evaluations >= *b.max_evaluations) break;
    if (b.time_ms && elapsed_ms(start) > *b.time_ms) break;
    ++run.iterations;

    sample.clear();
    std::sample(all.begin(), all.end(), std::back_inserter(sample), p, rng);
    for (std::size_t r = 0; r < p; ++r) {
      a.row(r) = data.features().row(sample[r]);
      y(r) = data.responses()(sample[r]);
    }
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (!lu.isInvertible()) {
      ++run.skipped;
      continue;
    }
    ModelParams theta = lu.solve(y);
    ++run.evaluations;
    std::size_t support = count(theta);
    if (run.has_model && support <= run.best) continue;

    for (std::size_t d = 0; d < depth; ++d) {
      if (b.max_evaluations && run.evaluations >= *b.max_evaluations) break;
      const auto fit = minimax_fit(data, consensus_set(data, theta, epsilon));
      ++run.evaluations;
      const std::size_t refined = count(fit.theta);
      if (refined <= support) break;
      theta = fit.theta;
      support = refined;
    }
    run.theta = std::move(theta);
    run.best = support;
    run.has_model = true;
    if (b.confidence) {
      required = ransac_required_iterations(static_cast<double>(support) / static_cast<double>(n),
                                            p, *b.confidence, b.hard_cap);
    }
  }

  SolveResult result;
  result.method = method;
  result.seed = seed;
  result.theta = run.theta;
  result.inlier_set = consensus_set(data, run.theta, epsilon);
  result.iterations = run.iterations;
  result.oracle_evaluations = run.evaluations;
  result.skipped_samples = run.skipped;
  result.budget_exhausted =
      (b.time_ms && elapsed_ms(start) > *b.time_ms) ||
      (b.max_evaluations && run.evaluations >= *b.max_evaluations);
  result.config = b.to_json();
  result.config["epsilon"] = epsilon;
  if (method == "lo-ransac") result.config["depth"] = depth;
  result.runtime_ms = elapsed_ms(start);
  return result;
}

}  // namespace

std::string to_string(LocalExpansion placement) {
  switch (placement) {
    case LocalExpansion::post_loop:
      return "post_loop";
    case LocalExpansion::per_iteration:
      return "per_iteration";
    case LocalExpansion::off:
      return "off";
  }
  return "unknown";
}

LocalExpansion parse_local_expansion(const std::string& text) {
  if (text == "post_loop") return LocalExpansion::post_loop;
  if (text == "per_iteration") return LocalExpansion::per_iteration;
  if (text == "off") return LocalExpansion::off;
  throw std::invalid_argument("unknown local expansion placement: " + text);
}

void SolverConfig::validate(std::size_t n, std::size_t p) const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("epsilon must be positive and finite");
  }
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("q must lie in (0, 1)");
  if (h < 2) throw std::invalid_argument("h must be at least 2");
  if (!enforce_ranges) return;
  const double q_low = static_cast<double>(p + 1) / static_cast<double>(n);
  if (q < q_low - 1e-12 || q > 0.4 + 1e-12) {
    throw std::invalid_argument("q = " + std::to_string(q) + " outside the default range [" +
                                std::to_string(q_low) +
                                ", 0.4]; disable range enforcement to override");
  }
  if (h < 100 || h > 500) {
    throw std::invalid_argument("h = " + std::to_string(h) +
                                " outside the default range [100, 500]; disable range "
                                "enforcement to override");
  }
}

nlohmann::json SolverConfig::to_json() const {
  nlohmann::json j{{"epsilon", epsilon},
                   {"q", q},
                   {"h", h},
                   {"hamming_level_offset", hamming_level_offset},
                   {"local_expansion", maxcon::to_string(local_expansion)},
                   {"estimator_mode", maxcon::to_string(estimator_mode)},
                   {"seed", seed},
                   {"enforce_ranges", enforce_ranges}};
  if (time_budget_ms) j["time_budget_ms"] = *time_budget_ms;
  if (max_evaluations) j["max_evaluations"] = *max_evaluations;
  return j;
}

SolverConfig SolverConfig::from_json(const nlohmann::json& j) {
  SolverConfig c;
  c.epsilon = j.value("epsilon", c.epsilon);
  c.q = j.value("q", c.q);
  c.h = j.value("h", c.h);
  c.hamming_level_offset = j.value("hamming_level_offset", c.hamming_level_offset);
  if (j.contains("local_expansion")) {
    c.local_expansion = parse_local_expansion(j["local_expansion"].get<std::string>());
  }
  if (j.contains("estimator_mode")) {
    c.estimator_mode = parse_estimator_mode(j["estimator_mode"].get<std::string>());
  }
  c.seed = j.value("seed", c.seed);
  c.enforce_ranges = j.value("enforce_ranges", c.enforce_ranges);
  if (j.contains("time_budget_ms")) c.time_budget_ms = j["time_budget_ms"].get<double>();
  if (j.contains("max_evaluations")) {
    c.max_evaluations = j["max_evaluations"].get<std::uint64_t>();
  }
  c.threads = j.value("threads", c.threads);
  return c;
}

nlohmann::json SolveResult::to_json() const {
  return {{"method", method},
          {"consensus_size", consensus_size()},
          {"inlier_indices", inlier_set},
          {"theta", std::vector<double>(theta.data(), theta.data() + theta.size())},
          {"iterations", iterations},
          {"oracle_evaluations", oracle_evaluations},
          {"runtime_ms", runtime_ms},
          {"seed", seed},
          {"budget_exhausted", budget_exhausted},
          {"config", config}};
}

nlohmann::json RansacBudget::to_json() const {
  nlohmann::json j{{"hard_cap", hard_cap}};
  if (iterations) j["iterations"] = *iterations;
  if (time_ms) j["time_ms"] = *time_ms;
  if (confidence) j["confidence"] = *confidence;
  if (max_evaluations) j["max_evaluations"] = *max_evaluations;
  return j;
}

RansacBudget RansacBudget::from_json(const nlohmann::json& j) {
  RansacBudget b;
  b.hard_cap = j.value("hard_cap", b.hard_cap);
  if (j.contains("iterations")) b.iterations = j["iterations"].get<std::size_t>();
  if (j.contains("time_ms")) b.time_ms = j["time_ms"].get<double>();
  if (j.contains("confidence")) b.confidence = j["confidence"].get<double>();
  if (j.contains("max_evaluations")) b.max_evaluations = j["max_evaluations"].get<std::uint64_t>();
  return b;
}

SolveResult wi_maxcon(const LinearDataset& data, const SolverConfig& config) {
  return influence_loop(
      data, config, "wi",
      [&](const FeasibilityOracle& oracle, const IndexSet& members, const IndexSet& basis,
          std::size_t iteration) {
        const RestrictedOracle cube(oracle, members);
        const auto local = local_positions(members, basis);
        const auto report = estimate_influence_bernoulli(
            cube, local, config.q, config.h, derive_seed(config.seed, {iteration}),
            config.estimator_mode, config.threads);
        return pick_max(basis, local, report);
      });
}

SolveResult mbf_maxcon(const LinearDataset& data, const SolverConfig& config) {
  const std::size_t p = data.dimension();
  return influence_loop(
      data, config, "mbf",
      [&](const FeasibilityOracle& oracle, const IndexSet& members, const IndexSet& basis,
          std::size_t iteration) {
        const std::size_t level = std::min(p + 1 + config.hamming_level_offset, members.size() - 1);
        // With p + 1 survivors there is no level strictly between p and |I|.
        if (level <= p) return basis.front();
        const RestrictedOracle cube(oracle, members);
        const auto local = local_positions(members, basis);
        const auto report = estimate_influence_hamming(
            cube, local, level, config.h, derive_seed(config.seed, {iteration}), config.threads);
        return pick_max(basis, local, report);
      });
}

IndexSet local_expansion(const LinearDataset& data, double epsilon, IndexSet inliers) {
  const FeasibilityOracle oracle(data, epsilon);
  if (!oracle.feasible(inliers)) {
    throw std::invalid_argument("local expansion needs a feasible starting set");
  }
  return expand(oracle, std::move(inliers));
}

std::size_t ransac_required_iterations(double inlier_ratio, std::size_t sample_size,
                                       double confidence, std::size_t cap) {
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw std::invalid_argument("confidence must lie in (0, 1)");
  }
  if (inlier_ratio >= 1.0) return 1;
  const double good = std::pow(inlier_ratio, static_cast<double>(sample_size));
  if (good <= 0.0) return cap;
  const double k = std::log(1.0 - confidence) / std::log1p(-good);
  if (!std::isfinite(k) || k >= static_cast<double>(cap)) return cap;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(k)));
}

SolveResult ransac(const LinearDataset& data, double epsilon, const RansacBudget& budget,
                   std::uint64_t seed) {
  return run_ransac(data, epsilon, budget, seed, 0, "ransac");
}

SolveResult lo_ransac(const LinearDataset& data, double epsilon, const RansacBudget& budget,
                      std::uint64_t seed, std::size_t depth) {
  return run_ransac(data, epsilon, budget, seed, depth, "lo-ransac");
}

SolveResult exact_solve(const LinearDataset& data, double epsilon) {
  const auto start = Clock::now();
  const auto best = exact_maxcon_bases(data, epsilon);
  SolveResult result;
  result.method = "exact";
  result.inlier_set = best.inliers;
  result.theta = best.theta;
  const std::size_t n = data.size();
  const std::size_t k = data.dimension() + 1;
  if (n >= k) {
    result.oracle_evaluations = static_cast<std::uint64_t>(std::llround(
        std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0))));
  }
  result.config = {{"epsilon", epsilon}};
  result.runtime_ms = elapsed_ms(start);
  return result;
}

}  // namespace maxcon
