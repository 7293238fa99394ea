#pragma once

// Config-driven batches: methods x repetitions on one data source, or the
// SF-distance sweep of estimated against exact influence rankings.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "maxcon/datagen.hpp"
#include "maxcon/solvers.hpp"

namespace maxcon {

enum class ExperimentKind { compare, sf_sweep };
enum class BudgetMatch { none, oracle, time };

std::string to_string(BudgetMatch match);
BudgetMatch parse_budget_match(const std::string& text);

struct DataSource {
  /// generated | multistructure | csv | fundamental | homography | two_view
  std::string kind = "generated";
  GenSpec gen;
  MatchGenSpec matches;
  std::vector<GenSpec> structures;
  std::size_t gross_outliers = 0;
  std::string path;
  bool normalize = false;
  /// Homography only: also report matches with both rows in the consensus.
  bool per_match = false;

  nlohmann::json to_json() const;
  static DataSource from_json(const nlohmann::json& j);
};

struct MethodSpec {
  /// wi | mbf | ransac | lo-ransac | exact
  std::string name;
  /// Column value in the outputs; defaults to name.
  std::string label;
  SolverConfig solver;
  RansacBudget budget;
  std::size_t lo_depth = 2;

  nlohmann::json to_json() const;
  static MethodSpec from_json(const nlohmann::json& j);
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::compare;
  DataSource data;
  std::vector<MethodSpec> methods;
  std::size_t repetitions = 1;
  std::uint64_t master_seed = 0;
  /// Used instead of master-derived seeds when non-empty; one per repetition.
  std::vector<std::uint64_t> seeds;
  double epsilon = 0.1;
  /// RANSAC-family methods without an explicit budget inherit the
  /// evaluations or wall-clock of the reference method in the same run.
  BudgetMatch budget_match = BudgetMatch::none;
  std::string budget_reference;
  /// Run exact_maxcon_bases per repetition for the error column.
  bool exact_ground_truth = false;
  /// sf_sweep grid. The estimator runs on the tabulated oracle.
  std::vector<double> qs;
  std::vector<std::size_t> hs;
  EstimatorMode sf_mode = EstimatorMode::paper;
  /// Repetitions in flight; 0 = default_thread_count().
  unsigned threads = 0;
  /// Files are <output>.jsonl, <output>.csv and <output>_aggregate.csv.
  std::string output;

  std::uint64_t run_seed(std::size_t run) const;
  void validate() const;
  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig from_file(const std::string& path);
};

struct RunRecord {
  std::size_t run = 0;
  std::uint64_t seed = 0;
  std::string label;
  SolveResult result;
  std::optional<std::size_t> optimum;
  std::optional<std::size_t> match_consensus;

  nlohmann::json to_json() const;
};

struct SfRecord {
  std::size_t run = 0;
  std::uint64_t seed = 0;
  double q = 0.0;
  std::size_t h = 0;
  std::size_t k = 0;
  double sf_distance = 0.0;

  nlohmann::json to_json() const;
};

struct BatchReport {
  ExperimentConfig config;
  std::vector<RunRecord> runs;
  std::vector<SfRecord> sf;
  /// sf_sweep repetitions whose exact optimum kept every point (no ranking).
  std::vector<std::size_t> skipped_runs;

  /// Mean consensus of one label over all repetitions.
  double mean_consensus(const std::string& label) const;
  /// Median SF distance at one grid cell.
  double median_sf(double q, std::size_t h) const;
};

/// Builds the dataset of one repetition.
LinearDataset load_dataset(const DataSource& source, std::uint64_t seed);

BatchReport run_experiment(const ExperimentConfig& config);

/// Writes the JSON lines, per-run CSV and aggregate CSV; returns their paths.
std::vector<std::string> write_report(const BatchReport& report, const std::string& prefix);

}  // namespace maxcon
