#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace maxcon {

/// Indices ordered by decreasing influence.
using Ranking = std::vector<std::size_t>;

/// Which elements the footrule sums over. Absent elements sit at position k+1.
enum class SfDomain { union_of_sets, intersection };

/// Normalized Spearman footrule: sum |pos_a(z) - pos_b(z)| / (k (k+1)).
double sf_distance(const Ranking& a, const Ranking& b, SfDomain domain = SfDomain::union_of_sets);

/// Top k of the present scores, decreasing; ties by lower index. Missing
/// scores are skipped.
Ranking top_k(std::span<const std::optional<double>> scores, std::size_t k);
Ranking top_k(std::span<const double> scores, std::size_t k);

/// ground_truth - found; throws std::logic_error if negative, which means the
/// "exact" reference or the solver is wrong.
long consensus_error(std::size_t found, std::size_t ground_truth);

struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  /// Sample variance (n - 1 denominator), 0 for a single value.
  double variance = 0.0;
  double median = 0.0;
};

Summary summarize(std::span<const double> values);

}  // namespace maxcon
