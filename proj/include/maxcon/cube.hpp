#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "maxcon/parallel.hpp"
#include "maxcon/vertex.hpp"

namespace maxcon {

/// Product measure on {0,1}^n with P(b_i = 1) = q.
class BernoulliMeasure {
 public:
  explicit BernoulliMeasure(double q);

  double q() const { return q_; }
  /// Parity-basis constants; q_minus * q_plus == -1.
  double q_minus() const { return -std::sqrt((1.0 - q_) / q_); }
  double q_plus() const { return std::sqrt(q_ / (1.0 - q_)); }

  double probability(const Vertex& v) const;
  double log_probability(std::size_t level, std::size_t n) const;

 private:
  double q_;
};

double measure(const Vertex& v, double q);

Vertex sample_bernoulli(std::size_t n, double q, Rng& rng);
/// Uniform vertex on the Hamming slice of level k.
Vertex sample_level(std::size_t n, std::size_t k, Rng& rng);

/// Lambda-backed Boolean function, mostly for tests and synthetic oracles.
class FunctionAdapter final : public BooleanFunction {
 public:
  FunctionAdapter(std::size_t n, std::function<bool(const Vertex&)> fn,
                  std::optional<std::size_t> model_dim = std::nullopt)
      : n_(n), fn_(std::move(fn)), model_dim_(model_dim) {}

  std::size_t dimension() const override { return n_; }
  bool operator()(const Vertex& b) const override { return fn_(b); }
  std::optional<std::size_t> model_dimension() const override { return model_dim_; }

 private:
  std::size_t n_;
  std::function<bool(const Vertex&)> fn_;
  std::optional<std::size_t> model_dim_;
};

inline constexpr std::size_t kEnumerationCap = 22;

/// Full truth table of a Boolean function, indexed by bitmask (bit i of the
/// mask is b_i). Exact influences are level-stratified counts over it.
class TruthTable final : public BooleanFunction {
 public:
  static TruthTable tabulate(const BooleanFunction& f, unsigned threads = 1,
                             std::size_t cap = kEnumerationCap);

  std::size_t dimension() const override { return n_; }
  bool operator()(const Vertex& b) const override { return at(b.to_mask()); }
  std::optional<std::size_t> model_dimension() const override { return model_dim_; }

  bool at(std::uint64_t mask) const { return values_[mask] != 0; }

  /// counts[l] = #{b at level l : f(b) != f(b ^ e_i)}.
  std::vector<std::uint64_t> sensitive_counts_by_level(std::size_t i) const;
  /// counts[l] = #{b at level l : f(b) = 1 and b_i = bit}.
  std::vector<std::uint64_t> true_counts_by_level(std::size_t i, bool bit) const;

  bool is_monotone() const;

 private:
  TruthTable(std::size_t n, std::vector<std::uint8_t> values,
             std::optional<std::size_t> model_dim)
      : n_(n), values_(std::move(values)), model_dim_(model_dim) {}

  std::size_t n_;
  std::vector<std::uint8_t> values_;
  std::optional<std::size_t> model_dim_;
};

/// sum_l counts[l] q^l (1-q)^(n-l), in any field type (double, rationals).
template <class T>
T level_polynomial(std::span<const std::uint64_t> counts, std::size_t n, const T& q) {
  T total = T(0);
  const T one_minus = T(1) - q;
  for (std::size_t l = 0; l < counts.size(); ++l) {
    if (counts[l] == 0) continue;
    T term = T(counts[l]);
    for (std::size_t a = 0; a < l; ++a) term *= q;
    for (std::size_t a = l; a < n; ++a) term *= one_minus;
    total += term;
  }
  return total;
}

double exact_weighted_influence(const BooleanFunction& f, std::size_t i, double q);
double exact_fourier_first_order(const BooleanFunction& f, std::size_t i, double q);
std::vector<double> exact_weighted_influences(const TruthTable& table, double q);
std::vector<double> exact_fourier_first_order_all(const TruthTable& table, double q);

enum class EstimatorMode { paper, unbiased };
enum class MeasureKind { bernoulli, hamming, exact };

std::string to_string(EstimatorMode mode);
std::string to_string(MeasureKind kind);
EstimatorMode parse_estimator_mode(const std::string& text);

struct InfluenceReport {
  MeasureKind measure = MeasureKind::exact;
  double q_or_level = 0.0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  EstimatorMode mode = EstimatorMode::paper;
  /// Estimated values are scores[i] * exp(log_scale). log_scale is nonzero
  /// only when the Bernoulli weights would underflow a double.
  double log_scale = 0.0;
  std::vector<std::optional<double>> scores;
  /// Oracle calls avoided by the monotonicity shortcuts.
  std::uint64_t shortcut_hits = 0;

  nlohmann::json to_json() const;
};

/// Flip-pair estimate of the Bernoulli(q) weighted influences of `indices`.
/// Each index draws floor(h/2) base vertices from its own sub-stream of
/// `seed` and pairs them with their i-flips.
InfluenceReport estimate_influence_bernoulli(const BooleanFunction& f,
                                             std::span<const std::size_t> indices,
                                             double q, std::size_t h, std::uint64_t seed,
                                             EstimatorMode mode = EstimatorMode::paper,
                                             unsigned threads = 1);

/// Fraction of h uniform level-k vertices whose value changes under the i-flip.
InfluenceReport estimate_influence_hamming(const BooleanFunction& f,
                                           std::span<const std::size_t> indices,
                                           std::size_t k, std::size_t h, std::uint64_t seed,
                                           unsigned threads = 1);

InfluenceReport exact_influence_report(const TruthTable& table, double q);

}  // namespace maxcon
