#include "maxcon/cube.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <stdexcept>

namespace maxcon {

namespace {

void check_q(double q) {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("q must lie in (0, 1)");
}

void check_indices(std::span<const std::size_t> indices, std::size_t n) {
  for (auto i : indices) {
    if (i >= n) throw std::out_of_range("influence index out of range");
  }
}

InfluenceReport empty_report(MeasureKind kind, double q_or_level, std::size_t h,
                             std::uint64_t seed, std::size_t n) {
  InfluenceReport r;
  r.measure = kind;
  r.q_or_level = q_or_level;
  r.samples = h;
  r.seed = seed;
  r.scores.assign(n, std::nullopt);
  return r;
}

// Evaluates f at b's i-flip, skipping the oracle where monotonicity already
// decides the answer. Returns the flip value; bumps `shortcuts` when skipped.
bool flipped_value(const BooleanFunction& f, const Vertex& b, std::size_t i, bool fb,
                   std::uint64_t& shortcuts) {
  const bool bi = b.test(i);
  if (!fb && bi) {
    ++shortcuts;
    return false;
  }
  if (fb && !bi) {
    ++shortcuts;
    return true;
  }
  return f(b.flipped(i));
}

}  // namespace

BernoulliMeasure::BernoulliMeasure(double q) : q_(q) { check_q(q); }

double BernoulliMeasure::probability(const Vertex& v) const {
  return std::exp(log_probability(v.level(), v.size()));
}

double BernoulliMeasure::log_probability(std::size_t level, std::size_t n) const {
  return static_cast<double>(level) * std::log(q_) +
         static_cast<double>(n - level) * std::log1p(-q_);
}

double measure(const Vertex& v, double q) { return BernoulliMeasure(q).probability(v); }

Vertex sample_bernoulli(std::size_t n, double q, Rng& rng) {
  check_q(q);
  std::bernoulli_distribution coin(q);
  Vertex v(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (coin(rng)) v.set(i);
  }
  return v;
}

Vertex sample_level(std::size_t n, std::size_t k, Rng& rng) {
  if (k > n) throw std::invalid_argument("level exceeds cube dimension");
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<std::size_t> chosen;
  chosen.reserve(k);
  std::sample(all.begin(), all.end(), std::back_inserter(chosen), k, rng);
  return Vertex::from_indices(n, chosen);
}

// ---------------------------------------------------------------------------

TruthTable TruthTable::tabulate(const BooleanFunction& f, unsigned threads, std::size_t cap) {
  const std::size_t n = f.dimension();
  if (n > cap || n > 30) {
    throw std::invalid_argument("cube dimension " + std::to_string(n) +
                                " exceeds the enumeration cap " + std::to_string(cap));
  }
  if (const auto* table = dynamic_cast<const TruthTable*>(&f)) return *table;

  const std::uint64_t total = std::uint64_t{1} << n;
  std::vector<std::uint8_t> values(total);
  constexpr std::uint64_t kChunk = 1024;
  const std::size_t chunks = static_cast<std::size_t>((total + kChunk - 1) / kChunk);
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::uint64_t begin = c * kChunk;
    const std::uint64_t end = std::min(total, begin + kChunk);
    for (std::uint64_t m = begin; m < end; ++m) {
      values[m] = f(Vertex::from_mask(m, n)) ? 1 : 0;
    }
  });
  return TruthTable(n, std::move(values), f.model_dimension());
}

std::vector<std::uint64_t> TruthTable::sensitive_counts_by_level(std::size_t i) const {
  if (i >= n_) throw std::out_of_range("influence index out of range");
  std::vector<std::uint64_t> counts(n_ + 1, 0);
  const std::uint64_t bit = std::uint64_t{1} << i;
  for (std::uint64_t m = 0; m < values_.size(); ++m) {
    if (values_[m] != values_[m ^ bit]) ++counts[std::popcount(m)];
  }
  return counts;
}

std::vector<std::uint64_t> TruthTable::true_counts_by_level(std::size_t i, bool bit) const {
  if (i >= n_) throw std::out_of_range("influence index out of range");
  std::vector<std::uint64_t> counts(n_ + 1, 0);
  const std::uint64_t mask_i = std::uint64_t{1} << i;
  for (std::uint64_t m = 0; m < values_.size(); ++m) {
    if (values_[m] && (((m & mask_i) != 0) == bit)) ++counts[std::popcount(m)];
  }
  return counts;
}

bool TruthTable::is_monotone() const {
  for (std::uint64_t m = 0; m < values_.size(); ++m) {
    if (!values_[m]) continue;
    for (std::size_t i = 0; i < n_; ++i) {
      const std::uint64_t up = m | (std::uint64_t{1} << i);
      if (!values_[up]) return false;
    }
  }
  return true;
}

double exact_weighted_influence(const BooleanFunction& f, std::size_t i, double q) {
  check_q(q);
  const auto table = TruthTable::tabulate(f);
  const auto counts = table.sensitive_counts_by_level(i);
  return level_polynomial<double>(counts, table.dimension(), q);
}

double exact_fourier_first_order(const BooleanFunction& f, std::size_t i, double q) {
  check_q(q);
  const auto table = TruthTable::tabulate(f);
  const BernoulliMeasure mu(q);
  const auto ones = table.true_counts_by_level(i, true);
  const auto zeros = table.true_counts_by_level(i, false);
  const std::size_t n = table.dimension();
  return mu.q_minus() * level_polynomial<double>(ones, n, q) +
         mu.q_plus() * level_polynomial<double>(zeros, n, q);
}

std::vector<double> exact_weighted_influences(const TruthTable& table, double q) {
  check_q(q);
  std::vector<double> out(table.dimension());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = level_polynomial<double>(table.sensitive_counts_by_level(i), table.dimension(), q);
  }
  return out;
}

std::vector<double> exact_fourier_first_order_all(const TruthTable& table, double q) {
  std::vector<double> out(table.dimension());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = exact_fourier_first_order(table, i, q);
  return out;
}

InfluenceReport exact_influence_report(const TruthTable& table, double q) {
  auto report = empty_report(MeasureKind::exact, q, 0, 0, table.dimension());
  const auto values = exact_weighted_influences(table, q);
  for (std::size_t i = 0; i < values.size(); ++i) report.scores[i] = values[i];
  return report;
}

// ---------------------------------------------------------------------------

std::string to_string(EstimatorMode mode) {
  return mode == EstimatorMode::paper ? "paper" : "unbiased";
}

std::string to_string(MeasureKind kind) {
  switch (kind) {
    case MeasureKind::bernoulli:
      return "bernoulli";
    case MeasureKind::hamming:
      return "hamming";
    case MeasureKind::exact:
      return "exact";
  }
  return "unknown";
}

EstimatorMode parse_estimator_mode(const std::string& text) {
  if (text == "paper") return EstimatorMode::paper;
  if (text == "unbiased") return EstimatorMode::unbiased;
  throw std::invalid_argument("unknown estimator mode: " + text);
}

nlohmann::json InfluenceReport::to_json() const {
  nlohmann::json j;
  j["measure"] = maxcon::to_string(measure);
  j["q_or_level"] = q_or_level;
  j["h"] = samples;
  j["seed"] = seed;
  if (measure == MeasureKind::bernoulli) j["mode"] = maxcon::to_string(mode);
  if (log_scale != 0.0) j["log_scale"] = log_scale;
  auto arr = nlohmann::json::array();
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i]) arr.push_back({{"index", i}, {"value", *scores[i]}});
  }
  j["scores"] = std::move(arr);
  return j;
}

InfluenceReport estimate_influence_bernoulli(const BooleanFunction& f,
                                             std::span<const std::size_t> indices,
                                             double q, std::size_t h, std::uint64_t seed,
                                             EstimatorMode mode, unsigned threads) {
  check_q(q);
  if (h < 2) throw std::invalid_argument("sample count h must be at least 2");
  const std::size_t n = f.dimension();
  check_indices(indices, n);

  auto report = empty_report(MeasureKind::bernoulli, q, h, seed, n);
  report.mode = mode;

  const BernoulliMeasure mu(q);
  const double chi_one = mu.q_minus();
  const double chi_zero = mu.q_plus();
  const double norm = std::sqrt(q * (1.0 - q));
  const std::size_t half = h / 2;

  // Typical log mu_q(b); pulled out only when exp() would underflow.
  const double typical_log = static_cast<double>(n) *
                             (q * std::log(q) + (1.0 - q) * std::log1p(-q));
  report.log_scale = typical_log < -600.0 ? typical_log : 0.0;

  std::vector<double> values(indices.size());
  std::vector<std::uint64_t> shortcuts(indices.size(), 0);
  parallel_for(indices.size(), threads, [&](std::size_t slot) {
    const std::size_t i = indices[slot];
    Rng rng = make_stream(seed, {0xB3u, i});
    double sum = 0.0;
    auto contribution = [&](bool value, bool bit, std::size_t level) {
      if (!value) return 0.0;
      const double chi = bit ? chi_one : chi_zero;
      if (mode == EstimatorMode::paper) {
        return chi * std::exp(mu.log_probability(level, n) - report.log_scale);
      }
      // Importance weight of the pooled (base + flipped) sample.
      return chi * (bit ? 2.0 * q : 2.0 * (1.0 - q));
    };
    for (std::size_t j = 0; j < half; ++j) {
      const Vertex b = sample_bernoulli(n, q, rng);
      const bool fb = f(b);
      const bool bi = b.test(i);
      const bool ff = flipped_value(f, b, i, fb, shortcuts[slot]);
      // Equal values cancel exactly (q_- q + q_+ (1-q) = 0); skipping them
      // keeps insensitive indices at exactly zero.
      if (fb == ff) continue;
      const std::size_t level = b.level();
      sum += contribution(fb, bi, level);
      sum += contribution(ff, !bi, bi ? level - 1 : level + 1);
    }
    const double denom = mode == EstimatorMode::paper ? static_cast<double>(h)
                                                      : static_cast<double>(2 * half);
    values[slot] = -sum / (denom * norm);
  });

  for (std::size_t slot = 0; slot < indices.size(); ++slot) {
    report.scores[indices[slot]] = values[slot] == 0.0 ? 0.0 : values[slot];
    report.shortcut_hits += shortcuts[slot];
  }
  return report;
}

InfluenceReport estimate_influence_hamming(const BooleanFunction& f,
                                           std::span<const std::size_t> indices,
                                           std::size_t k, std::size_t h, std::uint64_t seed,
                                           unsigned threads) {
  const std::size_t n = f.dimension();
  const std::size_t floor = f.model_dimension().value_or(0);
  if (k <= floor || k >= n) {
    throw std::invalid_argument("Hamming level " + std::to_string(k) +
                                " outside the open range (" + std::to_string(floor) + ", " +
                                std::to_string(n) + ")");
  }
  if (h < 1) throw std::invalid_argument("sample count h must be positive");
  check_indices(indices, n);

  auto report = empty_report(MeasureKind::hamming, static_cast<double>(k), h, seed, n);
  std::vector<double> values(indices.size());
  std::vector<std::uint64_t> shortcuts(indices.size(), 0);
  parallel_for(indices.size(), threads, [&](std::size_t slot) {
    const std::size_t i = indices[slot];
    Rng rng = make_stream(seed, {0x4Du, i});
    std::size_t count = 0;
    for (std::size_t j = 0; j < h; ++j) {
      const Vertex b = sample_level(n, k, rng);
      const bool fb = f(b);
      if (fb != flipped_value(f, b, i, fb, shortcuts[slot])) ++count;
    }
    values[slot] = static_cast<double>(count) / static_cast<double>(h);
  });
  for (std::size_t slot = 0; slot < indices.size(); ++slot) {
    report.scores[indices[slot]] = values[slot];
    report.shortcut_hits += shortcuts[slot];
  }
  return report;
}

}  // namespace maxcon
