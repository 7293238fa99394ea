#include "maxcon/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>

namespace maxcon {

namespace {

std::map<std::size_t, std::size_t> positions(const Ranking& r) {
  std::map<std::size_t, std::size_t> pos;
  for (std::size_t j = 0; j < r.size(); ++j) {
    if (!pos.emplace(r[j], j + 1).second) {
      throw std::invalid_argument("ranking repeats index " + std::to_string(r[j]));
    }
  }
  return pos;
}

Ranking rank_pairs(std::vector<std::pair<double, std::size_t>> entries, std::size_t k) {
  if (k == 0) throw std::invalid_argument("k must be positive");
  if (k > entries.size()) {
    throw std::invalid_argument("k = " + std::to_string(k) + " exceeds the " +
                                std::to_string(entries.size()) + " scored indices");
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto& x, const auto& y) { return x.first > y.first; });
  Ranking out;
  for (std::size_t j = 0; j < k; ++j) out.push_back(entries[j].second);
  return out;
}

}  // namespace

double sf_distance(const Ranking& a, const Ranking& b, SfDomain domain) {
  if (a.size() != b.size()) throw std::invalid_argument("rankings differ in length");
  if (a.empty()) throw std::invalid_argument("rankings must be nonempty");
  const std::size_t k = a.size();
  const auto pa = positions(a);
  const auto pb = positions(b);
  const std::size_t absent = k + 1;

  double total = 0.0;
  auto add = [&](std::size_t z) {
    const auto ia = pa.find(z);
    const auto ib = pb.find(z);
    const std::size_t x = ia == pa.end() ? absent : ia->second;
    const std::size_t y = ib == pb.end() ? absent : ib->second;
    total += static_cast<double>(x > y ? x - y : y - x);
  };
  for (const auto& [z, _] : pa) {
    if (domain == SfDomain::union_of_sets || pb.count(z)) add(z);
  }
  if (domain == SfDomain::union_of_sets) {
    for (const auto& [z, _] : pb) {
      if (!pa.count(z)) add(z);
    }
  }
  return total / static_cast<double>(k * (k + 1));
}

Ranking top_k(std::span<const std::optional<double>> scores, std::size_t k) {
  std::vector<std::pair<double, std::size_t>> entries;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i]) entries.emplace_back(*scores[i], i);
  }
  return rank_pairs(std::move(entries), k);
}

Ranking top_k(std::span<const double> scores, std::size_t k) {
  std::vector<std::pair<double, std::size_t>> entries;
  for (std::size_t i = 0; i < scores.size(); ++i) entries.emplace_back(scores[i], i);
  return rank_pairs(std::move(entries), k);
}

long consensus_error(std::size_t found, std::size_t ground_truth) {
  if (found > ground_truth) {
    throw std::logic_error("consensus " + std::to_string(found) + " exceeds the optimum " +
                           std::to_string(ground_truth));
  }
  return static_cast<long>(ground_truth - found);
}

Summary summarize(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("cannot summarize an empty sample");
  Summary s;
  s.count = values.size();
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  s.min = *lo;
  s.max = *hi;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(s.count);
  if (s.count > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.variance = ss / static_cast<double>(s.count - 1);
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = s.count / 2;
  s.median = s.count % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  return s;
}

}  // namespace maxcon
