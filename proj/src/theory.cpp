#include "maxcon/theory.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace maxcon {

namespace {

using boost::multiprecision::cpp_int;

cpp_int binomial_int(std::size_t a, std::size_t b) {
  if (b > a) return 0;
  b = std::min(b, a - b);
  cpp_int r = 1;
  for (std::size_t j = 1; j <= b; ++j) {
    r *= a - b + j;
    r /= j;
  }
  return r;
}

template <class T>
T binomial(std::size_t a, std::size_t b) {
  if constexpr (std::is_same_v<T, double>) {
    return binomial_int(a, b).template convert_to<double>();
  } else {
    return T(binomial_int(a, b));
  }
}

template <class T>
T power(const T& base, std::size_t e) {
  T r = T(1);
  for (std::size_t j = 0; j < e; ++j) r *= base;
  return r;
}

template <class T>
void check_q(const T& q) {
  if (!(q > T(0) && q < T(1))) throw std::invalid_argument("q must lie in (0, 1)");
}

// Weight q^l (1-q)^(n-l-1) of a flip pair whose lower vertex has level l.
template <class T>
T pair_weight(std::size_t n, std::size_t l, const T& q) {
  return power(q, l) * power(T(1) - q, n - l - 1);
}

// sum_{l=p+1}^{k} C(k, l) q^l (1-q)^(n-l-1)
template <class T>
T upper_sum(std::size_t n, std::size_t p, std::size_t k, const T& q) {
  T total = T(0);
  for (std::size_t l = p + 1; l <= k; ++l) {
    if (l >= n) break;  // no pair above the top vertex
    total += binomial<T>(k, l) * pair_weight(n, l, q);
  }
  return total;
}

void require_nonempty(const StructureSpec& spec, const Membership& m) {
  if (membership_class(spec, m).empty()) {
    throw std::invalid_argument("membership class " + to_string(m) + " is empty for " +
                                spec.describe());
  }
}

void require_membership_shape(const StructureSpec& spec, const Membership& m) {
  if (m.size() != spec.upper_zeros().size() + spec.pseudo_zeros().size()) {
    throw std::invalid_argument("membership vector has " + std::to_string(m.size()) +
                                " bits, expected " +
                                std::to_string(spec.upper_zeros().size() +
                                               spec.pseudo_zeros().size()));
  }
}

}  // namespace

// ---------------------------------------------------------------------------

StructureSpec::StructureSpec(std::size_t n, std::size_t p, std::vector<Vertex> upper_zeros)
    : n_(n), p_(p), zeros_(std::move(upper_zeros)) {
  if (n < p + 1) throw std::invalid_argument("structure spec needs n >= p + 1");
  for (const auto& z : zeros_) {
    if (z.size() != n) throw std::invalid_argument("upper zero length differs from n");
    if (z.level() < p + 1) {
      throw std::invalid_argument("upper zero " + z.to_string() + " has level <= p");
    }
  }
  std::stable_sort(zeros_.begin(), zeros_.end(),
                   [](const Vertex& a, const Vertex& b) { return a.level() < b.level(); });
  for (std::size_t a = 0; a < zeros_.size(); ++a) {
    for (std::size_t b = 0; b < zeros_.size(); ++b) {
      if (a != b && zeros_[a].precedes(zeros_[b])) {
        throw std::invalid_argument("upper zero " + zeros_[a].to_string() + " lies below " +
                                    zeros_[b].to_string());
      }
    }
  }
  for (std::size_t a = 0; a < zeros_.size(); ++a) {
    for (std::size_t b = a + 1; b < zeros_.size(); ++b) {
      const Vertex meet = zeros_[a] & zeros_[b];
      if (meet.level() <= p_) continue;
      if (std::find(pseudo_.begin(), pseudo_.end(), meet) != pseudo_.end()) continue;
      pseudo_.push_back(meet);
      parents_.emplace_back(a, b);
    }
  }
}

std::vector<std::size_t> StructureSpec::levels() const {
  std::vector<std::size_t> out;
  for (const auto& z : zeros_) out.push_back(z.level());
  return out;
}

std::vector<std::size_t> StructureSpec::pseudo_levels() const {
  std::vector<std::size_t> out;
  for (const auto& z : pseudo_) out.push_back(z.level());
  return out;
}

bool StructureSpec::pairwise_only() const {
  for (std::size_t a = 0; a < zeros_.size(); ++a) {
    for (std::size_t b = a + 1; b < zeros_.size(); ++b) {
      for (std::size_t c = b + 1; c < zeros_.size(); ++c) {
        if ((zeros_[a] & zeros_[b] & zeros_[c]).level() > p_) return false;
      }
    }
  }
  return true;
}

std::string StructureSpec::describe() const {
  std::ostringstream out;
  out << "n=" << n_ << ",p=" << p_ << ",zeros=[";
  for (std::size_t s = 0; s < zeros_.size(); ++s) {
    if (s) out << ',';
    out << zeros_[s].to_string();
  }
  out << ']';
  return out.str();
}

nlohmann::json StructureSpec::to_json() const {
  nlohmann::json j;
  j["n"] = n_;
  j["p"] = p_;
  j["upper_zeros"] = nlohmann::json::array();
  for (const auto& z : zeros_) j["upper_zeros"].push_back(z.to_string());
  j["pseudo_zeros"] = nlohmann::json::array();
  for (const auto& z : pseudo_) j["pseudo_zeros"].push_back(z.to_string());
  return j;
}

StructureSpec StructureSpec::from_json(const nlohmann::json& j) {
  std::vector<Vertex> zeros;
  for (const auto& z : j.at("upper_zeros")) zeros.push_back(Vertex::from_string(z.get<std::string>()));
  return StructureSpec(j.at("n").get<std::size_t>(), j.at("p").get<std::size_t>(),
                       std::move(zeros));
}

bool StructuredFunction::operator()(const Vertex& b) const {
  if (b.size() != spec_.n()) throw std::invalid_argument("vertex length differs from n");
  if (b.level() <= spec_.p()) return false;
  for (const auto& z : spec_.upper_zeros()) {
    if (b.precedes(z)) return false;
  }
  return true;
}

StructuredFunction make_structured_bf(const StructureSpec& spec) { return StructuredFunction(spec); }

std::vector<Vertex> detect_pseudo_upper_zeros(std::span<const Vertex> upper_zeros, std::size_t p) {
  std::vector<Vertex> out;
  for (std::size_t a = 0; a < upper_zeros.size(); ++a) {
    for (std::size_t b = a + 1; b < upper_zeros.size(); ++b) {
      const Vertex meet = upper_zeros[a] & upper_zeros[b];
      if (meet.level() > p && std::find(out.begin(), out.end(), meet) == out.end()) {
        out.push_back(meet);
      }
    }
  }
  return out;
}

std::vector<Vertex> enumerate_upper_zeros(const TruthTable& table) {
  const std::size_t n = table.dimension();
  std::vector<Vertex> out;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
    if (table.at(m)) continue;
    bool maximal = true;
    for (std::size_t i = 0; i < n && maximal; ++i) {
      const std::uint64_t bit = std::uint64_t{1} << i;
      if (!(m & bit) && !table.at(m | bit)) maximal = false;
    }
    if (maximal) out.push_back(Vertex::from_mask(m, n));
  }
  return out;
}

// ---------------------------------------------------------------------------

Membership membership_of(const StructureSpec& spec, std::size_t point) {
  if (point >= spec.n()) throw std::out_of_range("point index out of range");
  Membership m;
  for (const auto& z : spec.upper_zeros()) m.push_back(z.test(point));
  for (const auto& z : spec.pseudo_zeros()) m.push_back(!z.test(point));
  return m;
}

bool membership_consistent(const StructureSpec& spec, const Membership& m) {
  require_membership_shape(spec, m);
  const std::size_t n0 = spec.upper_zeros().size();
  for (std::size_t t = 0; t < spec.pseudo_zeros().size(); ++t) {
    const auto [a, b] = spec.pseudo_parents()[t];
    const bool inlier_to_both = m[a] && m[b];
    if (m[n0 + t] == inlier_to_both) return false;
  }
  return true;
}

std::vector<std::size_t> membership_class(const StructureSpec& spec, const Membership& m) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < spec.n(); ++i) {
    if (membership_of(spec, i) == m) out.push_back(i);
  }
  return out;
}

std::string to_string(const Membership& m) {
  std::string s = "(";
  for (std::size_t j = 0; j < m.size(); ++j) {
    if (j) s += ',';
    s += m[j] ? '1' : '0';
  }
  return s + ")";
}

// ---------------------------------------------------------------------------

template <class T>
T influence_ideal_single(std::size_t n, std::size_t p, std::size_t k1, const T& q, Role role) {
  if (k1 < p + 1 || k1 > n) throw std::invalid_argument("need p + 1 <= k1 <= n");
  check_q(q);
  const T level_p = pair_weight(n, p, q);
  if (role == Role::inlier) {
    return (binomial<T>(n - 1, p) - binomial<T>(k1 - 1, p)) * level_p;
  }
  if (k1 == n) throw std::invalid_argument("no outliers when the structure covers every point");
  return binomial<T>(n - 1, p) * level_p + upper_sum(n, p, k1, q);
}

template <class T>
T influence_nonideal(const StructureSpec& spec, const T& q, const Membership& m) {
  check_q(q);
  require_membership_shape(spec, m);
  if (!spec.pairwise_only()) {
    throw std::invalid_argument("closed forms need pairwise-only overlaps: " + spec.describe());
  }
  if (!membership_consistent(spec, m)) {
    throw std::invalid_argument("membership " + to_string(m) +
                                " contradicts the pseudo-zero parents");
  }
  require_nonempty(spec, m);

  const std::size_t n = spec.n();
  const std::size_t p = spec.p();
  const std::size_t n0 = spec.upper_zeros().size();
  const auto ks = spec.levels();
  const auto alphas = spec.pseudo_levels();

  T coefficient = binomial<T>(n - 1, p);
  T upper = T(0);
  for (std::size_t s = 0; s < n0; ++s) {
    if (m[s]) {
      coefficient -= binomial<T>(ks[s] - 1, p);
    } else {
      upper += upper_sum(n, p, ks[s], q);
    }
  }
  for (std::size_t t = 0; t < alphas.size(); ++t) {
    if (!m[n0 + t]) {
      coefficient += binomial<T>(alphas[t] - 1, p);
    } else {
      upper -= upper_sum(n, p, alphas[t], q);
    }
  }
  return coefficient * pair_weight(n, p, q) + upper;
}

template <class T>
T influence_ideal_multi(const StructureSpec& spec, const T& q, const Membership& m) {
  if (!spec.ideal()) {
    throw std::invalid_argument("spec has overlapping structures: " + spec.describe());
  }
  return influence_nonideal(spec, q, m);
}

template <class T>
OverlapPairInfluences<T> overlap_pair_influences(std::size_t n, std::size_t p, std::size_t k1,
                                                 std::size_t k2, std::size_t alpha, const T& q) {
  check_q(q);
  if (k1 < p + 1 || k1 > k2 || k2 > n) throw std::invalid_argument("need p + 1 <= k1 <= k2 <= n");
  if (alpha <= p || alpha >= k1) throw std::invalid_argument("need p < alpha < k1");
  if (k1 + k2 - alpha > n) throw std::invalid_argument("structures do not fit in n points");

  const T w = pair_weight(n, p, q);
  const T all = binomial<T>(n - 1, p);
  const T c1 = binomial<T>(k1 - 1, p);
  const T c2 = binomial<T>(k2 - 1, p);
  const T ca = binomial<T>(alpha - 1, p);
  const T u1 = upper_sum(n, p, k1, q);
  const T u2 = upper_sum(n, p, k2, q);
  const T ua = upper_sum(n, p, alpha, q);

  OverlapPairInfluences<T> out;
  out.in_both = (all - c1 - c2 + ca) * w;
  out.in_first = (all - c1) * w + u2 - ua;
  out.in_second = (all - c2) * w + u1 - ua;
  out.out_both = all * w + u1 + u2 - ua;
  return out;
}

template double influence_ideal_single<double>(std::size_t, std::size_t, std::size_t,
                                               const double&, Role);
template Rational influence_ideal_single<Rational>(std::size_t, std::size_t, std::size_t,
                                                   const Rational&, Role);
template double influence_ideal_multi<double>(const StructureSpec&, const double&,
                                              const Membership&);
template Rational influence_ideal_multi<Rational>(const StructureSpec&, const Rational&,
                                                  const Membership&);
template double influence_nonideal<double>(const StructureSpec&, const double&,
                                           const Membership&);
template Rational influence_nonideal<Rational>(const StructureSpec&, const Rational&,
                                               const Membership&);
template OverlapPairInfluences<double> overlap_pair_influences<double>(
    std::size_t, std::size_t, std::size_t, std::size_t, std::size_t, const double&);
template OverlapPairInfluences<Rational> overlap_pair_influences<Rational>(
    std::size_t, std::size_t, std::size_t, std::size_t, std::size_t, const Rational&);

// ---------------------------------------------------------------------------

OrderingReport ordering_check(const StructureSpec& spec, double q) {
  if (!spec.ideal()) throw std::invalid_argument("ordering check needs an ideal spec");
  OrderingReport report;
  std::map<Membership, std::size_t> sizes;
  for (std::size_t i = 0; i < spec.n(); ++i) ++sizes[membership_of(spec, i)];
  for (const auto& [m, size] : sizes) {
    report.classes.push_back({m, size, influence_ideal_multi(spec, q, m)});
  }
  for (const auto& a : report.classes) {
    for (const auto& b : report.classes) {
      if (a.membership == b.membership) continue;
      bool above = true;
      for (std::size_t s = 0; s < a.membership.size(); ++s) {
        if (a.membership[s] < b.membership[s]) above = false;
      }
      if (above && !(a.value < b.value)) report.violations.emplace_back(a.membership, b.membership);
    }
  }
  return report;
}

Rational brute_force_influence(const TruthTable& table, std::size_t point, const Rational& q) {
  const auto counts = table.sensitive_counts_by_level(point);
  return level_polynomial<Rational>(counts, table.dimension(), q);
}

double VerifyRow::abs_diff() const {
  const Rational d = closed_form - brute_force;
  return (d < 0 ? Rational(-d) : d).convert_to<double>();
}

nlohmann::json VerifyRow::to_json() const {
  return {{"spec", spec},
          {"class", membership},
          {"q", to_string(q)},
          {"closed_form", to_string(closed_form)},
          {"brute_force", to_string(brute_force)},
          {"abs_diff", abs_diff()}};
}

std::vector<VerifyRow> verify_spec(const StructureSpec& spec, std::span<const Rational> qs) {
  const auto table = TruthTable::tabulate(make_structured_bf(spec));
  std::map<Membership, std::vector<std::size_t>> classes;
  for (std::size_t i = 0; i < spec.n(); ++i) classes[membership_of(spec, i)].push_back(i);

  std::vector<VerifyRow> rows;
  for (const auto& q : qs) {
    for (const auto& [m, points] : classes) {
      VerifyRow row;
      row.spec = spec.describe();
      row.membership = to_string(m);
      row.q = q;
      row.closed_form = influence_nonideal(spec, q, m);
      // Report the member that disagrees most, so one row covers the class.
      bool first = true;
      for (auto i : points) {
        const Rational bf = brute_force_influence(table, i, q);
        const Rational d = bf - row.closed_form;
        const Rational old = row.brute_force - row.closed_form;
        if (first || (d < 0 ? -d : d) > (old < 0 ? -old : old)) row.brute_force = bf;
        first = false;
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

StructureSpec toy_spec() {
  return StructureSpec(8, 2,
                       {Vertex::from_string("00111111"), Vertex::from_string("10001101"),
                        Vertex::from_string("01100001"), Vertex::from_string("11010000")});
}

std::vector<StructureSpec> verification_grid(std::uint64_t seed) {
  std::vector<StructureSpec> out;
  out.push_back(toy_spec());
  out.emplace_back(8, 2, std::vector<Vertex>{Vertex::from_string("00111111")});
  out.emplace_back(8, 2,
                   std::vector<Vertex>{Vertex::from_string("10001101"),
                                       Vertex::from_string("00111111")});
  out.emplace_back(12, 2,
                   std::vector<Vertex>{Vertex::from_string("111110000000"),
                                       Vertex::from_string("000001111110")});

  std::mt19937_64 rng(seed);
  for (std::size_t p = 1; p <= 3; ++p) {
    for (std::size_t n = 8; n <= 16; n += 2) {
      for (std::size_t count = 1; count <= 3; ++count) {
        for (bool overlapping : {false, true}) {
          if (overlapping && count == 1) continue;
          std::uniform_int_distribution<std::size_t> level(p + 1, std::max(p + 1, 2 * n / 3));
          for (int attempt = 0; attempt < 2000; ++attempt) {
            std::vector<Vertex> zeros;
            std::vector<std::size_t> order(n);
            for (std::size_t i = 0; i < n; ++i) order[i] = i;
            for (std::size_t s = 0; s < count; ++s) {
              std::shuffle(order.begin(), order.end(), rng);
              const std::size_t k = level(rng);
              zeros.push_back(Vertex::from_indices(
                  n, std::span<const std::size_t>(order.data(), k)));
            }
            try {
              StructureSpec spec(n, p, zeros);
              if (!spec.pairwise_only() || spec.ideal() == overlapping) continue;
              out.push_back(std::move(spec));
              break;
            } catch (const std::invalid_argument&) {
              // zeros not an antichain; draw again
            }
          }
        }
      }
    }
  }
  return out;
}

Rational parse_rational(const std::string& text) {
  const auto slash = text.find('/');
  if (slash != std::string::npos) {
    const cpp_int num(text.substr(0, slash));
    const cpp_int den(text.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator in " + text);
    return Rational(num, den);
  }
  const auto dot = text.find('.');
  if (dot == std::string::npos) return Rational(cpp_int(text));
  const std::string whole = text.substr(0, dot);
  const std::string frac = text.substr(dot + 1);
  if (frac.find_first_not_of("0123456789") != std::string::npos) {
    throw std::invalid_argument("malformed rational: " + text);
  }
  const bool negative = !whole.empty() && whole[0] == '-';
  const cpp_int w(whole.empty() || whole == "-" ? "0" : whole);
  const cpp_int f(frac.empty() ? "0" : frac);
  const cpp_int scale = boost::multiprecision::pow(cpp_int(10), static_cast<unsigned>(frac.size()));
  const cpp_int abs_num = (w < 0 ? cpp_int(-w) : w) * scale + f;
  return Rational(negative ? cpp_int(-abs_num) : abs_num, scale);
}

std::string to_string(const Rational& r) {
  const auto num = boost::multiprecision::numerator(r);
  const auto den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

}  // namespace maxcon
