#pragma once

// Synthetic monotone functions built from upper-zero specifications, and the
// closed-form weighted influences of their membership classes.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "json.hpp"

#include "maxcon/cube.hpp"
#include "maxcon/vertex.hpp"

namespace maxcon {

using Rational = boost::multiprecision::cpp_rational;

/// Upper zeros b^{k_1..k_n0} of a structured function plus the pseudo upper
/// zeros derived from their pairwise intersections.
class StructureSpec {
 public:
  /// Validates p+1 <= k_i <= n and that no zero lies below another, sorts the
  /// zeros by level (stable), and derives the pseudo zeros.
  StructureSpec(std::size_t n, std::size_t p, std::vector<Vertex> upper_zeros);

  std::size_t n() const { return n_; }
  std::size_t p() const { return p_; }
  const std::vector<Vertex>& upper_zeros() const { return zeros_; }
  const std::vector<Vertex>& pseudo_zeros() const { return pseudo_; }
  /// Indices into upper_zeros() of the pair that produced each pseudo zero.
  const std::vector<std::pair<std::size_t, std::size_t>>& pseudo_parents() const {
    return parents_;
  }
  std::vector<std::size_t> levels() const;
  std::vector<std::size_t> pseudo_levels() const;

  /// No pairwise intersection above level p.
  bool ideal() const { return pseudo_.empty(); }
  /// No intersection of three or more zeros above level p. The closed forms
  /// only hold under this restriction.
  bool pairwise_only() const;

  /// Compact text form "n=8,p=2,zeros=[00111111,10001101]".
  std::string describe() const;
  nlohmann::json to_json() const;
  static StructureSpec from_json(const nlohmann::json& j);

 private:
  std::size_t n_;
  std::size_t p_;
  std::vector<Vertex> zeros_;
  std::vector<Vertex> pseudo_;
  std::vector<std::pair<std::size_t, std::size_t>> parents_;
};

/// f(b) = 0 iff ||b|| <= p or b lies below one of the spec's upper zeros.
class StructuredFunction final : public BooleanFunction {
 public:
  explicit StructuredFunction(StructureSpec spec) : spec_(std::move(spec)) {}

  std::size_t dimension() const override { return spec_.n(); }
  bool operator()(const Vertex& b) const override;
  std::optional<std::size_t> model_dimension() const override { return spec_.p(); }
  const StructureSpec& spec() const { return spec_; }

 private:
  StructureSpec spec_;
};

StructuredFunction make_structured_bf(const StructureSpec& spec);

/// Pairwise bitwise ANDs with level > p, deduplicated, in pair order.
std::vector<Vertex> detect_pseudo_upper_zeros(std::span<const Vertex> upper_zeros, std::size_t p);

/// Maximal vertices with f = 0, by enumeration (n <= kEnumerationCap).
std::vector<Vertex> enumerate_upper_zeros(const TruthTable& table);

/// Bit s < n0: 1 = inlier to upper zero s. Bit n0 + s: 0 = inlier to pseudo
/// zero s (the pseudo-zero convention is inverted).
using Membership = std::vector<bool>;

Membership membership_of(const StructureSpec& spec, std::size_t point);
/// A pseudo bit must be 0 exactly when the point is inlier to both parents.
bool membership_consistent(const StructureSpec& spec, const Membership& m);
/// Points whose membership equals m.
std::vector<std::size_t> membership_class(const StructureSpec& spec, const Membership& m);
std::string to_string(const Membership& m);

enum class Role { inlier, outlier };

template <class T>
T influence_ideal_single(std::size_t n, std::size_t p, std::size_t k1, const T& q, Role role);

/// Ideal spec only; throws for non-ideal specs and empty classes.
template <class T>
T influence_ideal_multi(const StructureSpec& spec, const T& q, const Membership& m);

/// Any pairwise-only spec; reduces to the ideal formula when there are no
/// pseudo zeros. Throws for inconsistent or empty classes.
template <class T>
T influence_nonideal(const StructureSpec& spec, const T& q, const Membership& m);

/// The four classes that can occur with two overlapping zeros (levels
/// k1 <= k2, overlap alpha > p), written as explicit sums. Class bits are
/// (zero 1, zero 2, pseudo).
template <class T>
struct OverlapPairInfluences {
  T in_both;    // (1,1,0)
  T in_first;   // (1,0,1)
  T in_second;  // (0,1,1)
  T out_both;   // (0,0,1)
};

template <class T>
OverlapPairInfluences<T> overlap_pair_influences(std::size_t n, std::size_t p, std::size_t k1,
                                                 std::size_t k2, std::size_t alpha, const T& q);

struct ClassValue {
  Membership membership;
  std::size_t size = 0;
  double value = 0.0;
};

struct OrderingReport {
  std::vector<ClassValue> classes;
  /// Pairs (a, b) with a above b in the membership order but value(a) >= value(b).
  std::vector<std::pair<Membership, Membership>> violations;
  bool ok() const { return violations.empty(); }
};

/// Checks that more inlier memberships always means strictly less influence,
/// across the nonempty classes of an ideal spec.
OrderingReport ordering_check(const StructureSpec& spec, double q);

/// Exact influence of `point` under the rational measure q, from the truth table.
Rational brute_force_influence(const TruthTable& table, std::size_t point, const Rational& q);

struct VerifyRow {
  std::string spec;
  std::string membership;
  Rational q;
  Rational closed_form;
  Rational brute_force;

  double abs_diff() const;
  nlohmann::json to_json() const;
};

/// One row per nonempty membership class of `spec` and per q.
std::vector<VerifyRow> verify_spec(const StructureSpec& spec, std::span<const Rational> qs);

/// Deterministic grid of pairwise-only specs: n <= 16, p in {1,2,3}, up to
/// three zeros, ideal and overlapping, plus the toy specs of the 8-point example.
std::vector<StructureSpec> verification_grid(std::uint64_t seed = 1);

/// The eight-point example with four zeros at levels 6, 4, 3, 3.
StructureSpec toy_spec();

Rational parse_rational(const std::string& text);
std::string to_string(const Rational& r);

extern template double influence_ideal_single<double>(std::size_t, std::size_t, std::size_t,
                                                      const double&, Role);
extern template Rational influence_ideal_single<Rational>(std::size_t, std::size_t, std::size_t,
                                                          const Rational&, Role);
extern template double influence_ideal_multi<double>(const StructureSpec&, const double&,
                                                     const Membership&);
extern template Rational influence_ideal_multi<Rational>(const StructureSpec&, const Rational&,
                                                         const Membership&);
extern template double influence_nonideal<double>(const StructureSpec&, const double&,
                                                  const Membership&);
extern template Rational influence_nonideal<Rational>(const StructureSpec&, const Rational&,
                                                      const Membership&);
extern template OverlapPairInfluences<double> overlap_pair_influences<double>(
    std::size_t, std::size_t, std::size_t, std::size_t, std::size_t, const double&);
extern template OverlapPairInfluences<Rational> overlap_pair_influences<Rational>(
    std::size_t, std::size_t, std::size_t, std::size_t, std::size_t, const Rational&);

}  // namespace maxcon
