#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/dynamic_bitset.hpp>

namespace maxcon {

/// A vertex of the n-dimensional Boolean cube, i.e. a subset of the data.
/// Bit i set means data point i is included. The textual form lists bit 0
/// first ("00111111" includes points 2..7).
class Vertex {
 public:
  Vertex() = default;
  explicit Vertex(std::size_t n) : bits_(n) {}

  static Vertex from_string(std::string_view text);
  static Vertex from_mask(std::uint64_t mask, std::size_t n);
  static Vertex from_indices(std::size_t n, std::span<const std::size_t> indices);
  static Vertex full(std::size_t n);

  std::size_t size() const { return bits_.size(); }
  std::size_t level() const { return bits_.count(); }

  bool test(std::size_t i) const;
  void set(std::size_t i, bool value = true);

  /// Copy with bit i toggled.
  Vertex flipped(std::size_t i) const;

  /// Componentwise a <= b.
  bool precedes(const Vertex& other) const;

  std::vector<std::size_t> indices() const;
  std::uint64_t to_mask() const;
  std::string to_string() const;

  friend Vertex operator&(const Vertex& a, const Vertex& b);
  friend bool operator==(const Vertex& a, const Vertex& b) = default;

 private:
  boost::dynamic_bitset<std::uint64_t> bits_;
};

Vertex flip(const Vertex& v, std::size_t i);

/// A Boolean function on {0,1}^n. f(b) = 1 means "infeasible" throughout
/// this library.
class BooleanFunction {
 public:
  virtual ~BooleanFunction() = default;

  virtual std::size_t dimension() const = 0;
  virtual bool operator()(const Vertex& b) const = 0;

  /// If set to p, every vertex of level <= p is known to evaluate to 0.
  virtual std::optional<std::size_t> model_dimension() const { return std::nullopt; }
};

}  // namespace maxcon
