#include "maxcon/vertex.hpp"

#include <stdexcept>

namespace maxcon {

Vertex Vertex::from_string(std::string_view text) {
  Vertex v(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '1') {
      v.bits_.set(i);
    } else if (text[i] != '0') {
      throw std::invalid_argument("vertex string must contain only 0/1");
    }
  }
  return v;
}

Vertex Vertex::from_mask(std::uint64_t mask, std::size_t n) {
  if (n > 64) throw std::invalid_argument("mask vertices are limited to 64 bits");
  Vertex v(n);
  for (std::size_t i = 0; i < n; ++i) {
    if ((mask >> i) & 1u) v.bits_.set(i);
  }
  return v;
}

Vertex Vertex::from_indices(std::size_t n, std::span<const std::size_t> indices) {
  Vertex v(n);
  for (auto i : indices) v.set(i);
  return v;
}

Vertex Vertex::full(std::size_t n) {
  Vertex v(n);
  v.bits_.set();
  return v;
}

bool Vertex::test(std::size_t i) const {
  if (i >= size()) throw std::out_of_range("vertex index out of range");
  return bits_.test(i);
}

void Vertex::set(std::size_t i, bool value) {
  if (i >= size()) throw std::out_of_range("vertex index out of range");
  bits_.set(i, value);
}

Vertex Vertex::flipped(std::size_t i) const {
  if (i >= size()) throw std::out_of_range("vertex index out of range");
  Vertex v = *this;
  v.bits_.flip(i);
  return v;
}

bool Vertex::precedes(const Vertex& other) const {
  if (size() != other.size()) throw std::invalid_argument("vertex dimension mismatch");
  return bits_.is_subset_of(other.bits_);
}

std::vector<std::size_t> Vertex::indices() const {
  std::vector<std::size_t> out;
  out.reserve(level());
  for (auto i = bits_.find_first(); i != decltype(bits_)::npos; i = bits_.find_next(i)) {
    out.push_back(i);
  }
  return out;
}

std::uint64_t Vertex::to_mask() const {
  if (size() > 64) throw std::invalid_argument("vertex too wide for a 64-bit mask");
  std::uint64_t mask = 0;
  for (auto i = bits_.find_first(); i != decltype(bits_)::npos; i = bits_.find_next(i)) {
    mask |= std::uint64_t{1} << i;
  }
  return mask;
}

std::string Vertex::to_string() const {
  std::string s(size(), '0');
  for (std::size_t i = 0; i < size(); ++i) {
    if (bits_.test(i)) s[i] = '1';
  }
  return s;
}

Vertex operator&(const Vertex& a, const Vertex& b) {
  if (a.size() != b.size()) throw std::invalid_argument("vertex dimension mismatch");
  Vertex v;
  v.bits_ = a.bits_ & b.bits_;
  return v;
}

Vertex flip(const Vertex& v, std::size_t i) { return v.flipped(i); }

}  // namespace maxcon
