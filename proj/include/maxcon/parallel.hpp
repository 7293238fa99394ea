#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <random>

namespace maxcon {

/// Thread count used when a caller passes 0. Reads MAXCON_THREADS, falling
/// back to the hardware concurrency.
unsigned default_thread_count();

/// Runs fn(i) for i in [0, count) on up to `threads` workers (0 = default).
/// The first exception thrown by any task is rethrown after all workers join.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& fn);

/// Derives an independent 64-bit seed from a master seed and a tuple of
/// integers. Identical inputs give identical seeds regardless of call order,
/// which is what makes parallel estimation schedule-independent.
std::uint64_t derive_seed(std::uint64_t master,
                          std::initializer_list<std::uint64_t> salt);

using Rng = std::mt19937_64;

inline Rng make_stream(std::uint64_t master,
                       std::initializer_list<std::uint64_t> salt) {
  return Rng(derive_seed(master, salt));
}

}  // namespace maxcon
