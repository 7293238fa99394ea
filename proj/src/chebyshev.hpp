#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include <Eigen/Dense>

namespace maxcon {
class LinearDataset;
}

namespace maxcon::detail {

struct ChebyshevResult {
  Eigen::VectorXd theta;
  /// Dual objective at termination; equals the optimum unless `exceeded`.
  double lower_bound = 0.0;
  /// Stopped early because the dual objective passed `stop_above`.
  bool exceeded = false;
};

ChebyshevResult solve_chebyshev(const LinearDataset& data, std::span<const std::size_t> subset,
                                std::optional<double> stop_above = std::nullopt);

}  // namespace maxcon::detail
