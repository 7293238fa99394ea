#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "maxcon/ingest.hpp"
#include "maxcon/models.hpp"

namespace maxcon {

/// Points around one hyperplane y = a . theta. Features are uniform on
/// [-w, w]^(dim-1) plus a constant 1 column for the intercept.
struct GenSpec {
  std::size_t n = 15;
  std::size_t dim = 2;
  /// Takes precedence over outlier_fraction when both are set.
  std::optional<std::size_t> outlier_count;
  std::optional<double> outlier_fraction;
  double inlier_noise = 0.1;
  /// Outlier noise magnitude lies in (outlier_noise_min, outlier_noise_max]
  /// with a random sign.
  double outlier_noise_min = 0.1;
  double outlier_noise_max = 4.0;
  double feature_half_width = 5.0;
  /// Coefficients of a random theta are uniform on [-w, w].
  double theta_half_width = 1.0;
  std::uint64_t seed = 0;
  std::optional<ModelParams> ground_truth_theta;

  std::size_t outliers() const;
  void validate() const;
  nlohmann::json to_json() const;
  static GenSpec from_json(const nlohmann::json& j);
};

struct GeneratedData {
  LinearDataset data;
  IndexSet inliers;
  IndexSet outliers;
  ModelParams theta;
  nlohmann::json sidecar;
};

GeneratedData gen_hyperplane_data(const GenSpec& spec);

struct MultiStructureData {
  LinearDataset data;
  /// Points generated as inliers of each structure.
  std::vector<IndexSet> structures;
  /// Per-structure outliers and the extra gross outliers.
  IndexSet gross_outliers;
  std::vector<ModelParams> thetas;
  nlohmann::json sidecar;
};

/// Each structure is generated from its own spec (and seed); the extra gross
/// outliers use `seed` and are redrawn while they fall within the inlier band
/// of any structure. Per-structure outliers are redrawn the same way.
MultiStructureData gen_multistructure_data(std::span<const GenSpec> specs,
                                           std::size_t gross_outliers, std::uint64_t seed);

enum class TwoViewModel { fundamental, homography };

std::string to_string(TwoViewModel model);
TwoViewModel parse_two_view_model(const std::string& text);

/// Synthetic correspondences in [-1,1]^2 whose linearised rows have
/// controlled residuals under a known model: inlier rows within
/// inlier_noise, outlier rows with magnitude in (outlier_noise_min,
/// outlier_noise_max]. For homographies both rows of a match share its role.
struct MatchGenSpec {
  TwoViewModel model = TwoViewModel::fundamental;
  std::size_t matches = 100;
  std::optional<std::size_t> outlier_count;
  std::optional<double> outlier_fraction;
  double inlier_noise = 0.01;
  double outlier_noise_min = 0.02;
  double outlier_noise_max = 1.0;
  std::uint64_t seed = 0;

  std::size_t outliers() const;
  void validate() const;
  nlohmann::json to_json() const;
  static MatchGenSpec from_json(const nlohmann::json& j);
};

struct GeneratedMatches {
  CorrespondenceSet matches;
  IndexSet inlier_matches;
  IndexSet outlier_matches;
  /// F or H with the (3,3) entry equal to 1.
  Eigen::Matrix3d model;
  nlohmann::json sidecar;
};

GeneratedMatches gen_two_view_matches(const MatchGenSpec& spec);

/// Writes the dataset CSV and the ground-truth sidecar next to it (same
/// stem, .json extension). Returns the sidecar path.
std::string write_with_sidecar(const LinearDataset& data, const nlohmann::json& sidecar,
                               const std::string& csv_path);

}  // namespace maxcon
