#pragma once

// Two-view correspondences and their linearisation into LinearDataset rows.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "maxcon/models.hpp"

namespace maxcon {

struct Correspondence {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;
};

class CorrespondenceSet {
 public:
  CorrespondenceSet() = default;
  explicit CorrespondenceSet(std::vector<Correspondence> matches);

  std::size_t size() const { return matches_.size(); }
  const std::vector<Correspondence>& matches() const { return matches_; }

  /// CSV with header x1,y1,x2,y2.
  static CorrespondenceSet read_csv(std::istream& in);
  static CorrespondenceSet read_csv_file(const std::string& path);
  void write_csv(std::ostream& out) const;

 private:
  std::vector<Correspondence> matches_;
};

/// Similarity moving the centroid to the origin with mean distance sqrt(2).
Eigen::Matrix3d hartley_transform(const std::vector<Eigen::Vector2d>& points);

/// Rows of p1^T F p2 = 0 with F33 = 1: unknowns (F11,F12,F13,F21,F22,F23,F31,F32),
/// response -1. Needs at least 8 matches.
LinearDataset linearise_fundamental(const CorrespondenceSet& corr, bool normalize = false);

/// Two DLT rows per match for p2 ~ H p1 with H33 = 1: row 2j constrains x2,
/// row 2j+1 constrains y2. Needs at least 4 matches.
LinearDataset linearise_homography(const CorrespondenceSet& corr, bool normalize = false);

/// Matches both of whose rows are in `rows` (an inlier set over the doubled
/// homography rows).
IndexSet matches_with_both_rows(const IndexSet& rows);

}  // namespace maxcon
