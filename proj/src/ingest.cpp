#include "maxcon/ingest.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace maxcon {

namespace {

struct Transforms {
  Eigen::Matrix3d first = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d second = Eigen::Matrix3d::Identity();
};

Transforms transforms_for(const CorrespondenceSet& corr, bool normalize) {
  Transforms t;
  if (!normalize) return t;
  std::vector<Eigen::Vector2d> a;
  std::vector<Eigen::Vector2d> b;
  for (const auto& m : corr.matches()) {
    a.emplace_back(m.x1, m.y1);
    b.emplace_back(m.x2, m.y2);
  }
  t.first = hartley_transform(a);
  t.second = hartley_transform(b);
  return t;
}

Eigen::Vector2d apply(const Eigen::Matrix3d& t, double x, double y) {
  const Eigen::Vector3d v = t * Eigen::Vector3d(x, y, 1.0);
  return v.head<2>() / v(2);
}

}  // namespace

CorrespondenceSet::CorrespondenceSet(std::vector<Correspondence> matches)
    : matches_(std::move(matches)) {
  for (const auto& m : matches_) {
    if (!std::isfinite(m.x1) || !std::isfinite(m.y1) || !std::isfinite(m.x2) ||
        !std::isfinite(m.y2)) {
      throw std::invalid_argument("correspondence has a non-finite coordinate");
    }
  }
}

CorrespondenceSet CorrespondenceSet::read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("empty correspondence CSV");
  std::string header;
  for (char c : line) {
    if (!std::isspace(static_cast<unsigned char>(c))) header += c;
  }
  if (header != "x1,y1,x2,y2") {
    throw std::invalid_argument("correspondence CSV header must be x1,y1,x2,y2");
  }
  std::vector<Correspondence> matches;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++row;
    std::stringstream ss(line);
    std::string cell;
    double v[4];
    int count = 0;
    while (std::getline(ss, cell, ',')) {
      if (count == 4) break;
      std::size_t used = 0;
      try {
        v[count] = std::stod(cell, &used);
      } catch (const std::exception&) {
        throw std::invalid_argument("correspondence row " + std::to_string(row) +
                                    ": malformed number '" + cell + "'");
      }
      ++count;
    }
    if (count != 4 || std::getline(ss, cell, ',')) {
      throw std::invalid_argument("correspondence row " + std::to_string(row) +
                                  " must have 4 fields");
    }
    matches.push_back({v[0], v[1], v[2], v[3]});
  }
  return CorrespondenceSet(std::move(matches));
}

CorrespondenceSet CorrespondenceSet::read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open correspondence file: " + path);
  return read_csv(in);
}

void CorrespondenceSet::write_csv(std::ostream& out) const {
  const auto old = out.precision(17);
  out << "x1,y1,x2,y2\n";
  for (const auto& m : matches_) out << m.x1 << ',' << m.y1 << ',' << m.x2 << ',' << m.y2 << '\n';
  out.precision(old);
}

Eigen::Matrix3d hartley_transform(const std::vector<Eigen::Vector2d>& points) {
  if (points.empty()) throw std::invalid_argument("no points to normalize");
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  for (const auto& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());
  double mean_dist = 0.0;
  for (const auto& p : points) mean_dist += (p - centroid).norm();
  mean_dist /= static_cast<double>(points.size());
  const double s = mean_dist > 0.0 ? std::sqrt(2.0) / mean_dist : 1.0;
  Eigen::Matrix3d t;
  t << s, 0, -s * centroid.x(), 0, s, -s * centroid.y(), 0, 0, 1;
  return t;
}

LinearDataset linearise_fundamental(const CorrespondenceSet& corr, bool normalize) {
  if (corr.size() < 8) {
    throw std::invalid_argument("fundamental matrix needs at least 8 matches, got " +
                                std::to_string(corr.size()));
  }
  const auto t = transforms_for(corr, normalize);
  Eigen::MatrixXd a(corr.size(), 8);
  Eigen::VectorXd y = Eigen::VectorXd::Constant(corr.size(), -1.0);
  for (std::size_t i = 0; i < corr.size(); ++i) {
    const auto& m = corr.matches()[i];
    const Eigen::Vector2d p1 = apply(t.first, m.x1, m.y1);
    const Eigen::Vector2d p2 = apply(t.second, m.x2, m.y2);
    const double x1 = p1.x(), y1 = p1.y(), x2 = p2.x(), y2 = p2.y();
    a.row(i) << x1 * x2, x1 * y2, x1, y1 * x2, y1 * y2, y1, x2, y2;
  }
  return LinearDataset(std::move(a), std::move(y));
}

LinearDataset linearise_homography(const CorrespondenceSet& corr, bool normalize) {
  if (corr.size() < 4) {
    throw std::invalid_argument("homography needs at least 4 matches, got " +
                                std::to_string(corr.size()));
  }
  const auto t = transforms_for(corr, normalize);
  const auto rows = static_cast<Eigen::Index>(2 * corr.size());
  Eigen::MatrixXd a(rows, 8);
  Eigen::VectorXd y(rows);
  for (std::size_t i = 0; i < corr.size(); ++i) {
    const auto& m = corr.matches()[i];
    const Eigen::Vector2d p1 = apply(t.first, m.x1, m.y1);
    const Eigen::Vector2d p2 = apply(t.second, m.x2, m.y2);
    const double x = p1.x(), v = p1.y(), u2 = p2.x(), v2 = p2.y();
    const auto r = static_cast<Eigen::Index>(2 * i);
    a.row(r) << x, v, 1, 0, 0, 0, -u2 * x, -u2 * v;
    y(r) = u2;
    a.row(r + 1) << 0, 0, 0, x, v, 1, -v2 * x, -v2 * v;
    y(r + 1) = v2;
  }
  return LinearDataset(std::move(a), std::move(y));
}

IndexSet matches_with_both_rows(const IndexSet& rows) {
  IndexSet out;
  for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
    if (rows[k] % 2 == 0 && rows[k + 1] == rows[k] + 1) out.push_back(rows[k] / 2);
  }
  return out;
}

}  // namespace maxcon
