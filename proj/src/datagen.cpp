#include "maxcon/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "maxcon/parallel.hpp"

namespace maxcon {

namespace {

std::vector<double> to_vector(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::RowVectorXd draw_features(const GenSpec& spec, Rng& rng) {
  std::uniform_real_distribution<double> box(-spec.feature_half_width, spec.feature_half_width);
  Eigen::RowVectorXd a(spec.dim);
  for (std::size_t j = 0; j + 1 < spec.dim; ++j) a(j) = box(rng);
  a(spec.dim - 1) = 1.0;
  return a;
}

double outlier_noise(const GenSpec& spec, Rng& rng) {
  // 1 - U[0,1) lies in (0, 1], which maps onto (min, max].
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double magnitude =
      spec.outlier_noise_min + (1.0 - unit(rng)) * (spec.outlier_noise_max - spec.outlier_noise_min);
  std::bernoulli_distribution sign(0.5);
  return sign(rng) ? magnitude : -magnitude;
}

}  // namespace

std::size_t GenSpec::outliers() const {
  if (outlier_count) return *outlier_count;
  if (outlier_fraction) {
    return static_cast<std::size_t>(std::llround(*outlier_fraction * static_cast<double>(n)));
  }
  return 0;
}

void GenSpec::validate() const {
  if (n == 0) throw std::invalid_argument("n must be positive");
  if (dim == 0) throw std::invalid_argument("dim must be positive");
  if (outlier_fraction && !(*outlier_fraction >= 0.0 && *outlier_fraction < 1.0)) {
    throw std::invalid_argument("outlier fraction must lie in [0, 1)");
  }
  if (outliers() >= n && outliers() > 0) throw std::invalid_argument("outlier count must be < n");
  if (!(inlier_noise > 0.0) || !(outlier_noise_min > 0.0) || !(feature_half_width > 0.0) ||
      !(theta_half_width > 0.0)) {
    throw std::invalid_argument("noise bounds and box widths must be positive");
  }
  if (outlier_noise_min < inlier_noise) {
    throw std::invalid_argument("outlier noise must exclude the inlier band");
  }
  if (!(outlier_noise_max > outlier_noise_min)) {
    throw std::invalid_argument("outlier_noise_max must exceed outlier_noise_min");
  }
  if (ground_truth_theta && static_cast<std::size_t>(ground_truth_theta->size()) != dim) {
    throw std::invalid_argument("ground-truth theta length differs from dim");
  }
}

nlohmann::json GenSpec::to_json() const {
  nlohmann::json j{{"n", n},
                   {"dim", dim},
                   {"outlier_count", outliers()},
                   {"inlier_noise", inlier_noise},
                   {"outlier_noise_min", outlier_noise_min},
                   {"outlier_noise_max", outlier_noise_max},
                   {"feature_half_width", feature_half_width},
                   {"theta_half_width", theta_half_width},
                   {"seed", seed}};
  if (ground_truth_theta) j["ground_truth_theta"] = to_vector(*ground_truth_theta);
  return j;
}

GenSpec GenSpec::from_json(const nlohmann::json& j) {
  GenSpec s;
  s.n = j.value("n", s.n);
  s.dim = j.value("dim", s.dim);
  if (j.contains("outlier_count")) s.outlier_count = j["outlier_count"].get<std::size_t>();
  if (j.contains("outlier_fraction")) s.outlier_fraction = j["outlier_fraction"].get<double>();
  s.inlier_noise = j.value("inlier_noise", s.inlier_noise);
  s.outlier_noise_min = j.value("outlier_noise_min", s.outlier_noise_min);
  s.outlier_noise_max = j.value("outlier_noise_max", s.outlier_noise_max);
  s.feature_half_width = j.value("feature_half_width", s.feature_half_width);
  s.theta_half_width = j.value("theta_half_width", s.theta_half_width);
  s.seed = j.value("seed", s.seed);
  if (j.contains("ground_truth_theta")) {
    const auto v = j["ground_truth_theta"].get<std::vector<double>>();
    s.ground_truth_theta = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  }
  return s;
}

GeneratedData gen_hyperplane_data(const GenSpec& spec) {
  spec.validate();
  Rng rng = make_stream(spec.seed, {0x6Eu});

  ModelParams theta(spec.dim);
  if (spec.ground_truth_theta) {
    theta = *spec.ground_truth_theta;
  } else {
    std::uniform_real_distribution<double> coef(-spec.theta_half_width, spec.theta_half_width);
    for (std::size_t j = 0; j < spec.dim; ++j) theta(j) = coef(rng);
  }

  std::vector<std::size_t> all(spec.n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  IndexSet outliers;
  std::sample(all.begin(), all.end(), std::back_inserter(outliers), spec.outliers(), rng);
  std::vector<bool> is_outlier(spec.n, false);
  for (auto i : outliers) is_outlier[i] = true;

  Eigen::MatrixXd features(spec.n, spec.dim);
  Eigen::VectorXd responses(spec.n);
  std::uniform_real_distribution<double> small(-spec.inlier_noise, spec.inlier_noise);
  IndexSet inliers;
  for (std::size_t i = 0; i < spec.n; ++i) {
    features.row(i) = draw_features(spec, rng);
    const double noise = is_outlier[i] ? outlier_noise(spec, rng) : small(rng);
    responses(i) = features.row(i).dot(theta) + noise;
    if (!is_outlier[i]) inliers.push_back(i);
  }

  GeneratedData out{LinearDataset(std::move(features), std::move(responses)), std::move(inliers),
                    std::move(outliers), theta, {}};
  out.sidecar = {{"generator", "hyperplane"},
                 {"spec", spec.to_json()},
                 {"theta", to_vector(theta)},
                 {"inliers", out.inliers},
                 {"outliers", out.outliers}};
  return out;
}

MultiStructureData gen_multistructure_data(std::span<const GenSpec> specs,
                                           std::size_t gross_outliers, std::uint64_t seed) {
  if (specs.empty()) throw std::invalid_argument("need at least one structure");
  const std::size_t dim = specs.front().dim;
  double band = 0.0;
  for (const auto& s : specs) {
    if (s.dim != dim) throw std::invalid_argument("structures must share the model dimension");
    band = std::max(band, s.inlier_noise);
  }

  std::vector<GeneratedData> parts;
  for (const auto& s : specs) parts.push_back(gen_hyperplane_data(s));
  for (std::size_t a = 0; a < parts.size(); ++a) {
    for (std::size_t b = a + 1; b < parts.size(); ++b) {
      if ((parts[a].theta - parts[b].theta).norm() == 0.0) {
        throw std::invalid_argument("structures must have distinct models");
      }
    }
  }

  Rng rng = make_stream(seed, {0x67u});
  auto near_any = [&](const Eigen::RowVectorXd& a, double y) {
    for (const auto& part : parts) {
      if (std::abs(a.dot(part.theta) - y) <= band) return true;
    }
    return false;
  };

  std::size_t total = gross_outliers;
  for (const auto& part : parts) total += part.data.size();
  Eigen::MatrixXd features(total, dim);
  Eigen::VectorXd responses(total);

  MultiStructureData out{LinearDataset(Eigen::MatrixXd::Zero(1, dim), Eigen::VectorXd::Zero(1)),
                         {}, {}, {}, {}};
  std::size_t row = 0;
  double y_low = 0.0;
  double y_high = 0.0;
  for (std::size_t s = 0; s < parts.size(); ++s) {
    const auto& part = parts[s];
    IndexSet members;
    std::vector<bool> outlier(part.data.size(), false);
    for (auto i : part.outliers) outlier[i] = true;
    for (std::size_t i = 0; i < part.data.size(); ++i, ++row) {
      Eigen::RowVectorXd a = part.data.features().row(i);
      double y = part.data.responses()(i);
      if (outlier[i]) {
        for (int tries = 0; near_any(a, y) && tries < 1000; ++tries) {
          y = a.dot(part.theta) + outlier_noise(specs[s], rng);
        }
        out.gross_outliers.push_back(row);
      } else {
        members.push_back(row);
      }
      features.row(row) = a;
      responses(row) = y;
      y_low = std::min(y_low, y);
      y_high = std::max(y_high, y);
    }
    out.structures.push_back(std::move(members));
    out.thetas.push_back(part.theta);
  }

  GenSpec box = specs.front();
  std::uniform_real_distribution<double> response(y_low - 1.0, y_high + 1.0);
  for (std::size_t g = 0; g < gross_outliers; ++g, ++row) {
    Eigen::RowVectorXd a = draw_features(box, rng);
    double y = response(rng);
    for (int tries = 0; near_any(a, y) && tries < 1000; ++tries) {
      a = draw_features(box, rng);
      y = response(rng);
    }
    features.row(row) = a;
    responses(row) = y;
    out.gross_outliers.push_back(row);
  }

  out.data = LinearDataset(std::move(features), std::move(responses));
  auto specs_json = nlohmann::json::array();
  auto thetas_json = nlohmann::json::array();
  for (std::size_t s = 0; s < specs.size(); ++s) {
    specs_json.push_back(specs[s].to_json());
    thetas_json.push_back(to_vector(out.thetas[s]));
  }
  out.sidecar = {{"generator", "multistructure"},
                 {"specs", specs_json},
                 {"seed", seed},
                 {"thetas", thetas_json},
                 {"structures", out.structures},
                 {"gross_outliers", out.gross_outliers}};
  return out;
}

std::string to_string(TwoViewModel model) {
  return model == TwoViewModel::fundamental ? "fundamental" : "homography";
}

TwoViewModel parse_two_view_model(const std::string& text) {
  if (text == "fundamental") return TwoViewModel::fundamental;
  if (text == "homography") return TwoViewModel::homography;
  throw std::invalid_argument("unknown two-view model: " + text);
}

std::size_t MatchGenSpec::outliers() const {
  if (outlier_count) return *outlier_count;
  if (outlier_fraction) {
    return static_cast<std::size_t>(std::llround(*outlier_fraction * static_cast<double>(matches)));
  }
  return 0;
}

void MatchGenSpec::validate() const {
  const std::size_t minimum = model == TwoViewModel::fundamental ? 8 : 4;
  if (matches < minimum) {
    throw std::invalid_argument(to_string(model) + " needs at least " + std::to_string(minimum) +
                                " matches");
  }
  if (outlier_fraction && !(*outlier_fraction >= 0.0 && *outlier_fraction < 1.0)) {
    throw std::invalid_argument("outlier fraction must lie in [0, 1)");
  }
  if (outliers() >= matches && outliers() > 0) {
    throw std::invalid_argument("outlier count must be < matches");
  }
  if (!(inlier_noise > 0.0) || outlier_noise_min < inlier_noise ||
      !(outlier_noise_max > outlier_noise_min)) {
    throw std::invalid_argument("need 0 < inlier_noise <= outlier_noise_min < outlier_noise_max");
  }
}

nlohmann::json MatchGenSpec::to_json() const {
  return {{"model", to_string(model)},
          {"matches", matches},
          {"outlier_count", outliers()},
          {"inlier_noise", inlier_noise},
          {"outlier_noise_min", outlier_noise_min},
          {"outlier_noise_max", outlier_noise_max},
          {"seed", seed}};
}

MatchGenSpec MatchGenSpec::from_json(const nlohmann::json& j) {
  MatchGenSpec s;
  if (j.contains("model")) s.model = parse_two_view_model(j["model"].get<std::string>());
  s.matches = j.value("matches", s.matches);
  if (j.contains("outlier_count")) s.outlier_count = j["outlier_count"].get<std::size_t>();
  if (j.contains("outlier_fraction")) s.outlier_fraction = j["outlier_fraction"].get<double>();
  s.inlier_noise = j.value("inlier_noise", s.inlier_noise);
  s.outlier_noise_min = j.value("outlier_noise_min", s.outlier_noise_min);
  s.outlier_noise_max = j.value("outlier_noise_max", s.outlier_noise_max);
  s.seed = j.value("seed", s.seed);
  return s;
}

namespace {

double signed_magnitude(double low, double high, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double m = low + (1.0 - unit(rng)) * (high - low);
  return std::bernoulli_distribution(0.5)(rng) ? m : -m;
}

Eigen::Matrix3d random_fundamental(Rng& rng) {
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  for (;;) {
    Eigen::Matrix3d m;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) m(r, c) = coef(rng);
    }
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Vector3d sigma = svd.singularValues();
    sigma(2) = 0.0;
    const Eigen::Matrix3d f = svd.matrixU() * sigma.asDiagonal() * svd.matrixV().transpose();
    if (std::abs(f(2, 2)) > 0.2) return f / f(2, 2);
  }
}

Eigen::Matrix3d random_homography(Rng& rng) {
  std::uniform_real_distribution<double> affine(-0.2, 0.2);
  std::uniform_real_distribution<double> perspective(-0.05, 0.05);
  Eigen::Matrix3d h = Eigen::Matrix3d::Identity();
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 3; ++c) h(r, c) += affine(rng);
  }
  h(2, 0) = perspective(rng);
  h(2, 1) = perspective(rng);
  return h;
}

}  // namespace

GeneratedMatches gen_two_view_matches(const MatchGenSpec& spec) {
  spec.validate();
  Rng rng = make_stream(spec.seed, {0x7Cu});
  const bool fundamental = spec.model == TwoViewModel::fundamental;
  const Eigen::Matrix3d model = fundamental ? random_fundamental(rng) : random_homography(rng);

  std::vector<std::size_t> all(spec.matches);
  std::iota(all.begin(), all.end(), std::size_t{0});
  IndexSet outliers;
  std::sample(all.begin(), all.end(), std::back_inserter(outliers), spec.outliers(), rng);
  std::vector<bool> is_outlier(spec.matches, false);
  for (auto i : outliers) is_outlier[i] = true;

  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  std::uniform_real_distribution<double> small(-spec.inlier_noise, spec.inlier_noise);
  auto row_residual = [&](bool outlier) {
    return outlier ? signed_magnitude(spec.outlier_noise_min, spec.outlier_noise_max, rng)
                   : small(rng);
  };

  std::vector<Correspondence> matches;
  IndexSet inliers;
  for (std::size_t i = 0; i < spec.matches; ++i) {
    if (!is_outlier[i]) inliers.push_back(i);
    if (fundamental) {
      // p1^T F p2 = r fixes y2 once x2 is drawn; redraw poorly conditioned lines.
      for (;;) {
        const Eigen::Vector3d p1(coord(rng), coord(rng), 1.0);
        const Eigen::Vector3d l = model.transpose() * p1;
        const double x2 = coord(rng);
        const double r = row_residual(is_outlier[i]);
        if (std::abs(l(1)) < 0.1) continue;
        const double y2 = (r - l(0) * x2 - l(2)) / l(1);
        if (std::abs(y2) > 2.0) continue;
        matches.push_back({p1(0), p1(1), x2, y2});
        break;
      }
    } else {
      // Row residuals are (Hp)_k - u_k (Hp)_3, so shifting the projection
      // by r / (Hp)_3 sets each row's residual to r.
      const Eigen::Vector3d p(coord(rng), coord(rng), 1.0);
      const Eigen::Vector3d hp = model * p;
      const double u = (hp(0) - row_residual(is_outlier[i])) / hp(2);
      const double v = (hp(1) - row_residual(is_outlier[i])) / hp(2);
      matches.push_back({p(0), p(1), u, v});
    }
  }

  GeneratedMatches out{CorrespondenceSet(std::move(matches)), std::move(inliers),
                       std::move(outliers), model, {}};
  out.sidecar = {{"generator", "two_view"},
                 {"spec", spec.to_json()},
                 {"model_row_major", {model(0, 0), model(0, 1), model(0, 2), model(1, 0),
                                      model(1, 1), model(1, 2), model(2, 0), model(2, 1),
                                      model(2, 2)}},
                 {"inlier_matches", out.inlier_matches},
                 {"outlier_matches", out.outlier_matches}};
  return out;
}

std::string write_with_sidecar(const LinearDataset& data, const nlohmann::json& sidecar,
                               const std::string& csv_path) {
  std::ofstream csv(csv_path);
  if (!csv) throw std::runtime_error("cannot write " + csv_path);
  data.write_csv(csv);
  const std::string json_path =
      std::filesystem::path(csv_path).replace_extension(".json").string();
  std::ofstream side(json_path);
  if (!side) throw std::runtime_error("cannot write " + json_path);
  side << sidecar.dump(2) << '\n';
  return json_path;
}

}  // namespace maxcon
