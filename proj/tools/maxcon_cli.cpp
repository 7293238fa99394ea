// maxcon: dataset generation, single fits, influence reports, closed-form
// verification, batch experiments and two-view linearisation.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "maxcon/cube.hpp"
#include "maxcon/datagen.hpp"
#include "maxcon/experiment.hpp"
#include "maxcon/ingest.hpp"
#include "maxcon/models.hpp"
#include "maxcon/parallel.hpp"
#include "maxcon/solvers.hpp"
#include "maxcon/theory.hpp"

namespace {

using nlohmann::json;
using namespace maxcon;

void emit(const json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct GenArgs {
  std::string kind = "hyperplane";
  std::size_t n = 15;
  std::size_t dim = 2;
  std::optional<std::size_t> outliers;
  std::optional<double> fraction;
  std::optional<double> inlier_noise;
  std::uint64_t seed = 0;
  std::string out;
};

void run_gen(const GenArgs& a) {
  if (a.out.empty()) throw std::invalid_argument("gen needs --out");
  if (a.kind == "hyperplane") {
    GenSpec g;
    g.n = a.n;
    g.dim = a.dim;
    g.outlier_count = a.outliers;
    g.outlier_fraction = a.fraction;
    if (a.inlier_noise) {
      g.inlier_noise = *a.inlier_noise;
      g.outlier_noise_min = std::max(g.outlier_noise_min, g.inlier_noise);
    }
    g.seed = a.seed;
    const auto d = gen_hyperplane_data(g);
    const auto side = write_with_sidecar(d.data, d.sidecar, a.out);
    emit({{"data", a.out}, {"sidecar", side}, {"inliers", d.inliers.size()}}, "");
    return;
  }
  MatchGenSpec m;
  m.model = parse_two_view_model(a.kind);
  m.matches = a.n;
  m.outlier_count = a.outliers;
  m.outlier_fraction = a.fraction;
  if (a.inlier_noise) {
    m.inlier_noise = *a.inlier_noise;
    m.outlier_noise_min = std::max(m.outlier_noise_min, m.inlier_noise);
  }
  m.seed = a.seed;
  const auto g = gen_two_view_matches(m);
  std::ofstream csv(a.out);
  if (!csv) throw std::runtime_error("cannot write " + a.out);
  g.matches.write_csv(csv);
  const std::string side = std::filesystem::path(a.out).replace_extension(".json").string();
  emit(g.sidecar, side);
  emit({{"data", a.out}, {"sidecar", side}, {"inlier_matches", g.inlier_matches.size()}}, "");
}

struct FitArgs {
  std::string data;
  double eps = 0.1;
  std::string method = "wi";
  double q = 0.3;
  std::size_t samples = 300;
  std::uint64_t seed = 0;
  std::string mode = "paper";
  std::string expansion = "post_loop";
  std::size_t level_offset = 1;
  bool no_range_check = false;
  std::optional<std::size_t> iterations;
  std::optional<double> time_ms;
  std::optional<double> confidence;
  std::optional<std::uint64_t> max_evaluations;
  std::size_t depth = 2;
  unsigned threads = 0;
  std::string out;
};

void run_fit(const FitArgs& a) {
  const auto data = LinearDataset::read_csv_file(a.data);
  SolveResult r;
  if (a.method == "wi" || a.method == "mbf") {
    SolverConfig c;
    c.epsilon = a.eps;
    c.q = a.q;
    c.h = a.samples;
    c.seed = a.seed;
    c.estimator_mode = parse_estimator_mode(a.mode);
    c.local_expansion = parse_local_expansion(a.expansion);
    c.hamming_level_offset = a.level_offset;
    c.enforce_ranges = !a.no_range_check;
    c.time_budget_ms = a.time_ms;
    c.max_evaluations = a.max_evaluations;
    c.threads = a.threads == 0 ? default_thread_count() : a.threads;
    r = a.method == "wi" ? wi_maxcon(data, c) : mbf_maxcon(data, c);
  } else if (a.method == "ransac" || a.method == "lo-ransac") {
    RansacBudget b;
    b.iterations = a.iterations;
    b.time_ms = a.time_ms;
    b.confidence = a.confidence;
    b.max_evaluations = a.max_evaluations;
    r = a.method == "ransac" ? ransac(data, a.eps, b, a.seed)
                             : lo_ransac(data, a.eps, b, a.seed, a.depth);
  } else if (a.method == "exact") {
    r = exact_solve(data, a.eps);
  } else {
    throw std::invalid_argument("unknown method: " + a.method);
  }
  emit(r.to_json(), a.out);
}

struct InfluenceArgs {
  std::string data;
  double eps = 0.1;
  std::string measure = "exact";
  double q = 0.3;
  std::size_t samples = 300;
  std::size_t level = 0;
  std::uint64_t seed = 0;
  std::string mode = "paper";
  std::string indices;
  unsigned threads = 0;
  std::string out;
};

void run_influence(const InfluenceArgs& a) {
  const auto data = LinearDataset::read_csv_file(a.data);
  const FeasibilityOracle oracle(data, a.eps);
  std::vector<std::size_t> idx;
  if (a.indices.empty()) {
    idx.resize(data.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
  } else {
    for (const auto& s : split(a.indices, ',')) idx.push_back(std::stoul(s));
  }
  const unsigned threads = a.threads == 0 ? default_thread_count() : a.threads;
  InfluenceReport r;
  if (a.measure == "exact") {
    r = exact_influence_report(TruthTable::tabulate(oracle, threads), a.q);
  } else if (a.measure == "bernoulli") {
    r = estimate_influence_bernoulli(oracle, idx, a.q, a.samples, a.seed,
                                     parse_estimator_mode(a.mode), threads);
  } else if (a.measure == "hamming") {
    if (a.level == 0) throw std::invalid_argument("hamming influence needs --level");
    r = estimate_influence_hamming(oracle, idx, a.level, a.samples, a.seed, threads);
  } else {
    throw std::invalid_argument("unknown measure: " + a.measure + " (exact, bernoulli, hamming)");
  }
  auto j = r.to_json();
  j["oracle_evaluations"] = oracle.evaluations();
  emit(j, a.out);
}

struct TheoryArgs {
  std::string spec_file;
  std::size_t n = 0;
  std::size_t p = 0;
  std::string zeros;
  std::string qs = "1/5,1/2,4/5";
  std::uint64_t grid_seed = 1;
  std::string out;
};

void run_theory_verify(const TheoryArgs& a) {
  std::vector<StructureSpec> specs;
  if (!a.spec_file.empty()) {
    std::ifstream in(a.spec_file);
    if (!in) throw std::runtime_error("cannot open " + a.spec_file);
    const auto j = json::parse(in);
    if (j.is_array()) {
      for (const auto& s : j) specs.push_back(StructureSpec::from_json(s));
    } else {
      specs.push_back(StructureSpec::from_json(j));
    }
  } else if (!a.zeros.empty()) {
    std::vector<Vertex> zs;
    for (const auto& z : split(a.zeros, ',')) zs.push_back(Vertex::from_string(z));
    const std::size_t n = a.n == 0 ? zs.front().size() : a.n;
    specs.emplace_back(n, a.p, std::move(zs));
  } else {
    specs = verification_grid(a.grid_seed);
  }
  std::vector<Rational> qs;
  for (const auto& s : split(a.qs, ',')) qs.push_back(parse_rational(s));

  json rows = json::array();
  double worst = 0.0;
  for (const auto& spec : specs) {
    for (const auto& row : verify_spec(spec, qs)) {
      worst = std::max(worst, row.abs_diff());
      rows.push_back(row.to_json());
    }
  }
  emit({{"rows", rows}, {"specs", specs.size()}, {"max_abs_diff", worst}}, a.out);
}

struct ExperimentArgs {
  std::string config;
  std::string out;
  std::optional<unsigned> threads;
};

void run_experiment_cmd(const ExperimentArgs& a) {
  auto c = ExperimentConfig::from_file(a.config);
  if (!a.out.empty()) c.output = a.out;
  if (a.threads) c.threads = *a.threads;
  if (c.output.empty()) throw std::invalid_argument("experiment needs an output prefix (config or --out)");
  const auto report = run_experiment(c);
  const auto paths = write_report(report, c.output);
  emit({{"outputs", paths},
        {"records", c.kind == ExperimentKind::compare ? report.runs.size() : report.sf.size()},
        {"skipped_runs", report.skipped_runs}},
       "");
}

struct IngestArgs {
  std::string in;
  std::string out;
  bool normalize = false;
};

void run_ingest(const IngestArgs& a, bool fundamental) {
  const auto corr = CorrespondenceSet::read_csv_file(a.in);
  const auto data = fundamental ? linearise_fundamental(corr, a.normalize)
                                : linearise_homography(corr, a.normalize);
  std::ofstream out(a.out);
  if (!out) throw std::runtime_error("cannot write " + a.out);
  data.write_csv(out);
  emit({{"matches", corr.size()}, {"rows", data.size()}, {"dimension", data.dimension()},
        {"out", a.out}},
       "");
}

int fail(const std::string& type, const std::string& message, int code) {
  std::cerr << json{{"error", {{"type", type}, {"message", message}}}}.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maximum consensus via weighted influences"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a seeded dataset with a ground-truth sidecar");
  gen_cmd->add_option("--kind", gen.kind, "hyperplane, fundamental or homography")
      ->check(CLI::IsMember({"hyperplane", "fundamental", "homography"}));
  gen_cmd->add_option("--n", gen.n, "Points (matches for two-view kinds)");
  gen_cmd->add_option("--dim", gen.dim, "Model dimension including the intercept");
  gen_cmd->add_option("--outliers", gen.outliers, "Outlier count");
  gen_cmd->add_option("--outlier-fraction", gen.fraction, "Outlier fraction, rounded to a count");
  gen_cmd->add_option("--inlier-noise", gen.inlier_noise, "Inlier residual bound");
  gen_cmd->add_option("--seed", gen.seed);
  gen_cmd->add_option("--out", gen.out, "CSV path; the sidecar goes next to it")->required();

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Solve one instance");
  fit_cmd->add_option("--data", fit.data, "Dataset CSV (features..., y)")->required();
  fit_cmd->add_option("--eps", fit.eps, "Inlier threshold");
  fit_cmd->add_option("--method", fit.method)
      ->check(CLI::IsMember({"wi", "mbf", "ransac", "lo-ransac", "exact"}));
  fit_cmd->add_option("--q", fit.q, "Bernoulli parameter (wi)");
  fit_cmd->add_option("--samples", fit.samples, "Samples per influence estimate (wi, mbf)");
  fit_cmd->add_option("--seed", fit.seed);
  fit_cmd->add_option("--mode", fit.mode, "Estimator mode: paper or unbiased");
  fit_cmd->add_option("--expansion", fit.expansion, "post_loop, per_iteration or off");
  fit_cmd->add_option("--level-offset", fit.level_offset, "MBF level is p + 1 + offset");
  fit_cmd->add_flag("--no-range-check", fit.no_range_check, "Allow q and h outside the advised ranges");
  fit_cmd->add_option("--iterations", fit.iterations, "RANSAC hypotheses");
  fit_cmd->add_option("--time-ms", fit.time_ms, "Wall-clock budget");
  fit_cmd->add_option("--confidence", fit.confidence, "RANSAC adaptive stop");
  fit_cmd->add_option("--max-evaluations", fit.max_evaluations, "Oracle evaluation budget");
  fit_cmd->add_option("--depth", fit.depth, "Lo-RANSAC refit depth");
  fit_cmd->add_option("--threads", fit.threads, "0 = MAXCON_THREADS or hardware");
  fit_cmd->add_option("--out", fit.out, "JSON result path (default stdout)");

  InfluenceArgs inf;
  auto* inf_cmd = app.add_subcommand("influence", "Report exact or estimated influences");
  inf_cmd->add_option("--data", inf.data)->required();
  inf_cmd->add_option("--eps", inf.eps);
  inf_cmd->add_option("--measure", inf.measure, "exact, bernoulli or hamming");
  inf_cmd->add_option("--q", inf.q);
  inf_cmd->add_option("--samples", inf.samples);
  inf_cmd->add_option("--level", inf.level, "Hamming level");
  inf_cmd->add_option("--seed", inf.seed);
  inf_cmd->add_option("--mode", inf.mode);
  inf_cmd->add_option("--indices", inf.indices, "Comma-separated points (default all)");
  inf_cmd->add_option("--threads", inf.threads);
  inf_cmd->add_option("--out", inf.out);

  TheoryArgs th;
  auto* theory_cmd = app.add_subcommand("theory", "Closed-form influence checks");
  theory_cmd->require_subcommand(1);
  auto* verify_cmd = theory_cmd->add_subcommand("verify", "Closed forms against brute force");
  verify_cmd->add_option("--spec", th.spec_file, "JSON spec or array of specs");
  verify_cmd->add_option("--n", th.n);
  verify_cmd->add_option("--p", th.p);
  verify_cmd->add_option("--zeros", th.zeros, "Comma-separated upper zeros as bit strings");
  verify_cmd->add_option("--q", th.qs, "Comma-separated rationals");
  verify_cmd->add_option("--grid-seed", th.grid_seed);
  verify_cmd->add_option("--out", th.out);

  ExperimentArgs ex;
  auto* ex_cmd = app.add_subcommand("experiment", "Run a config-driven batch");
  ex_cmd->add_option("--config", ex.config)->required();
  ex_cmd->add_option("--out", ex.out, "Output prefix (overrides the config)");
  ex_cmd->add_option("--threads", ex.threads);

  IngestArgs fm;
  auto* fm_cmd = app.add_subcommand("ingest-fm", "Linearise correspondences for F");
  fm_cmd->add_option("--in", fm.in)->required();
  fm_cmd->add_option("--out", fm.out)->required();
  fm_cmd->add_flag("--normalize", fm.normalize, "Hartley-normalise both views first");
  IngestArgs hm;
  auto* h_cmd = app.add_subcommand("ingest-h", "Linearise correspondences for H (two rows per match)");
  h_cmd->add_option("--in", hm.in)->required();
  h_cmd->add_option("--out", hm.out)->required();
  h_cmd->add_flag("--normalize", hm.normalize, "Hartley-normalise both views first");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  }

  try {
    if (*gen_cmd) run_gen(gen);
    if (*fit_cmd) run_fit(fit);
    if (*inf_cmd) run_influence(inf);
    if (*verify_cmd) run_theory_verify(th);
    if (*ex_cmd) run_experiment_cmd(ex);
    if (*fm_cmd) run_ingest(fm, true);
    if (*h_cmd) run_ingest(hm, false);
  } catch (const std::invalid_argument& e) {
    return fail("invalid_argument", e.what(), 1);
  } catch (const json::exception& e) {
    return fail("json", e.what(), 1);
  } catch (const std::exception& e) {
    return fail("runtime", e.what(), 1);
  }
  return 0;
}
