#include "maxcon/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "maxcon/cube.hpp"
#include "maxcon/ingest.hpp"
#include "maxcon/metrics.hpp"
#include "maxcon/parallel.hpp"

namespace maxcon {

namespace {

constexpr const char* kMethods[] = {"wi", "mbf", "ransac", "lo-ransac", "exact"};

bool is_ransac_family(const std::string& name) { return name == "ransac" || name == "lo-ransac"; }

std::string kind_name(ExperimentKind k) { return k == ExperimentKind::compare ? "compare" : "sf_sweep"; }

ExperimentKind parse_kind(const std::string& text) {
  if (text == "compare") return ExperimentKind::compare;
  if (text == "sf_sweep") return ExperimentKind::sf_sweep;
  throw std::invalid_argument("unknown experiment kind: " + text);
}

std::size_t reference_index(const ExperimentConfig& c) {
  for (std::size_t m = 0; m < c.methods.size(); ++m) {
    if (!c.budget_reference.empty() ? c.methods[m].label == c.budget_reference
                                    : !is_ransac_family(c.methods[m].name)) {
      return m;
    }
  }
  throw std::invalid_argument("budget matching needs a reference method" +
                              (c.budget_reference.empty() ? std::string()
                                                          : " labelled " + c.budget_reference));
}

SolveResult run_method(const MethodSpec& m, const LinearDataset& data, double epsilon,
                       std::uint64_t seed, const RansacBudget& budget) {
  if (m.name == "wi" || m.name == "mbf") {
    SolverConfig c = m.solver;
    c.epsilon = epsilon;
    c.seed = seed;
    return m.name == "wi" ? wi_maxcon(data, c) : mbf_maxcon(data, c);
  }
  if (m.name == "ransac") return ransac(data, epsilon, budget, seed);
  if (m.name == "lo-ransac") return lo_ransac(data, epsilon, budget, seed, m.lo_depth);
  return exact_solve(data, epsilon);
}

std::vector<RunRecord> compare_run(const ExperimentConfig& c, std::size_t run) {
  const std::uint64_t seed = c.run_seed(run);
  const LinearDataset data = load_dataset(c.data, seed);
  std::optional<std::size_t> optimum;
  if (c.exact_ground_truth) optimum = exact_maxcon_bases(data, c.epsilon).inliers.size();

  std::vector<std::optional<SolveResult>> results(c.methods.size());
  auto solve = [&](std::size_t m, const RansacBudget& budget) {
    results[m] = run_method(c.methods[m], data, c.epsilon, derive_seed(seed, {0x4Du, m}), budget);
  };
  std::optional<std::size_t> ref;
  if (c.budget_match != BudgetMatch::none) {
    ref = reference_index(c);
    solve(*ref, c.methods[*ref].budget);
  }
  for (std::size_t m = 0; m < c.methods.size(); ++m) {
    if (results[m]) continue;
    RansacBudget budget = c.methods[m].budget;
    if (ref && is_ransac_family(c.methods[m].name) && budget.unbounded()) {
      const auto& r = *results[*ref];
      if (c.budget_match == BudgetMatch::oracle) {
        budget.max_evaluations = std::max<std::uint64_t>(r.oracle_evaluations, 1);
      } else {
        budget.time_ms = r.runtime_ms;
      }
    }
    solve(m, budget);
  }

  std::vector<RunRecord> out;
  for (std::size_t m = 0; m < c.methods.size(); ++m) {
    RunRecord rec{run, seed, c.methods[m].label, std::move(*results[m]), optimum, std::nullopt};
    if (c.data.kind == "homography" || (c.data.kind == "two_view" &&
                                        c.data.matches.model == TwoViewModel::homography)) {
      if (c.data.per_match) rec.match_consensus = matches_with_both_rows(rec.result.inlier_set).size();
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<SfRecord> sf_run(const ExperimentConfig& c, std::size_t run) {
  const std::uint64_t seed = c.run_seed(run);
  const LinearDataset data = load_dataset(c.data, seed);
  const auto table = TruthTable::tabulate(FeasibilityOracle(data, c.epsilon));
  const std::size_t n = data.size();
  const std::size_t k = n - exact_maxcon_enumerate(table).size();
  if (k == 0) return {};

  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<SfRecord> out;
  for (std::size_t qi = 0; qi < c.qs.size(); ++qi) {
    const double q = c.qs[qi];
    const Ranking truth = top_k(exact_weighted_influences(table, q), k);
    for (std::size_t h : c.hs) {
      const auto est = estimate_influence_bernoulli(table, all, q, h,
                                                    derive_seed(seed, {0x5Fu, qi, h}), c.sf_mode);
      out.push_back({run, seed, q, h, k, sf_distance(truth, top_k(est.scores, k))});
    }
  }
  return out;
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(10);
  s << v;
  return s.str();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

}  // namespace

std::string to_string(BudgetMatch match) {
  switch (match) {
    case BudgetMatch::none: return "none";
    case BudgetMatch::oracle: return "oracle";
    case BudgetMatch::time: return "time";
  }
  return "none";
}

BudgetMatch parse_budget_match(const std::string& text) {
  if (text == "none") return BudgetMatch::none;
  if (text == "oracle") return BudgetMatch::oracle;
  if (text == "time") return BudgetMatch::time;
  throw std::invalid_argument("unknown budget_match: " + text + " (none, oracle, time)");
}

nlohmann::json DataSource::to_json() const {
  nlohmann::json j{{"kind", kind}};
  if (kind == "generated") j["spec"] = gen.to_json();
  if (kind == "two_view") j["spec"] = matches.to_json();
  if (kind == "multistructure") {
    auto specs = nlohmann::json::array();
    for (const auto& s : structures) specs.push_back(s.to_json());
    j["structures"] = specs;
    j["gross_outliers"] = gross_outliers;
  }
  if (kind == "csv" || kind == "fundamental" || kind == "homography") j["path"] = path;
  if (kind == "fundamental" || kind == "homography" || kind == "two_view") j["normalize"] = normalize;
  if (per_match) j["per_match"] = true;
  return j;
}

DataSource DataSource::from_json(const nlohmann::json& j) {
  DataSource d;
  d.kind = j.value("kind", d.kind);
  if (d.kind == "generated") {
    d.gen = GenSpec::from_json(j.value("spec", nlohmann::json::object()));
  } else if (d.kind == "two_view") {
    d.matches = MatchGenSpec::from_json(j.value("spec", nlohmann::json::object()));
  } else if (d.kind == "multistructure") {
    for (const auto& s : j.at("structures")) d.structures.push_back(GenSpec::from_json(s));
    d.gross_outliers = j.value("gross_outliers", d.gross_outliers);
  } else if (d.kind == "csv" || d.kind == "fundamental" || d.kind == "homography") {
    if (!j.contains("path")) throw std::invalid_argument("data source '" + d.kind + "' needs a path");
    d.path = j["path"].get<std::string>();
  } else {
    throw std::invalid_argument("unknown data source kind: " + d.kind);
  }
  d.normalize = j.value("normalize", d.normalize);
  d.per_match = j.value("per_match", d.per_match);
  return d;
}

nlohmann::json MethodSpec::to_json() const {
  nlohmann::json j{{"name", name}, {"label", label}};
  if (name == "wi" || name == "mbf") j["solver"] = solver.to_json();
  if (is_ransac_family(name)) j["budget"] = budget.to_json();
  if (name == "lo-ransac") j["depth"] = lo_depth;
  return j;
}

MethodSpec MethodSpec::from_json(const nlohmann::json& j) {
  MethodSpec m;
  if (j.is_string()) {
    m.name = j.get<std::string>();
  } else {
    m.name = j.at("name").get<std::string>();
    m.label = j.value("label", std::string());
    if (j.contains("solver")) m.solver = SolverConfig::from_json(j["solver"]);
    if (j.contains("budget")) m.budget = RansacBudget::from_json(j["budget"]);
    m.lo_depth = j.value("depth", m.lo_depth);
  }
  if (std::find(std::begin(kMethods), std::end(kMethods), m.name) == std::end(kMethods)) {
    throw std::invalid_argument("unknown method: " + m.name);
  }
  if (m.label.empty()) m.label = m.name;
  return m;
}

std::uint64_t ExperimentConfig::run_seed(std::size_t run) const {
  return seeds.empty() ? derive_seed(master_seed, {0x52u, run}) : seeds.at(run);
}

void ExperimentConfig::validate() const {
  if (repetitions == 0) throw std::invalid_argument("repetitions must be >= 1");
  if (!seeds.empty() && seeds.size() != repetitions) {
    throw std::invalid_argument("seeds must list one seed per repetition");
  }
  if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be non-negative");
  if (kind == ExperimentKind::compare) {
    if (methods.empty()) throw std::invalid_argument("compare needs at least one method");
    for (std::size_t a = 0; a < methods.size(); ++a) {
      for (std::size_t b = a + 1; b < methods.size(); ++b) {
        if (methods[a].label == methods[b].label) {
          throw std::invalid_argument("duplicate method label: " + methods[a].label);
        }
      }
    }
    if (budget_match != BudgetMatch::none) reference_index(*this);
  } else {
    if (qs.empty() || hs.empty()) throw std::invalid_argument("sf_sweep needs qs and hs");
    for (double q : qs) {
      if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("sf_sweep q must lie in (0, 1)");
    }
    for (std::size_t h : hs) {
      if (h < 2) throw std::invalid_argument("sf_sweep h must be >= 2");
    }
  }
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j{{"kind", kind_name(kind)},
                   {"data", data.to_json()},
                   {"repetitions", repetitions},
                   {"master_seed", master_seed},
                   {"epsilon", epsilon},
                   {"threads", threads},
                   {"output", output}};
  if (!seeds.empty()) j["seeds"] = seeds;
  if (kind == ExperimentKind::compare) {
    auto ms = nlohmann::json::array();
    for (const auto& m : methods) ms.push_back(m.to_json());
    j["methods"] = ms;
    j["budget_match"] = to_string(budget_match);
    if (!budget_reference.empty()) j["budget_reference"] = budget_reference;
    j["exact_ground_truth"] = exact_ground_truth;
  } else {
    j["qs"] = qs;
    j["hs"] = hs;
    j["mode"] = to_string(sf_mode);
  }
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  c.kind = parse_kind(j.value("kind", std::string("compare")));
  if (!j.contains("data")) throw std::invalid_argument("experiment config has no data source");
  c.data = DataSource::from_json(j["data"]);
  if (j.contains("methods")) {
    for (const auto& m : j["methods"]) c.methods.push_back(MethodSpec::from_json(m));
  }
  c.repetitions = j.value("repetitions", c.repetitions);
  c.master_seed = j.value("master_seed", c.master_seed);
  if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
  c.epsilon = j.value("epsilon", c.epsilon);
  if (j.contains("budget_match")) c.budget_match = parse_budget_match(j["budget_match"].get<std::string>());
  c.budget_reference = j.value("budget_reference", c.budget_reference);
  c.exact_ground_truth = j.value("exact_ground_truth", c.exact_ground_truth);
  if (j.contains("qs")) c.qs = j["qs"].get<std::vector<double>>();
  if (j.contains("hs")) c.hs = j["hs"].get<std::vector<std::size_t>>();
  if (j.contains("mode")) c.sf_mode = parse_estimator_mode(j["mode"].get<std::string>());
  c.threads = j.value("threads", c.threads);
  c.output = j.value("output", c.output);
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open experiment config: " + path);
  return from_json(nlohmann::json::parse(in));
}

nlohmann::json RunRecord::to_json() const {
  nlohmann::json j{{"run", run}, {"seed", seed}, {"label", label}, {"result", result.to_json()}};
  if (optimum) {
    j["optimum"] = *optimum;
    j["consensus_error"] = consensus_error(result.consensus_size(), *optimum);
  }
  if (match_consensus) j["match_consensus"] = *match_consensus;
  return j;
}

nlohmann::json SfRecord::to_json() const {
  return {{"run", run}, {"seed", seed}, {"q", q}, {"h", h}, {"k", k}, {"sf_distance", sf_distance}};
}

double BatchReport::mean_consensus(const std::string& label) const {
  std::vector<double> v;
  for (const auto& r : runs) {
    if (r.label == label) v.push_back(static_cast<double>(r.result.consensus_size()));
  }
  if (v.empty()) throw std::invalid_argument("no runs labelled " + label);
  return summarize(v).mean;
}

double BatchReport::median_sf(double q, std::size_t h) const {
  std::vector<double> v;
  for (const auto& r : sf) {
    if (r.q == q && r.h == h) v.push_back(r.sf_distance);
  }
  if (v.empty()) throw std::invalid_argument("no SF records at that grid cell");
  return summarize(v).median;
}

LinearDataset load_dataset(const DataSource& source, std::uint64_t seed) {
  if (source.kind == "generated") {
    GenSpec g = source.gen;
    g.seed = seed;
    return gen_hyperplane_data(g).data;
  }
  if (source.kind == "multistructure") {
    std::vector<GenSpec> specs = source.structures;
    for (std::size_t s = 0; s < specs.size(); ++s) specs[s].seed = derive_seed(seed, {0x53u, s});
    return gen_multistructure_data(specs, source.gross_outliers, seed).data;
  }
  if (source.kind == "two_view") {
    MatchGenSpec m = source.matches;
    m.seed = seed;
    const auto g = gen_two_view_matches(m);
    return m.model == TwoViewModel::fundamental ? linearise_fundamental(g.matches, source.normalize)
                                                : linearise_homography(g.matches, source.normalize);
  }
  if (source.kind == "csv") return LinearDataset::read_csv_file(source.path);
  if (source.kind == "fundamental") {
    return linearise_fundamental(CorrespondenceSet::read_csv_file(source.path), source.normalize);
  }
  if (source.kind == "homography") {
    return linearise_homography(CorrespondenceSet::read_csv_file(source.path), source.normalize);
  }
  throw std::invalid_argument("unknown data source kind: " + source.kind);
}

BatchReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  BatchReport report{config, {}, {}, {}};
  std::vector<std::vector<RunRecord>> runs(config.repetitions);
  std::vector<std::vector<SfRecord>> sweeps(config.repetitions);
  parallel_for(config.repetitions, config.threads, [&](std::size_t r) {
    if (config.kind == ExperimentKind::compare) {
      runs[r] = compare_run(config, r);
    } else {
      sweeps[r] = sf_run(config, r);
    }
  });
  for (std::size_t r = 0; r < config.repetitions; ++r) {
    for (auto& rec : runs[r]) report.runs.push_back(std::move(rec));
    if (config.kind == ExperimentKind::sf_sweep && sweeps[r].empty()) report.skipped_runs.push_back(r);
    for (auto& rec : sweeps[r]) report.sf.push_back(rec);
  }
  return report;
}

std::vector<std::string> write_report(const BatchReport& report, const std::string& prefix) {
  const std::string jsonl = prefix + ".jsonl";
  const std::string csv = prefix + ".csv";
  const std::string agg = prefix + "_aggregate.csv";
  auto lines = open_out(jsonl);
  auto rows = open_out(csv);
  auto summary = open_out(agg);

  if (report.config.kind == ExperimentKind::compare) {
    rows << "run,seed,method,consensus,optimum,consensus_error,runtime_ms,oracle_evaluations,"
            "budget_exhausted,match_consensus\n";
    std::map<std::string, std::vector<const RunRecord*>> by_label;
    for (const auto& r : report.runs) {
      lines << r.to_json().dump() << '\n';
      rows << r.run << ',' << r.seed << ',' << r.label << ',' << r.result.consensus_size() << ',';
      if (r.optimum) {
        rows << *r.optimum << ',' << consensus_error(r.result.consensus_size(), *r.optimum);
      } else {
        rows << ',';
      }
      rows << ',' << fmt(r.result.runtime_ms) << ',' << r.result.oracle_evaluations << ','
           << (r.result.budget_exhausted ? 1 : 0) << ',';
      if (r.match_consensus) rows << *r.match_consensus;
      rows << '\n';
      by_label[r.label].push_back(&r);
    }
    summary << "method,runs,consensus_mean,consensus_min,consensus_max,consensus_median,"
               "error_mean,error_max,runtime_ms_mean,oracle_evaluations_mean\n";
    for (const auto& m : report.config.methods) {
      const auto& recs = by_label[m.label];
      if (recs.empty()) continue;
      std::vector<double> cons, err, time, evals;
      for (const auto* r : recs) {
        cons.push_back(static_cast<double>(r->result.consensus_size()));
        time.push_back(r->result.runtime_ms);
        evals.push_back(static_cast<double>(r->result.oracle_evaluations));
        if (r->optimum) {
          err.push_back(static_cast<double>(consensus_error(r->result.consensus_size(), *r->optimum)));
        }
      }
      const auto c = summarize(cons);
      summary << m.label << ',' << recs.size() << ',' << fmt(c.mean) << ',' << c.min << ','
              << c.max << ',' << fmt(c.median) << ',';
      if (!err.empty()) {
        const auto e = summarize(err);
        summary << fmt(e.mean) << ',' << e.max;
      } else {
        summary << ',';
      }
      summary << ',' << fmt(summarize(time).mean) << ',' << fmt(summarize(evals).mean) << '\n';
    }
  } else {
    rows << "run,seed,q,h,k,sf_distance\n";
    for (const auto& r : report.sf) {
      lines << r.to_json().dump() << '\n';
      rows << r.run << ',' << r.seed << ',' << fmt(r.q) << ',' << r.h << ',' << r.k << ','
           << fmt(r.sf_distance) << '\n';
    }
    summary << "q,h,runs,sf_mean,sf_median,sf_min,sf_max\n";
    for (double q : report.config.qs) {
      for (std::size_t h : report.config.hs) {
        std::vector<double> v;
        for (const auto& r : report.sf) {
          if (r.q == q && r.h == h) v.push_back(r.sf_distance);
        }
        if (v.empty()) continue;
        const auto s = summarize(v);
        summary << fmt(q) << ',' << h << ',' << v.size() << ',' << fmt(s.mean) << ','
                << fmt(s.median) << ',' << fmt(s.min) << ',' << fmt(s.max) << '\n';
      }
    }
  }
  return {jsonl, csv, agg};
}

}  // namespace maxcon
