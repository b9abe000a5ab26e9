#include "dagsample/cli.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "dagsample/dataset.hpp"
#include "dagsample/estimators.hpp"
#include "dagsample/features.hpp"
#include "dagsample/harness.hpp"
#include "dagsample/oracle.hpp"
#include "dagsample/sampler.hpp"
#include "dagsample/scores.hpp"
#include "dagsample/subset_dp.hpp"

namespace dagsample {

namespace {

struct CommonOpts {
  std::string data_path;
  bool no_header = false;
  std::string delimiter = ",";
  ScoreFamily family = ScoreFamily::kK2;
  bool family_given = false;
  double ess = 1.0;
  RhoMode rho = RhoMode::kInvBinomial;
  bool rho_given = false;
  int max_indegree = 3;
  bool max_indegree_given = false;
  bool truncated_transform = false;
  bool allow_large_n = false;
  int workers = 1;
  std::uint64_t seed = 0;
  std::uint64_t samples = 1000;
  std::uint64_t cache_capacity = std::uint64_t{1} << 26;
  bool no_cache = false;
  std::string out_path;
  std::string score_cache;
  std::vector<std::string> features;
};

void add_data_options(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--data", opts.data_path, "CSV dataset of discrete variables")
      ->required();
  cmd->add_flag("--no-header", opts.no_header,
                "treat the first CSV row as data, naming columns X0,X1,...");
  cmd->add_option("--delimiter", opts.delimiter, "CSV delimiter (default ,)");
}

void add_score_options(CLI::App* cmd, CommonOpts& opts) {
  const std::map<std::string, ScoreFamily> families{
      {"k2", ScoreFamily::kK2}, {"bdeu", ScoreFamily::kBdeu}};
  const std::map<std::string, RhoMode> rhos{{"uniform", RhoMode::kUniform},
                                            {"invbinom", RhoMode::kInvBinomial}};
  cmd->add_option("--score", opts.family, "local score family")
      ->transform(CLI::CheckedTransformer(families, CLI::ignore_case))
      ->each([&opts](const std::string&) { opts.family_given = true; });
  cmd->add_option("--ess", opts.ess,
                  "equivalent sample size for the BDeu score (default 1)");
  cmd->add_option("--rho", opts.rho,
                  "parent-set prior factor (default: invbinom for k2, "
                  "uniform for bdeu)")
      ->transform(CLI::CheckedTransformer(rhos, CLI::ignore_case))
      ->each([&opts](const std::string&) { opts.rho_given = true; });
  cmd->add_option("--max-indegree", opts.max_indegree,
                  "maximum number of parents per node (default: 3, clamped "
                  "to n-1)")
      ->each([&opts](const std::string&) { opts.max_indegree_given = true; });
  cmd->add_flag("--truncated-transform", opts.truncated_transform,
                "use the size-layered subset-sum transform");
  cmd->add_flag("--allow-large-n", opts.allow_large_n,
                "lift the variable-count guard; table memory grows as n*2^n");
  cmd->add_option("--workers", opts.workers, "worker threads (default 1)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--score-cache", opts.score_cache,
                  "path for reusing score tables between runs (loaded when "
                  "the content hash matches, rewritten otherwise)");
}

void add_sampling_options(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--samples,-N", opts.samples,
                  "number of order draws (default 1000)");
  cmd->add_option("--seed", opts.seed, "random seed (default 0)");
  cmd->add_option("--cache-capacity", opts.cache_capacity,
                  "interval cache capacity in slots (default 2^26)");
  cmd->add_flag("--no-cache", opts.no_cache, "disable the interval cache");
}

void add_out_option(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--out", opts.out_path,
                  "output file (default: standard output)");
}

void add_feature_option(CLI::App* cmd, CommonOpts& opts, bool required) {
  auto* opt = cmd->add_option(
      "--feature", opts.features,
      "feature expression, repeatable: edge(a,b), path(a,b), pathlen(a,b,L), "
      "parents(a,{b,c}), combined with ! & | and parentheses");
  if (required) opt->required();
}

ScoreConfig make_score_config(const CommonOpts& opts, const Dataset& data) {
  ScoreConfig cfg = ScoreConfig::defaults_for(opts.family);
  cfg.ess = opts.ess;
  cfg.max_indegree = opts.max_indegree;
  // The built-in default is a convenience; an explicit request that exceeds
  // n-1 stays a hard usage error.
  if (!opts.max_indegree_given)
    cfg.max_indegree = std::min(cfg.max_indegree, std::max(0, data.n() - 1));
  if (opts.rho_given) cfg.rho_mode = opts.rho;
  cfg.allow_large_n = opts.allow_large_n;
  cfg.truncated_transform = opts.truncated_transform;
  return cfg;
}

Dataset load_data(const CommonOpts& opts) {
  CsvOptions csv;
  csv.header = !opts.no_header;
  if (opts.delimiter.size() != 1)
    throw CLI::ValidationError("--delimiter", "must be a single character");
  csv.delimiter = opts.delimiter[0];
  return load_csv(opts.data_path, csv);
}

FamilyScoreTable load_or_build_tables(const Dataset& data, const ScoreConfig& cfg,
                                      const CommonOpts& opts, std::ostream& err) {
  if (!opts.score_cache.empty()) {
    if (auto cached = try_load_score_table(opts.score_cache, data, cfg)) {
      err << "score tables loaded from " << opts.score_cache << "\n";
      return std::move(*cached);
    }
  }
  FamilyScoreTable beta = build_beta_tables(data, cfg, opts.workers);
  if (!opts.score_cache.empty()) {
    dump_score_table(beta, data, cfg, opts.score_cache);
    err << "score tables written to " << opts.score_cache << "\n";
  }
  return beta;
}

// Writes to --out or the provided stream.
void emit(const CommonOpts& opts, std::ostream& out, const std::string& text) {
  if (opts.out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(opts.out_path, std::ios::binary);
  if (!file) throw DataError("cannot write output file: " + opts.out_path);
  file << text;
}

nlohmann::json matrix_json(const std::vector<std::vector<double>>& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : m) rows.push_back(row);
  return rows;
}

DdsConfig make_dds_config(const CommonOpts& opts) {
  DdsConfig cfg;
  cfg.n_orders = opts.samples;
  cfg.seed = opts.seed;
  cfg.workers = opts.workers;
  cfg.cache.capacity_slots = opts.cache_capacity;
  cfg.cache.enabled = !opts.no_cache;
  return cfg;
}

nlohmann::json cache_stats_json(const IntervalCacheStats& stats) {
  return {{"hits", stats.hits},
          {"misses", stats.misses},
          {"insertions", stats.insertions},
          {"rejected", stats.rejected},
          {"recycles", stats.recycles},
          {"evicted_entries", stats.evicted_entries}};
}

int cmd_exact_edges(const CommonOpts& opts, std::ostream& out, std::ostream& err) {
  const Dataset data = load_data(opts);
  const ScoreConfig cfg = make_score_config(opts, data);
  const FamilyScoreTable beta = load_or_build_tables(data, cfg, opts, err);
  const DpTables dp = build_dp_tables(beta, cfg.truncated_transform, opts.workers);
  nlohmann::json j{{"names", data.names},
                   {"edges", matrix_json(exact_edge_posteriors(beta, dp, opts.workers))},
                   {"log_order_evidence", dp.log_order_evidence()}};
  emit(opts, out, j.dump() + "\n");
  return 0;
}

int cmd_dds(const CommonOpts& opts, std::ostream& out, std::ostream& err) {
  const Dataset data = load_data(opts);
  const ScoreConfig cfg = make_score_config(opts, data);
  const FamilyScoreTable beta = load_or_build_tables(data, cfg, opts, err);
  const DpTables dp = build_dp_tables(beta, cfg.truncated_transform, opts.workers);
  const DdsRun run = run_dds(beta, dp, make_dds_config(opts));
  // One JSON object per line, in processing order (descending order weight).
  std::ostringstream lines;
  for (const DdsSample& s : run.samples) {
    nlohmann::json j{{"order_index", s.draw_index},
                     {"parents", s.dag.parents},
                     {"log_joint", s.log_joint}};
    lines << j.dump() << '\n';
  }
  emit(opts, out, lines.str());
  err << nlohmann::json{{"cache", cache_stats_json(run.cache_stats)},
                        {"order_seconds", run.seconds_orders},
                        {"dag_seconds", run.seconds_dags}}
             .dump()
      << "\n";
  return 0;
}

// Exact structure evidence is cheap only for small n; compute it by default
// below this bound, or on request (subject to the module guard).
constexpr int kAutoEvidenceVars = 12;

int cmd_iwdds(const CommonOpts& opts, bool with_frequency, bool force_evidence,
              std::ostream& out, std::ostream& err) {
  const Dataset data = load_data(opts);
  const ScoreConfig cfg = make_score_config(opts, data);
  const FamilyScoreTable beta = load_or_build_tables(data, cfg, opts, err);
  const DpTables dp = build_dp_tables(beta, cfg.truncated_transform, opts.workers);
  const DdsRun run = run_dds(beta, dp, make_dds_config(opts));
  const UniqueDagSet unique = dedupe_samples(run.samples);

  std::optional<double> log_evidence;
  if (force_evidence || data.n() <= kAutoEvidenceVars)
    log_evidence = log_structure_evidence(beta);

  nlohmann::json features = nlohmann::json::array();
  for (const std::string& text : opts.features) {
    const FeaturePtr f = parse_feature(text, data.names);
    const FeatureEstimate est = estimate_feature_iw(unique, *f, log_evidence);
    nlohmann::json fj{{"feature", text},
                      {"estimate", est.point}};
    if (est.delta) {
      fj["delta"] = *est.delta;
      fj["interval"] = {est.interval->first, est.interval->second};
      fj["delta_clamped"] = est.delta_clamped;
    }
    if (with_frequency)
      fj["draw_frequency"] = estimate_feature_frequency(run.samples, *f);
    features.push_back(std::move(fj));
  }

  nlohmann::json j{{"names", data.names},
                   {"draws", unique.total_draws},
                   {"unique_dags", unique.items.size()},
                   {"log_captured_weight", unique.log_total_weight},
                   {"edges", matrix_json(estimate_edges_iw(unique))},
                   {"features", features}};
  if (log_evidence) {
    j["log_structure_evidence"] = *log_evidence;
    double delta = std::exp(unique.log_total_weight - *log_evidence);
    j["delta"] = std::min(1.0, delta);
  }
  emit(opts, out, j.dump() + "\n");
  err << nlohmann::json{{"cache", cache_stats_json(run.cache_stats)},
                        {"order_seconds", run.seconds_orders},
                        {"dag_seconds", run.seconds_dags}}
             .dump()
      << "\n";
  return 0;
}

int cmd_oracle(const CommonOpts& opts, const std::string& mode,
               const std::string& dag_file, std::ostream& out, std::ostream& err) {
  nlohmann::json j;
  if (mode == "le-count") {
    std::ifstream in(dag_file, std::ios::binary);
    if (!in) throw DataError("cannot open DAG file: " + dag_file);
    nlohmann::json spec;
    try {
      in >> spec;
    } catch (const nlohmann::json::exception& e) {
      throw DataError("malformed DAG file: " + std::string(e.what()));
    }
    Dag g;
    const auto& parents = spec.at("parents");
    g.n = static_cast<int>(parents.size());
    for (const auto& pa : parents)
      g.parents.push_back(pa.get<NodeSet>());
    if (!g.is_acyclic()) throw DataError("DAG file describes a cyclic graph");
    j["linear_extensions"] = count_linear_extensions(g).str();
    j["log_linear_extensions"] = log_linear_extensions(g);
    emit(opts, out, j.dump() + "\n");
    return 0;
  }

  const Dataset data = load_data(opts);
  const ScoreConfig cfg = make_score_config(opts, data);
  const FamilyScoreTable beta = load_or_build_tables(data, cfg, opts, err);
  j["names"] = data.names;
  if (mode == "evidence-order") {
    const DpTables dp = build_dp_tables(beta, cfg.truncated_transform, opts.workers);
    j["log_order_evidence"] = dp.log_order_evidence();
  } else if (mode == "evidence-structure") {
    j["log_structure_evidence"] = log_structure_evidence(beta);
  } else if (mode == "edges-order") {
    const DpTables dp = build_dp_tables(beta, cfg.truncated_transform, opts.workers);
    j["edges"] = matrix_json(exact_edge_posteriors(beta, dp, opts.workers));
  } else if (mode == "edges-structure") {
    j["edges"] = matrix_json(exact_edges_structure(beta));
  } else if (mode == "feature-order" || mode == "feature-structure") {
    nlohmann::json features = nlohmann::json::array();
    for (const std::string& text : opts.features) {
      const FeaturePtr f = parse_feature(text, data.names);
      const double p = mode == "feature-order"
                           ? exact_feature_posterior_order(beta, *f)
                           : exact_feature_posterior_structure(beta, *f);
      features.push_back({{"feature", text}, {"posterior", p}});
    }
    j["features"] = features;
  } else {
    throw CLI::ValidationError("--mode", "unknown oracle mode: " + mode);
  }
  emit(opts, out, j.dump() + "\n");
  return 0;
}

int cmd_validate(const CommonOpts& opts, const std::string& check, double epsilon,
                 double delta, int repetitions, double tv_threshold,
                 const std::string& csv_path, std::ostream& out,
                 std::ostream& err) {
  const Dataset data = load_data(opts);
  const ScoreConfig cfg = make_score_config(opts, data);
  ValidationReport report;
  if (check == "hoeffding") {
    report = run_hoeffding_experiment(data, cfg, epsilon, delta, repetitions,
                                      opts.seed, opts.workers);
  } else if (check == "tv") {
    report = run_sampling_distribution_test(data, cfg, opts.samples, opts.seed,
                                            tv_threshold, opts.workers);
  } else {
    throw CLI::ValidationError("--check", "unknown check: " + check);
  }
  emit(opts, out, report.to_json().dump() + "\n");
  if (!csv_path.empty()) {
    std::ofstream csv(csv_path, std::ios::binary);
    if (!csv) throw DataError("cannot write CSV report: " + csv_path);
    csv << report.to_csv();
  }
  err << (report.pass ? "PASS" : "FAIL") << " " << report.name << "\n";
  return report.pass ? 0 : 1;
}

int cmd_score_dump(const CommonOpts& opts, std::ostream& err) {
  const Dataset data = load_data(opts);
  const ScoreConfig cfg = make_score_config(opts, data);
  const FamilyScoreTable beta = build_beta_tables(data, cfg, opts.workers);
  if (opts.out_path.empty())
    throw CLI::ValidationError("--out", "score-dump requires an output path");
  dump_score_table(beta, data, cfg, opts.out_path);
  err << "score tables written to " << opts.out_path << "\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{
      "dagsample: exact posterior sampling of Bayesian-network structures\n"
      "via dynamic programming over variable orders, with importance-weighted\n"
      "feature posteriors and guaranteed enclosing intervals"};
  app.require_subcommand(1);
  CommonOpts opts;

  CLI::App* exact_edges =
      app.add_subcommand("exact-edges",
                         "exact edge posteriors under the order-modular prior");
  add_data_options(exact_edges, opts);
  add_score_options(exact_edges, opts);
  add_out_option(exact_edges, opts);

  CLI::App* dds = app.add_subcommand(
      "dds", "draw DAG samples from the order-modular posterior (JSON lines)");
  add_data_options(dds, opts);
  add_score_options(dds, opts);
  add_sampling_options(dds, opts);
  add_out_option(dds, opts);

  CLI::App* iwdds = app.add_subcommand(
      "iwdds",
      "importance-weighted posterior estimates over deduplicated samples");
  add_data_options(iwdds, opts);
  add_score_options(iwdds, opts);
  add_sampling_options(iwdds, opts);
  add_out_option(iwdds, opts);
  add_feature_option(iwdds, opts, false);
  bool iwdds_exact_evidence = false;
  iwdds->add_flag("--exact-evidence", iwdds_exact_evidence,
                  "force the exact structure evidence (exponential time) for "
                  "interval bounds");

  CLI::App* estimate = app.add_subcommand(
      "estimate",
      "feature posteriors: weighted estimate, interval, and raw draw "
      "frequency side by side");
  add_data_options(estimate, opts);
  add_score_options(estimate, opts);
  add_sampling_options(estimate, opts);
  add_out_option(estimate, opts);
  add_feature_option(estimate, opts, true);
  bool estimate_exact_evidence = false;
  estimate->add_flag("--exact-evidence", estimate_exact_evidence,
                     "force the exact structure evidence (exponential time) "
                     "for interval bounds");

  CLI::App* oracle = app.add_subcommand(
      "oracle", "exponential-time exact references for validation");
  std::string oracle_mode;
  std::string oracle_dag_file;
  oracle
      ->add_option("--mode", oracle_mode,
                   "one of: evidence-order, evidence-structure, edges-order, "
                   "edges-structure, feature-order, feature-structure, "
                   "le-count")
      ->required();
  oracle->add_option("--dag-file", oracle_dag_file,
                     "JSON {\"parents\": [mask,...]} for le-count");
  add_data_options(oracle, opts);
  add_score_options(oracle, opts);
  add_out_option(oracle, opts);
  add_feature_option(oracle, opts, false);
  // le-count works on a DAG alone; --data is still accepted.
  oracle->get_option("--data")->required(false);

  CLI::App* validate = app.add_subcommand(
      "validate", "statistical validation experiments with JSON/CSV reports");
  add_data_options(validate, opts);
  add_score_options(validate, opts);
  add_sampling_options(validate, opts);
  add_out_option(validate, opts);
  std::string validate_check = "tv";
  double validate_epsilon = 0.02;
  double validate_delta = 0.05;
  int validate_reps = 400;
  double validate_tv_threshold = 0.01;
  std::string validate_csv;
  validate->add_option("--check", validate_check, "tv or hoeffding");
  validate->add_option("--epsilon", validate_epsilon,
                       "accuracy bound for hoeffding (default 0.02)");
  validate->add_option("--delta", validate_delta,
                       "confidence bound for hoeffding (default 0.05)");
  validate->add_option("--reps", validate_reps,
                       "hoeffding repetitions (default 400)");
  validate->add_option("--tv-threshold", validate_tv_threshold,
                       "total variation bound for tv (default 0.01)");
  validate->add_option("--csv", validate_csv, "also write per-run CSV here");

  CLI::App* score_dump = app.add_subcommand(
      "score-dump", "precompute score tables and write them as JSON");
  add_data_options(score_dump, opts);
  add_score_options(score_dump, opts);
  add_out_option(score_dump, opts);

  std::vector<std::string> argv_storage;
  argv_storage.reserve(args.size() + 1);
  argv_storage.push_back("dagsample");
  for (const std::string& a : args) argv_storage.push_back(a);
  std::vector<const char*> argv;
  argv.reserve(argv_storage.size());
  for (const std::string& a : argv_storage) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (exact_edges->parsed()) return cmd_exact_edges(opts, out, err);
    if (dds->parsed()) return cmd_dds(opts, out, err);
    if (iwdds->parsed())
      return cmd_iwdds(opts, false, iwdds_exact_evidence, out, err);
    if (estimate->parsed())
      return cmd_iwdds(opts, true, estimate_exact_evidence, out, err);
    if (oracle->parsed())
      return cmd_oracle(opts, oracle_mode, oracle_dag_file, out, err);
    if (validate->parsed())
      return cmd_validate(opts, validate_check, validate_epsilon, validate_delta,
                          validate_reps, validate_tv_threshold, validate_csv,
                          out, err);
    if (score_dump->parsed()) return cmd_score_dump(opts, err);
    err << "usage error: no command given\n";
    return 2;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const FeatureParseError& e) {
    err << "usage error: invalid feature: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const GuardError& e) {
    err << "size guard: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace dagsample
