#include "dagsample/harness.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include <sys/resource.h>

#include "dagsample/estimators.hpp"
#include "dagsample/logspace.hpp"
#include "dagsample/oracle.hpp"
#include "dagsample/sampler.hpp"
#include "dagsample/subset_dp.hpp"

namespace dagsample {

double sum_abs_difference(const std::vector<std::vector<double>>& a,
                          const std::vector<std::vector<double>>& b) {
  const std::size_t n = a.size();
  if (b.size() != n)
    throw std::invalid_argument("matrix dimensions differ");
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i].size() != n || b[i].size() != n)
      throw std::invalid_argument("matrices must be square and equal-sized");
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) total += std::abs(a[i][j] - b[i][j]);
  }
  return total;
}

double mean_abs_difference(const std::vector<std::vector<double>>& a,
                           const std::vector<std::vector<double>>& b) {
  const double n = static_cast<double>(a.size());
  return sum_abs_difference(a, b) / (n * (n - 1.0));
}

std::uint64_t hoeffding_sample_size(double epsilon, double delta) {
  if (!(epsilon > 0.0) || !(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument(
        "hoeffding_sample_size requires epsilon > 0 and delta in (0,1)");
  return static_cast<std::uint64_t>(
      std::ceil(std::log(2.0 / delta) / (2.0 * epsilon * epsilon)));
}

double log_binomial_upper_tail(std::uint64_t trials, double p, std::uint64_t x) {
  if (x == 0) return 0.0;  // P(X >= 0) = 1
  if (x > trials) return kNegInf;
  const double logp = std::log(p);
  const double log1mp = std::log1p(-p);
  const double lg_n = std::lgamma(static_cast<double>(trials) + 1.0);
  double tail = kNegInf;
  for (std::uint64_t j = x; j <= trials; ++j) {
    const double dj = static_cast<double>(j);
    const double term = lg_n - std::lgamma(dj + 1.0) -
                        std::lgamma(static_cast<double>(trials - j) + 1.0) +
                        dj * logp + static_cast<double>(trials - j) * log1mp;
    tail = log_add(tail, term);
  }
  return std::min(0.0, tail);
}

nlohmann::json ValidationReport::to_json() const {
  double mean = 0.0;
  for (double v : per_run) mean += v;
  if (!per_run.empty()) mean /= static_cast<double>(per_run.size());
  double var = 0.0;
  for (double v : per_run) var += (v - mean) * (v - mean);
  if (per_run.size() > 1) var /= static_cast<double>(per_run.size() - 1);
  return nlohmann::json{
      {"name", name},
      {"pass", pass},
      {"statistic", statistic},
      {"threshold", threshold},
      {"runs", per_run.size()},
      {"run_mean", mean},
      {"run_stddev", std::sqrt(var)},
      {"per_run", per_run},
      {"timings",
       {{"dp_seconds", timings.seconds_dp},
        {"order_seconds", timings.seconds_orders},
        {"dag_seconds", timings.seconds_dags},
        {"total_seconds", timings.seconds_total}}},
      {"details", details},
  };
}

std::string ValidationReport::to_csv() const {
  std::ostringstream out;
  out << "run,value\n";
  for (std::size_t r = 0; r < per_run.size(); ++r)
    out << r << ',' << per_run[r] << '\n';
  return out.str();
}

ValidationReport run_hoeffding_experiment(const Dataset& data,
                                          const ScoreConfig& cfg,
                                          double epsilon, double delta,
                                          int repetitions, std::uint64_t seed,
                                          int workers, double rejection_p) {
  using clock = std::chrono::steady_clock;
  const auto t_start = clock::now();
  ValidationReport report;
  report.name = "hoeffding_edge_coverage";
  report.threshold = std::log(rejection_p);

  const std::uint64_t n_draws = hoeffding_sample_size(epsilon, delta);
  const FamilyScoreTable beta = build_beta_tables(data, cfg, workers);
  const auto t_tables = clock::now();
  const DpTables dp = build_dp_tables(beta, cfg.truncated_transform, workers);
  const std::vector<std::vector<double>> exact = exact_edge_posteriors(beta, dp, workers);
  const auto t_dp = clock::now();

  const int n = data.n();
  std::vector<std::vector<int>> violations(
      static_cast<std::size_t>(n), std::vector<int>(static_cast<std::size_t>(n), 0));
  double order_seconds = 0.0;
  double dag_seconds = 0.0;
  for (int rep = 0; rep < repetitions; ++rep) {
    DdsConfig run_cfg;
    run_cfg.n_orders = n_draws;
    // Independent repetitions come from disjoint stream blocks of one seed.
    run_cfg.seed = seed + static_cast<std::uint64_t>(rep);
    run_cfg.workers = workers;
    const DdsRun run = run_dds(beta, dp, run_cfg);
    order_seconds += run.seconds_orders;
    dag_seconds += run.seconds_dags;

    std::vector<std::vector<std::uint64_t>> edge_hits(
        static_cast<std::size_t>(n),
        std::vector<std::uint64_t>(static_cast<std::size_t>(n), 0));
    for (const DdsSample& s : run.samples)
      for (int i = 0; i < n; ++i) {
        NodeSet pa = s.dag.parents[static_cast<std::size_t>(i)];
        while (pa) {
          const int j = lowest_bit(pa);
          pa &= pa - 1;
          ++edge_hits[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
      }
    int worst = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const double estimate =
            static_cast<double>(edge_hits[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) /
            static_cast<double>(n_draws);
        if (std::abs(estimate - exact[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) >
            epsilon) {
          ++violations[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
          ++worst;
        }
      }
    report.per_run.push_back(static_cast<double>(worst));
  }

  // One-sided exact binomial per edge: under the guarantee each violation
  // happens with probability at most delta, so reject only when the observed
  // count is implausibly high for Binomial(repetitions, delta).
  bool pass = true;
  double min_log_p = 0.0;
  int max_violations = 0;
  nlohmann::json edges = nlohmann::json::array();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const int x = violations[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      const double log_pv = log_binomial_upper_tail(
          static_cast<std::uint64_t>(repetitions), delta,
          static_cast<std::uint64_t>(x));
      if (log_pv <= std::log(rejection_p)) pass = false;
      min_log_p = std::min(min_log_p, log_pv);
      max_violations = std::max(max_violations, x);
      edges.push_back({{"child", i},
                       {"parent", j},
                       {"violations", x},
                       {"log_p_value", log_pv}});
    }
  report.pass = pass;
  report.statistic = min_log_p;  // most extreme edge; must stay above log(rejection_p)
  report.details = {{"epsilon", epsilon},
                    {"delta", delta},
                    {"samples_per_run", n_draws},
                    {"repetitions", repetitions},
                    {"max_edge_violations", max_violations},
                    {"edges", edges}};
  const auto t_end = clock::now();
  report.timings.seconds_dp = std::chrono::duration<double>(t_dp - t_tables).count();
  report.timings.seconds_orders = order_seconds;
  report.timings.seconds_dags = dag_seconds;
  report.timings.seconds_total = std::chrono::duration<double>(t_end - t_start).count();
  return report;
}

ValidationReport run_sampling_distribution_test(const Dataset& data,
                                                const ScoreConfig& cfg,
                                                std::uint64_t n_orders,
                                                std::uint64_t seed,
                                                double threshold, int workers) {
  using clock = std::chrono::steady_clock;
  const auto t_start = clock::now();
  ValidationReport report;
  report.name = "sampling_distribution_tv";
  report.threshold = threshold;

  const FamilyScoreTable beta = build_beta_tables(data, cfg, workers);
  const auto t_tables = clock::now();
  const DpTables dp = build_dp_tables(beta, cfg.truncated_transform, workers);
  const auto t_dp = clock::now();

  // Exact posterior of every DAG under the order-modular prior:
  // p(G | D) = extensions(G) * weight(G) / L(V).
  const std::vector<Dag> all = enumerate_dags(data.n(), cfg.max_indegree);
  const double log_evidence = dp.log_order_evidence();
  std::vector<double> exact(all.size());
  std::unordered_map<Dag, std::size_t, DagHash> index;
  index.reserve(all.size());
  for (std::size_t g = 0; g < all.size(); ++g) {
    exact[g] = std::exp(log_order_modular_joint(beta, all[g]) - log_evidence);
    index.emplace(all[g], g);
  }

  DdsConfig run_cfg;
  run_cfg.n_orders = n_orders;
  run_cfg.seed = seed;
  run_cfg.workers = workers;
  const DdsRun run = run_dds(beta, dp, run_cfg);

  std::vector<std::uint64_t> hits(all.size(), 0);
  for (const DdsSample& s : run.samples) {
    const auto it = index.find(s.dag);
    if (it == index.end())
      throw std::runtime_error("sampler produced a DAG outside the model space");
    ++hits[it->second];
  }
  double tv = 0.0;
  for (std::size_t g = 0; g < all.size(); ++g) {
    const double empirical = static_cast<double>(hits[g]) /
                             static_cast<double>(n_orders);
    tv += std::abs(empirical - exact[g]);
  }
  tv *= 0.5;

  report.pass = tv < threshold;
  report.statistic = tv;
  report.per_run = {tv};
  report.details = {{"n_orders", n_orders},
                    {"dag_count", all.size()},
                    {"seed", seed}};
  const auto t_end = clock::now();
  report.timings.seconds_dp = std::chrono::duration<double>(t_dp - t_tables).count();
  report.timings.seconds_orders = run.seconds_orders;
  report.timings.seconds_dags = run.seconds_dags;
  report.timings.seconds_total = std::chrono::duration<double>(t_end - t_start).count();
  return report;
}

std::uint64_t peak_rss_bytes() {
  struct rusage usage;
  getrusage(RUSAGE_SELF, &usage);
  // ru_maxrss is in kibibytes on Linux.
  return static_cast<std::uint64_t>(usage.ru_maxrss) * 1024ull;
}

}  // namespace dagsample
