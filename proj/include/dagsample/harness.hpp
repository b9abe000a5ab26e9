#pragma once

// Validation harness: the repeatable experiments that check the sampler's
// statistical contract, plus the small metric/report plumbing they share.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "dagsample/dataset.hpp"
#include "dagsample/scores.hpp"

namespace dagsample {

// Sum / mean of |a - b| over the n(n-1) ordered off-diagonal cells of two
// n x n matrices (diagonals are identically zero for edge posteriors).
double sum_abs_difference(const std::vector<std::vector<double>>& a,
                          const std::vector<std::vector<double>>& b);
double mean_abs_difference(const std::vector<std::vector<double>>& a,
                           const std::vector<std::vector<double>>& b);

// Smallest sample count with Hoeffding two-sided guarantee
// P(|mean - p| > epsilon) <= delta for [0,1] variables:
// ceil(ln(2/delta) / (2 epsilon^2)).
std::uint64_t hoeffding_sample_size(double epsilon, double delta);

// log P(Binomial(trials, p) >= x), exact via lgamma terms.
double log_binomial_upper_tail(std::uint64_t trials, double p, std::uint64_t x);

struct StageTimings {
  double seconds_dp = 0.0;
  double seconds_orders = 0.0;
  double seconds_dags = 0.0;
  double seconds_total = 0.0;
};

struct ValidationReport {
  std::string name;
  bool pass = false;
  double statistic = 0.0;  // headline value of the experiment
  double threshold = 0.0;  // pass iff the experiment's comparison holds
  std::vector<double> per_run;
  StageTimings timings;
  nlohmann::json details;

  nlohmann::json to_json() const;
  // Flat rows "run,value" (plus a header), one line per repetition.
  std::string to_csv() const;
};

// Coverage experiment for the concentration guarantee of the sampled-DAG
// frequency estimator.  Repeats `repetitions` independent runs of
// hoeffding_sample_size(epsilon, delta) draws, estimates every edge by its
// sample frequency, and counts, per edge, the runs violating
// |estimate - exact| > epsilon.  Each edge's violation count is tested
// against Binomial(repetitions, delta) one-sidedly; the experiment passes iff
// no edge's count is significantly ABOVE the guaranteed rate (upper-tail
// p-value above `rejection_p`).  The exact edge values come from the
// subset-lattice DP, so this exercises sampler and DP against each other.
ValidationReport run_hoeffding_experiment(const Dataset& data,
                                          const ScoreConfig& cfg,
                                          double epsilon, double delta,
                                          int repetitions, std::uint64_t seed,
                                          int workers = 1,
                                          double rejection_p = 1e-3);

// Goodness-of-fit of the sampler against the full exact distribution: draws
// n_orders DAG samples, compares empirical frequencies against the exact
// posterior of EVERY DAG (enumeration; small n only), and reports total
// variation distance 0.5 * sum |p_hat - p|.  Passes iff TV < threshold.
ValidationReport run_sampling_distribution_test(const Dataset& data,
                                                const ScoreConfig& cfg,
                                                std::uint64_t n_orders,
                                                std::uint64_t seed,
                                                double threshold = 0.01,
                                                int workers = 1);

// Peak resident set size of this process in bytes (Linux getrusage).
std::uint64_t peak_rss_bytes();

}  // namespace dagsample
