#include "dagsample/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "dagsample/logspace.hpp"

namespace dagsample {

void DagAccumulator::add(const DdsSample& sample) {
  ++total_draws_;
  auto [it, inserted] = index_.try_emplace(sample.dag, items_.size());
  if (inserted) {
    items_.push_back({sample.dag, sample.log_joint, 1});
  } else {
    ++items_[it->second].multiplicity;
  }
}

UniqueDagSet DagAccumulator::snapshot() const {
  UniqueDagSet out;
  out.items = items_;
  out.total_draws = total_draws_;
  std::vector<double> joints;
  joints.reserve(items_.size());
  for (const auto& item : items_) joints.push_back(item.log_joint);
  out.log_total_weight = log_sum_exp(joints);
  return out;
}

UniqueDagSet dedupe_samples(const std::vector<DdsSample>& samples) {
  // First-draw order: sort indices by draw index, then accumulate.
  std::vector<std::size_t> by_draw(samples.size());
  for (std::size_t s = 0; s < samples.size(); ++s) by_draw[s] = s;
  std::sort(by_draw.begin(), by_draw.end(), [&](std::size_t a, std::size_t b) {
    return samples[a].draw_index < samples[b].draw_index;
  });
  DagAccumulator acc;
  for (std::size_t s : by_draw) acc.add(samples[s]);
  return acc.snapshot();
}

namespace {

FeatureEstimate finish_estimate(const UniqueDagSet& sample, double log_mass_true,
                                std::optional<double> log_structure_evidence) {
  FeatureEstimate est;
  est.draws = sample.total_draws;
  est.unique_dags = sample.items.size();
  est.point = sample.log_total_weight == kNegInf
                  ? 0.0
                  : std::exp(log_mass_true - sample.log_total_weight);
  est.point = std::min(1.0, est.point);
  if (log_structure_evidence) {
    double delta = std::exp(sample.log_total_weight - *log_structure_evidence);
    if (delta > 1.0) {
      // Possible only through floating-point rounding: the captured mass is a
      // sub-sum of the evidence.  Clamp and flag.
      std::cerr << "warning: captured posterior mass " << delta
                << " exceeds 1; clamping\n";
      delta = 1.0;
      est.delta_clamped = true;
    }
    est.delta = delta;
    const double lower = delta * est.point;
    est.interval = std::make_pair(lower, lower + (1.0 - delta));
  }
  return est;
}

}  // namespace

FeatureEstimate estimate_feature_iw(const UniqueDagSet& sample,
                                    const FeatureExpr& feature,
                                    std::optional<double> log_structure_evidence) {
  std::vector<double> hit_joints;
  for (const auto& item : sample.items)
    if (eval_feature(feature, item.dag)) hit_joints.push_back(item.log_joint);
  return finish_estimate(sample, log_sum_exp(hit_joints), log_structure_evidence);
}

std::vector<std::vector<double>> estimate_edges_iw(const UniqueDagSet& sample) {
  if (sample.items.empty())
    throw std::invalid_argument("cannot estimate from an empty sample");
  const int n = sample.items.front().dag.n;
  // One max-shifted linear pass per matrix cell set: accumulate exp(joint -
  // shift) per edge, normalize by the captured total.
  const double shift = sample.log_total_weight;
  std::vector<std::vector<double>> acc(
      static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n), 0.0));
  double total = 0.0;
  for (const auto& item : sample.items) {
    const double w = std::exp(item.log_joint - shift);
    total += w;
    for (int i = 0; i < n; ++i) {
      NodeSet pa = item.dag.parents[static_cast<std::size_t>(i)];
      while (pa) {
        const int j = lowest_bit(pa);
        pa &= pa - 1;
        acc[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] += w;
      }
    }
  }
  for (auto& row : acc)
    for (double& v : row) v = std::min(1.0, v / total);
  return acc;
}

double estimate_feature_frequency(const std::vector<DdsSample>& samples,
                                  const FeatureExpr& feature) {
  if (samples.empty())
    throw std::invalid_argument("cannot estimate from an empty sample");
  std::uint64_t hits = 0;
  for (const auto& s : samples)
    if (eval_feature(feature, s.dag)) ++hits;
  return static_cast<double>(hits) / static_cast<double>(samples.size());
}

std::vector<std::vector<double>> estimate_edges_order_mean(
    const DpTables& dp, const std::vector<TotalOrder>& orders) {
  if (orders.empty())
    throw std::invalid_argument("cannot estimate from an empty sample");
  const int n = dp.n;
  std::vector<std::vector<double>> acc(
      static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n), 0.0));
  for (const TotalOrder& order : orders) {
    NodeSet placed = 0;
    for (int pos = 0; pos < n; ++pos) {
      const int i = order.sigma[static_cast<std::size_t>(pos)];
      NodeSet u = placed;
      NodeSet js = u;
      while (js) {
        const int j = lowest_bit(js);
        js &= js - 1;
        acc[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] +=
            edge_posterior_in_order(dp, j, i, u);
      }
      placed = with_bit(placed, i);
    }
  }
  const double inv = 1.0 / static_cast<double>(orders.size());
  for (auto& row : acc)
    for (double& v : row) v *= inv;
  return acc;
}

}  // namespace dagsample
