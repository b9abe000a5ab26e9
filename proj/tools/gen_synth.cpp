// Synthetic discrete dataset generator: draws a random bounded-indegree DAG,
// equips it with Dirichlet(1) conditional tables, and samples rows by
// ancestral simulation.  Output is a standard CSV consumable by the main
// tool.

#include <cmath>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dagsample/common.hpp"
#include "dagsample/dataset.hpp"
#include "dagsample/rng.hpp"
#include "dagsample/structures.hpp"

namespace {

using dagsample::Dag;
using dagsample::NodeSet;
using dagsample::PhiloxRng;

// Random permutation via Fisher-Yates.
std::vector<int> random_permutation(int n, PhiloxRng& rng) {
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.next_double() * (i + 1));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  return perm;
}

Dag random_dag(int n, int max_indegree, PhiloxRng& rng,
               std::vector<int>& topo_out) {
  topo_out = random_permutation(n, rng);
  Dag g(n);
  for (int pos = 0; pos < n; ++pos) {
    const int node = topo_out[static_cast<std::size_t>(pos)];
    const int bound = std::min(max_indegree, pos);
    const int degree = bound == 0 ? 0 : static_cast<int>(rng.next_double() * (bound + 1));
    // Partial Fisher-Yates over the predecessors picks `degree` distinct ones.
    std::vector<int> pool(topo_out.begin(), topo_out.begin() + pos);
    NodeSet parents = 0;
    for (int d = 0; d < degree; ++d) {
      const int pick = d + static_cast<int>(rng.next_double() *
                                            (static_cast<int>(pool.size()) - d));
      std::swap(pool[static_cast<std::size_t>(d)], pool[static_cast<std::size_t>(pick)]);
      parents = dagsample::with_bit(parents, pool[static_cast<std::size_t>(d)]);
    }
    g.parents[static_cast<std::size_t>(node)] = parents;
  }
  return g;
}

// One Dirichlet(1,...,1) draw: normalized unit exponentials.
std::vector<double> dirichlet_flat(int categories, PhiloxRng& rng) {
  std::vector<double> p(static_cast<std::size_t>(categories));
  double total = 0.0;
  for (double& v : p) {
    v = -std::log(1.0 - rng.next_double());
    total += v;
  }
  for (double& v : p) v /= total;
  return p;
}

int draw_category(const std::vector<double>& p, PhiloxRng& rng) {
  const double u = rng.next_double();
  double acc = 0.0;
  for (std::size_t c = 0; c < p.size(); ++c) {
    acc += p[c];
    if (u < acc) return static_cast<int>(c);
  }
  return static_cast<int>(p.size()) - 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"synthetic discrete dataset generator"};
  int n = 4;
  int m = 100;
  int arity = 2;
  int max_indegree = 3;
  std::uint64_t seed = 0;
  std::string out_path;
  app.add_option("--n", n, "number of variables")->check(CLI::PositiveNumber);
  app.add_option("--m", m, "number of rows")->check(CLI::PositiveNumber);
  app.add_option("--arity", arity, "categories per variable (default 2)")
      ->check(CLI::Range(2, 256));
  app.add_option("--max-indegree", max_indegree,
                 "parent bound of the generating DAG (default 3)");
  app.add_option("--seed", seed, "random seed");
  app.add_option("--out", out_path, "output CSV (default: standard output)");
  CLI11_PARSE(app, argc, argv);

  if (n > 30) {
    std::cerr << "generator supports at most 30 variables\n";
    return 2;
  }

  PhiloxRng rng(seed, dagsample::RngPhase::kSynthetic, 0);
  std::vector<int> topo;
  const Dag g = random_dag(n, std::min(max_indegree, n - 1), rng, topo);

  // Conditional tables: per node, one distribution per parent configuration
  // (mixed radix over ascending parents, matching the counting convention).
  std::vector<std::vector<std::vector<double>>> cpt(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int p = dagsample::popcount(g.parents[static_cast<std::size_t>(i)]);
    std::size_t configs = 1;
    for (int t = 0; t < p; ++t) configs *= static_cast<std::size_t>(arity);
    cpt[static_cast<std::size_t>(i)].reserve(configs);
    for (std::size_t c = 0; c < configs; ++c)
      cpt[static_cast<std::size_t>(i)].push_back(dirichlet_flat(arity, rng));
  }

  dagsample::Dataset data;
  for (int j = 0; j < n; ++j) {
    data.names.push_back("X" + std::to_string(j));
    data.arity.push_back(arity);
    std::vector<std::string> labels;
    for (int c = 0; c < arity; ++c) labels.push_back("c" + std::to_string(c));
    data.labels.push_back(std::move(labels));
  }
  data.rows.assign(static_cast<std::size_t>(m),
                   std::vector<std::uint8_t>(static_cast<std::size_t>(n), 0));
  for (int r = 0; r < m; ++r) {
    auto& row = data.rows[static_cast<std::size_t>(r)];
    for (int pos = 0; pos < n; ++pos) {
      const int node = topo[static_cast<std::size_t>(pos)];
      std::size_t config = 0;
      for (int parent : dagsample::set_bits(g.parents[static_cast<std::size_t>(node)]))
        config = config * static_cast<std::size_t>(arity) +
                 row[static_cast<std::size_t>(parent)];
      row[static_cast<std::size_t>(node)] = static_cast<std::uint8_t>(
          draw_category(cpt[static_cast<std::size_t>(node)][config], rng));
    }
  }

  const std::string csv = dagsample::to_csv_text(data);
  if (out_path.empty()) {
    std::cout << csv;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
      std::cerr << "cannot write " << out_path << "\n";
      return 4;
    }
    out << csv;
  }
  std::cerr << "generating DAG edges: " << g.edge_count() << "\n";
  return 0;
}
