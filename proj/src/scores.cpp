#include "dagsample/scores.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "json.hpp"

#include "dagsample/logspace.hpp"

namespace dagsample {

const char* score_family_name(ScoreFamily family) {
  return family == ScoreFamily::kK2 ? "k2" : "bdeu";
}

const char* rho_mode_name(RhoMode mode) {
  return mode == RhoMode::kUniform ? "uniform" : "invbinom";
}

double log_rho(const ScoreConfig& cfg, int n, int pa_size) {
  if (cfg.rho_mode == RhoMode::kUniform) return 0.0;
  return -std::log(static_cast<double>(binomial(n - 1, pa_size)));
}

double local_score(const Dataset& data, const ScoreConfig& cfg, int i, NodeSet pa) {
  const FamilyCounts counts = family_counts(data, i, pa);
  const double r = static_cast<double>(counts.child_arity);

  if (cfg.family == ScoreFamily::kK2) {
    // Product over observed parent configurations j of
    //   (r-1)! / (N_j + r - 1)! * prod_k N_jk!
    // expressed with lgamma; unobserved configurations contribute factor 1.
    const double lg_r = std::lgamma(r);
    double total = 0.0;
    for (const auto& [config, cell] : counts.cells) {
      std::uint64_t n_j = 0;
      double lg_cells = 0.0;
      for (std::uint32_t c : cell) {
        n_j += c;
        lg_cells += std::lgamma(static_cast<double>(c) + 1.0);
      }
      total += lg_r - std::lgamma(static_cast<double>(n_j) + r) + lg_cells;
    }
    return total;
  }

  // BDeu: Dirichlet hyperparameters split the equivalent sample size evenly
  // over the q_pa * r cells of the family's full contingency table.
  double q_pa = 1.0;
  for (int p : counts.parent_nodes)
    q_pa *= static_cast<double>(data.arity[static_cast<std::size_t>(p)]);
  const double alpha_j = cfg.ess / q_pa;
  const double alpha_jk = cfg.ess / (q_pa * r);
  const double lg_alpha_j = std::lgamma(alpha_j);
  const double lg_alpha_jk = std::lgamma(alpha_jk);
  double total = 0.0;
  for (const auto& [config, cell] : counts.cells) {
    std::uint64_t n_j = 0;
    double inner = 0.0;
    for (std::uint32_t c : cell) {
      if (c == 0) continue;  // lgamma(a + 0) - lgamma(a) = 0
      n_j += c;
      inner += std::lgamma(alpha_jk + static_cast<double>(c)) - lg_alpha_jk;
    }
    total += lg_alpha_j - std::lgamma(alpha_j + static_cast<double>(n_j)) + inner;
  }
  return total;
}

FamilyScoreTable build_beta_tables(const Dataset& data, const ScoreConfig& cfg,
                                   int workers) {
  const int n = data.n();
  if (n > kDefaultMaxVars && !cfg.allow_large_n)
    throw GuardError("dataset has " + std::to_string(n) + " variables; the " +
                     std::to_string(kDefaultMaxVars) +
                     "-variable guard requires an explicit override "
                     "(table memory grows as n*2^n)");
  if (cfg.max_indegree < 0 || cfg.max_indegree > n - 1)
    throw std::invalid_argument("max_indegree must be in [0, n-1]");
  if (cfg.family == ScoreFamily::kBdeu &&
      !(std::isfinite(cfg.ess) && cfg.ess > 0.0))
    throw std::invalid_argument("BDeu requires a positive equivalent sample size");

  FamilyScoreTable table;
  table.n = n;
  table.max_indegree = cfg.max_indegree;
  table.log_beta.assign(static_cast<std::size_t>(n), {});

  parallel_for(static_cast<std::size_t>(n), workers,
               [&](std::size_t begin, std::size_t end) {
                 for (std::size_t i = begin; i < end; ++i) {
                   auto& row = table.log_beta[i];
                   row.assign(std::size_t{1} << (n - 1), kNegInf);
                   const NodeSet others =
                       without_bit(full_set(n), static_cast<int>(i));
                   for_each_subset_up_to(
                       others, cfg.max_indegree, [&](NodeSet pa) {
                         row[squeeze(pa, static_cast<int>(i))] =
                             log_rho(cfg, n, popcount(pa)) +
                             local_score(data, cfg, static_cast<int>(i), pa);
                       });
                 }
               });
  return table;
}

std::uint64_t score_content_hash(const Dataset& data, const ScoreConfig& cfg) {
  Fnv1a64 h;
  h.update_u64(static_cast<std::uint64_t>(data.n()));
  h.update_u64(static_cast<std::uint64_t>(data.m()));
  for (const auto& name : data.names) h.update_string(name);
  for (const auto& col : data.labels) {
    h.update_u64(col.size());
    for (const auto& label : col) h.update_string(label);
  }
  for (const auto& row : data.rows) h.update(row.data(), row.size());
  h.update_string(score_family_name(cfg.family));
  if (cfg.family == ScoreFamily::kBdeu) {
    std::uint64_t ess_bits;
    static_assert(sizeof ess_bits == sizeof cfg.ess);
    std::memcpy(&ess_bits, &cfg.ess, sizeof ess_bits);
    h.update_u64(ess_bits);
  }
  h.update_u64(static_cast<std::uint64_t>(cfg.max_indegree));
  h.update_string(rho_mode_name(cfg.rho_mode));
  return h.digest();
}

namespace {

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

void dump_score_table(const FamilyScoreTable& table, const Dataset& data,
                      const ScoreConfig& cfg, const std::string& path) {
  nlohmann::json j;
  j["format"] = "dagsample-scores-v1";
  j["hash"] = hash_hex(score_content_hash(data, cfg));
  j["n"] = table.n;
  j["max_indegree"] = table.max_indegree;
  j["score"] = score_family_name(cfg.family);
  j["rho"] = rho_mode_name(cfg.rho_mode);
  if (cfg.family == ScoreFamily::kBdeu) j["ess"] = cfg.ess;
  j["names"] = data.names;
  // Only the finite entries are stored: for each node, the log beta values of
  // the canonical enumeration (size, then mask value) of parent sets up to
  // the in-degree bound.
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < table.n; ++i) {
    nlohmann::json row = nlohmann::json::array();
    const NodeSet others = without_bit(full_set(table.n), i);
    for_each_subset_up_to(others, table.max_indegree, [&](NodeSet pa) {
      row.push_back(table.log_beta_at(i, pa));
    });
    rows.push_back(std::move(row));
  }
  j["log_beta"] = std::move(rows);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write score table: " + path);
  out << j.dump() << '\n';
}

std::optional<FamilyScoreTable> try_load_score_table(const std::string& path,
                                                     const Dataset& data,
                                                     const ScoreConfig& cfg) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
  if (!j.is_object() || j.value("format", "") != "dagsample-scores-v1")
    return std::nullopt;
  if (j.value("hash", "") != hash_hex(score_content_hash(data, cfg)))
    return std::nullopt;

  FamilyScoreTable table;
  table.n = data.n();
  table.max_indegree = cfg.max_indegree;
  if (j.value("n", -1) != table.n ||
      j.value("max_indegree", -1) != table.max_indegree)
    return std::nullopt;
  const auto& rows = j.at("log_beta");
  if (!rows.is_array() || static_cast<int>(rows.size()) != table.n)
    return std::nullopt;
  table.log_beta.assign(static_cast<std::size_t>(table.n), {});
  for (int i = 0; i < table.n; ++i) {
    auto& dense = table.log_beta[static_cast<std::size_t>(i)];
    dense.assign(std::size_t{1} << (table.n - 1), kNegInf);
    const auto& row = rows[static_cast<std::size_t>(i)];
    const NodeSet others = without_bit(full_set(table.n), i);
    std::size_t t = 0;
    bool ok = row.is_array() &&
              row.size() == count_subsets_up_to(table.n - 1, table.max_indegree);
    if (!ok) return std::nullopt;
    for_each_subset_up_to(others, table.max_indegree, [&](NodeSet pa) {
      dense[squeeze(pa, i)] = row[t++].get<double>();
    });
  }
  return table;
}

}  // namespace dagsample
