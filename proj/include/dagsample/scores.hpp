#pragma once

// Decomposable structure scores.  For child i with parent set Pa the library
// works throughout with the combined log weight
//
//     log beta_i(Pa) = log rho_i(Pa) + log score_i(Pa : D),
//
// where rho is the modular structure-prior factor and score is the local
// marginal likelihood (K2 or BDeu).  Per-node tables of log beta over all
// parent sets up to the in-degree bound are the single scoring input of the
// dynamic program, the samplers and the exact references.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dagsample/common.hpp"
#include "dagsample/dataset.hpp"
#include "dagsample/structures.hpp"

namespace dagsample {

enum class ScoreFamily { kK2, kBdeu };

enum class RhoMode {
  kUniform,      // rho_i(Pa) = 1
  kInvBinomial,  // rho_i(Pa) = 1 / C(n-1, |Pa|), flat over parent-set sizes
};

struct ScoreConfig {
  ScoreFamily family = ScoreFamily::kK2;
  double ess = 1.0;  // equivalent sample size; BDeu only
  int max_indegree = 3;
  RhoMode rho_mode = RhoMode::kInvBinomial;
  bool allow_large_n = false;       // lift the kDefaultMaxVars guard
  bool truncated_transform = false; // size-layered fast transform variant

  // Conventional pairings: K2 with the size-flattening prior, BDeu (ess 1)
  // with the uniform prior.
  static ScoreConfig defaults_for(ScoreFamily family) {
    ScoreConfig cfg;
    cfg.family = family;
    cfg.rho_mode = family == ScoreFamily::kK2 ? RhoMode::kInvBinomial
                                              : RhoMode::kUniform;
    cfg.ess = 1.0;
    return cfg;
  }
};

const char* score_family_name(ScoreFamily family);
const char* rho_mode_name(RhoMode mode);

// log of the local marginal likelihood of (child i, parents pa) on the data.
double local_score(const Dataset& data, const ScoreConfig& cfg, int i, NodeSet pa);

// log rho for a parent set of the given size.
double log_rho(const ScoreConfig& cfg, int n, int pa_size);

// Per-node dense tables of log beta over squeezed parent-set encodings.
// Entries for |Pa| > max_indegree are -infinity.
struct FamilyScoreTable {
  int n = 0;
  int max_indegree = 0;
  std::vector<std::vector<double>> log_beta;  // [i][squeeze(Pa, i)]

  double log_beta_at(int i, NodeSet pa) const {
    return log_beta[static_cast<std::size_t>(i)][squeeze(pa, i)];
  }

  // log of the unnormalized structure-posterior weight of a DAG,
  // sum_i log beta_i(Pa_i).  -infinity when some family exceeds the
  // in-degree bound.
  double log_structure_joint(const Dag& g) const {
    double total = 0.0;
    for (int i = 0; i < n; ++i)
      total += log_beta_at(i, g.parents[static_cast<std::size_t>(i)]);
    return total;
  }
};

// Scores every family (n * sum_{s<=k} C(n-1, s) local scores).  Throws
// GuardError when n exceeds kDefaultMaxVars without allow_large_n, and
// std::invalid_argument when max_indegree is outside [0, n-1].
FamilyScoreTable build_beta_tables(const Dataset& data, const ScoreConfig& cfg,
                                   int workers = 1);

// 64-bit content hash of everything the score tables depend on (dataset
// contents plus the scoring knobs).
std::uint64_t score_content_hash(const Dataset& data, const ScoreConfig& cfg);

// JSON persistence for score tables, keyed by the content hash.  Loading
// returns nullopt (rather than stale tables) when the file is missing,
// malformed, or hashes differently from the present inputs.
void dump_score_table(const FamilyScoreTable& table, const Dataset& data,
                      const ScoreConfig& cfg, const std::string& path);
std::optional<FamilyScoreTable> try_load_score_table(const std::string& path,
                                                     const Dataset& data,
                                                     const ScoreConfig& cfg);

}  // namespace dagsample
