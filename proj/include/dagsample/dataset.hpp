#pragma once

// Discrete datasets: CSV ingestion and sparse family contingency counts.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dagsample/common.hpp"

namespace dagsample {

// A fully observed discrete dataset.  Cell values are category indices in
// [0, arity[j]); category labels are kept in first-appearance order so that
// the index assignment is a deterministic function of the file contents.
struct Dataset {
  std::vector<std::string> names;                 // column names, size n
  std::vector<int> arity;                         // categories per column, >= 2
  std::vector<std::vector<std::string>> labels;   // labels[j][v] = text of category v
  std::vector<std::vector<std::uint8_t>> rows;    // m rows of n category indices

  int n() const { return static_cast<int>(names.size()); }
  int m() const { return static_cast<int>(rows.size()); }

  // Column index for a name; -1 when absent.
  int column(const std::string& name) const;
};

struct CsvOptions {
  char delimiter = ',';
  bool header = true;  // when false, columns are named X0, X1, ...
};

// Loads a complete discrete dataset.  Rejects (DataError): empty files,
// ragged rows, empty cells, duplicate column names, columns with fewer than
// two observed categories, and columns with more than 256 categories.
Dataset load_csv(const std::string& path, const CsvOptions& options = {});
Dataset parse_csv_text(const std::string& text, const CsvOptions& options = {});

// Contingency counts for one family (child i, parent set pa).  Only parent
// configurations that occur in the data are materialized.  A configuration is
// indexed in mixed radix over the parents in ascending variable order, first
// parent most significant.
struct FamilyCounts {
  int child = -1;
  int child_arity = 0;
  std::vector<int> parent_nodes;  // ascending
  // parent configuration index -> per-child-state counts (size child_arity).
  // std::map keeps iteration deterministic (ascending configuration index).
  std::map<std::uint64_t, std::vector<std::uint32_t>> cells;
};

// Single pass over the rows; requires i in [0,n) and pa a subset of the
// variables excluding i (std::invalid_argument otherwise).
FamilyCounts family_counts(const Dataset& data, int i, NodeSet pa);

// Writes a dataset back out as CSV (used by the synthetic generator).
std::string to_csv_text(const Dataset& data, char delimiter = ',');

}  // namespace dagsample
