#include "dagsample/dataset.hpp"

#include <fstream>
#include <sstream>
#include <unordered_map>

namespace dagsample {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_line(const std::string& line, char delimiter) {
  std::vector<std::string> out;
  std::string cell;
  for (char c : line) {
    if (c == delimiter) {
      out.push_back(trim(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  out.push_back(trim(cell));
  return out;
}

}  // namespace

int Dataset::column(const std::string& name) const {
  for (int j = 0; j < n(); ++j)
    if (names[static_cast<std::size_t>(j)] == name) return j;
  return -1;
}

Dataset parse_csv_text(const std::string& text, const CsvOptions& options) {
  constexpr int kMaxCategories = 256;
  std::istringstream in(text);
  std::string line;
  std::vector<std::vector<std::string>> table;
  std::size_t line_no = 0;
  std::vector<std::size_t> line_numbers;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;  // skip blank lines
    table.push_back(split_line(line, options.delimiter));
    line_numbers.push_back(line_no);
  }
  if (table.empty()) throw DataError("dataset is empty");

  Dataset data;
  std::size_t first_row = 0;
  const std::size_t n_cols = table[0].size();
  if (options.header) {
    data.names = table[0];
    first_row = 1;
    for (std::size_t j = 0; j < n_cols; ++j) {
      if (data.names[j].empty())
        throw DataError("empty column name in header at column " +
                        std::to_string(j + 1));
      for (std::size_t j2 = 0; j2 < j; ++j2)
        if (data.names[j2] == data.names[j])
          throw DataError("duplicate column name '" + data.names[j] + "'");
    }
  } else {
    data.names.reserve(n_cols);
    for (std::size_t j = 0; j < n_cols; ++j)
      data.names.push_back("X" + std::to_string(j));
  }
  if (table.size() <= first_row) throw DataError("dataset has no data rows");

  data.labels.assign(n_cols, {});
  std::vector<std::unordered_map<std::string, int>> index(n_cols);
  data.rows.reserve(table.size() - first_row);
  for (std::size_t r = first_row; r < table.size(); ++r) {
    const auto& cells = table[r];
    if (cells.size() != n_cols)
      throw DataError("row at line " + std::to_string(line_numbers[r]) +
                      " has " + std::to_string(cells.size()) +
                      " cells, expected " + std::to_string(n_cols));
    std::vector<std::uint8_t> row(n_cols);
    for (std::size_t j = 0; j < n_cols; ++j) {
      const std::string& cell = cells[j];
      if (cell.empty())
        throw DataError("missing value at line " +
                        std::to_string(line_numbers[r]) + ", column '" +
                        data.names[j] + "'");
      auto it = index[j].find(cell);
      int v;
      if (it == index[j].end()) {
        v = static_cast<int>(data.labels[j].size());
        if (v >= kMaxCategories)
          throw DataError("column '" + data.names[j] + "' has more than " +
                          std::to_string(kMaxCategories) + " categories");
        index[j].emplace(cell, v);
        data.labels[j].push_back(cell);
      } else {
        v = it->second;
      }
      row[j] = static_cast<std::uint8_t>(v);
    }
    data.rows.push_back(std::move(row));
  }

  data.arity.resize(n_cols);
  for (std::size_t j = 0; j < n_cols; ++j) {
    data.arity[j] = static_cast<int>(data.labels[j].size());
    if (data.arity[j] < 2)
      throw DataError("column '" + data.names[j] +
                      "' has a single observed category; discrete scoring "
                      "requires at least two");
  }
  return data;
}

Dataset load_csv(const std::string& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_csv_text(buffer.str(), options);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

FamilyCounts family_counts(const Dataset& data, int i, NodeSet pa) {
  const int n = data.n();
  if (i < 0 || i >= n) throw std::invalid_argument("family_counts: child out of range");
  if (contains(pa, i))
    throw std::invalid_argument("family_counts: parent set contains the child");
  if (n < 32 && (pa & ~full_set(n)) != 0)
    throw std::invalid_argument("family_counts: parent set exceeds variable range");

  FamilyCounts counts;
  counts.child = i;
  counts.child_arity = data.arity[static_cast<std::size_t>(i)];
  counts.parent_nodes = set_bits(pa);

  // Mixed-radix strides, first (lowest-index) parent most significant.
  const std::size_t p = counts.parent_nodes.size();
  std::vector<std::uint64_t> stride(p, 1);
  for (std::size_t t = p; t-- > 1;)
    stride[t - 1] =
        stride[t] *
        static_cast<std::uint64_t>(data.arity[static_cast<std::size_t>(counts.parent_nodes[t])]);

  for (const auto& row : data.rows) {
    std::uint64_t config = 0;
    for (std::size_t t = 0; t < p; ++t)
      config += stride[t] * row[static_cast<std::size_t>(counts.parent_nodes[t])];
    auto [it, inserted] = counts.cells.try_emplace(
        config, std::vector<std::uint32_t>(
                    static_cast<std::size_t>(counts.child_arity), 0));
    ++it->second[row[static_cast<std::size_t>(i)]];
  }
  return counts;
}

std::string to_csv_text(const Dataset& data, char delimiter) {
  std::ostringstream out;
  for (int j = 0; j < data.n(); ++j) {
    if (j) out << delimiter;
    out << data.names[static_cast<std::size_t>(j)];
  }
  out << '\n';
  for (const auto& row : data.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << delimiter;
      out << data.labels[j][row[j]];
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace dagsample
