#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "dagsample/dataset.hpp"
#include "testutil.hpp"

using namespace dagsample;

TEST_CASE("csv parsing: header, labels in first-appearance order, trimming") {
  const Dataset d = parse_csv_text(
      "a, b ,c\n"
      "yes,1, x \n"
      "no,2,y\n"
      "\n"
      "yes,1,z\n");
  CHECK(d.n() == 3);
  CHECK(d.m() == 3);
  CHECK(d.names == std::vector<std::string>{"a", "b", "c"});
  CHECK(d.arity == std::vector<int>{2, 2, 3});
  CHECK(d.labels[0] == std::vector<std::string>{"yes", "no"});
  CHECK(d.labels[2] == std::vector<std::string>{"x", "y", "z"});
  CHECK(d.rows[0] == std::vector<std::uint8_t>{0, 0, 0});
  CHECK(d.rows[1] == std::vector<std::uint8_t>{1, 1, 1});
  CHECK(d.rows[2] == std::vector<std::uint8_t>{0, 0, 2});
  CHECK(d.column("b") == 1);
  CHECK(d.column("missing") == -1);
}

TEST_CASE("csv parsing without header names columns X0..") {
  CsvOptions opt;
  opt.header = false;
  const Dataset d = parse_csv_text("0,1\n1,0\n", opt);
  CHECK(d.names == std::vector<std::string>{"X0", "X1"});
  CHECK(d.m() == 2);
}

TEST_CASE("csv parsing with alternate delimiter") {
  CsvOptions opt;
  opt.delimiter = ';';
  const Dataset d = parse_csv_text("u;v\n1;2\n2;1\n", opt);
  CHECK(d.names == std::vector<std::string>{"u", "v"});
  CHECK(d.arity == std::vector<int>{2, 2});
}

TEST_CASE("csv rejections carry positions") {
  CHECK_THROWS_AS(parse_csv_text(""), DataError);
  CHECK_THROWS_AS(parse_csv_text("a,b\n"), DataError);  // header only
  CHECK_THROWS_AS(parse_csv_text("a,b\n1,2\n3\n"), DataError);  // ragged
  CHECK_THROWS_AS(parse_csv_text("a,b\n1,\n2,3\n"), DataError);  // empty cell
  CHECK_THROWS_AS(parse_csv_text("a,a\n1,2\n2,1\n"), DataError);  // dup name
  CHECK_THROWS_AS(parse_csv_text("a,b\n1,2\n1,3\n"), DataError);  // constant col
  CHECK_THROWS_AS(parse_csv_text("a,\n1,2\n2,1\n"), DataError);  // empty name
  try {
    parse_csv_text("a,b\n1,2\n3\n");
    CHECK(false);
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("csv roundtrip through to_csv_text") {
  // Codes are assigned by first appearance on parse, so the round trip
  // preserves the decoded label table (and arities), not the raw codes.
  const Dataset d = testutil::make_dataset(3, {{0, 1, 0}, {1, 0, 1}, {0, 0, 2}});
  const Dataset back = parse_csv_text(to_csv_text(d));
  CHECK(back.names == d.names);
  CHECK(back.arity == d.arity);
  REQUIRE(back.rows.size() == d.rows.size());
  for (std::size_t r = 0; r < d.rows.size(); ++r)
    for (std::size_t j = 0; j < d.rows[r].size(); ++j)
      CHECK(back.labels[j][back.rows[r][j]] == d.labels[j][d.rows[r][j]]);
}

TEST_CASE("family counts: mixed radix over ascending parents, sparse cells") {
  // Columns: X0 (arity 2), X1 (arity 3), X2 (arity 2).  Child X2 with
  // parents {X0, X1}; configuration index = x0 * 3 + x1.
  const Dataset d = testutil::make_dataset(3, {
      {0, 0, 0},
      {0, 2, 1},
      {1, 1, 1},
      {0, 2, 0},
      {1, 1, 1},
  });
  const FamilyCounts fc = family_counts(d, 2, 0b011u);
  CHECK(fc.child == 2);
  CHECK(fc.child_arity == 2);
  CHECK(fc.parent_nodes == std::vector<int>{0, 1});
  // Observed configurations: (0,0) -> 0, (0,2) -> 2, (1,1) -> 4.
  REQUIRE(fc.cells.size() == 3);
  CHECK(fc.cells.at(0) == std::vector<std::uint32_t>{1, 0});
  CHECK(fc.cells.at(2) == std::vector<std::uint32_t>{1, 1});
  CHECK(fc.cells.at(4) == std::vector<std::uint32_t>{0, 2});
  CHECK(fc.cells.count(1) == 0);  // unobserved configs stay unmaterialized

  // Empty parent set: single configuration 0 with the child's margin.
  const FamilyCounts root = family_counts(d, 0, 0);
  REQUIRE(root.cells.size() == 1);
  CHECK(root.cells.at(0) == std::vector<std::uint32_t>{3, 2});

  CHECK_THROWS_AS(family_counts(d, 3, 0), std::invalid_argument);
  CHECK_THROWS_AS(family_counts(d, 1, 0b010u), std::invalid_argument);
}

TEST_CASE("family counts sum to m for any parent set") {
  const Dataset d = testutil::random_binary_dataset(4, 31, 9);
  for (int i = 0; i < 4; ++i) {
    testutil::plain_subsets_up_to(without_bit(full_set(4), i), 3, [&](NodeSet pa) {
      const FamilyCounts fc = family_counts(d, i, pa);
      std::uint64_t total = 0;
      for (const auto& [config, cell] : fc.cells)
        for (std::uint32_t c : cell) total += c;
      CHECK(total == 31);
    });
  }
}
