#include <doctest.h>

#include <algorithm>

#include "../support/generators.hpp"
#include "tabsynth/error.hpp"
#include "tabsynth/table_model.hpp"

using namespace tabsynth;

TEST_CASE("validate_grid accepts complete tilings") {
  CHECK(validate_grid(TableGrid(1, 2, {{0, 0, 1, 1}, {0, 1, 1, 1}})).ok());
  CHECK(validate_grid(TableGrid(2, 2, {{0, 0, 1, 2}, {1, 0, 1, 1}, {1, 1, 1, 1}})).ok());
}

TEST_CASE("validate_grid reports double coverage") {
  const auto rep = validate_grid(TableGrid(2, 2, {{0, 0, 2, 2}, {1, 1, 1, 1}}));
  REQUIRE_FALSE(rep.ok());
  bool found = false;
  for (const auto& v : rep.violations) {
    if (v.kind == GridViolation::Kind::Overlap && v.row == 1 && v.col == 1 && v.coverage == 2) found = true;
  }
  CHECK(found);
}

TEST_CASE("validate_grid reports gaps and out of bounds cells") {
  auto gap = validate_grid(TableGrid(1, 2, {{0, 0, 1, 1}}));
  REQUIRE_FALSE(gap.ok());
  CHECK(gap.violations[0].kind == GridViolation::Kind::Gap);
  CHECK(gap.violations[0].col == 1);
  CHECK_FALSE(validate_grid(TableGrid(1, 1, {{0, 0, 1, 2}})).ok());
  CHECK_FALSE(validate_grid(TableGrid(1, 1, {{0, 0, 0, 1}})).ok());
}

TEST_CASE("spanning_cell_count") {
  std::vector<GridCell> unit;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) unit.push_back({r, c, 1, 1});
  CHECK(spanning_cell_count(TableGrid(3, 3, unit)) == 0);
  CHECK(spanning_cell_count(TableGrid(2, 2, {{0, 0, 1, 2}, {1, 0, 1, 1}, {1, 1, 1, 1}})) == 1);
  CHECK(spanning_cell_count(TableGrid(3, 3, {{0, 0, 1, 3}, {1, 0, 2, 1}, {1, 1, 1, 1}, {1, 2, 1, 1},
                                             {2, 1, 1, 1}, {2, 2, 1, 1}})) == 2);
}

TEST_CASE("make_source_table checks the content length") {
  TableGrid g(1, 2, {{0, 0, 1, 1}, {0, 1, 1, 1}});
  CHECK_THROWS_AS(make_source_table(g, {{"a"}}), Error);
  CHECK(make_source_table(g, {{"a"}, {}}).content.size() == 2);
}

TEST_CASE("random grids: area sum, brute-force coverage and order-free span count") {
  Rng rng(11);
  for (int k = 0; k < 300; ++k) {
    const TableGrid g = testing::random_grid(rng);
    int area = 0;
    std::vector<int> cover(g.rows() * g.cols(), 0);
    for (const auto& c : g.cells()) {
      area += c.row_span * c.col_span;
      for (int r = c.row; r < c.row + c.row_span; ++r)
        for (int j = c.col; j < c.col + c.col_span; ++j) ++cover[r * g.cols() + j];
    }
    CHECK(area == g.rows() * g.cols());
    const bool all_one = std::all_of(cover.begin(), cover.end(), [](int v) { return v == 1; });
    CHECK(validate_grid(g).ok() == all_one);

    auto cells = g.cells();
    std::reverse(cells.begin(), cells.end());
    int spanning = 0;
    for (const auto& c : cells) spanning += c.is_spanning();
    CHECK(spanning == spanning_cell_count(g));
  }
}

TEST_CASE("corrupted grids fail validation exactly when coverage is not all ones") {
  Rng rng(12);
  for (int k = 0; k < 300; ++k) {
    const TableGrid g = testing::random_grid(rng, {2, 6, 2, 6});
    auto cells = g.cells();
    auto& victim = cells[rng.index(cells.size())];
    if (rng.chance(0.5)) {
      victim.col_span += 1;
    } else {
      cells.erase(cells.begin() + static_cast<long>(rng.index(cells.size())));
    }
    const TableGrid bad(g.rows(), g.cols(), cells);
    std::vector<int> cover(g.rows() * g.cols(), 0);
    bool outside = false;
    for (const auto& c : cells) {
      for (int r = c.row; r < c.row + c.row_span; ++r)
        for (int j = c.col; j < c.col + c.col_span; ++j) {
          if (r >= g.rows() || j >= g.cols()) {
            outside = true;
            continue;
          }
          ++cover[r * g.cols() + j];
        }
    }
    const bool all_one = !outside && std::all_of(cover.begin(), cover.end(), [](int v) { return v == 1; });
    CHECK(validate_grid(bad).ok() == all_one);
  }
}
