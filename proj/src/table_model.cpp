#include "tabsynth/table_model.hpp"

#include <Eigen/Core>
#include <algorithm>

#include "tabsynth/error.hpp"

namespace tabsynth {

TableGrid::TableGrid(int n_rows, int n_cols, std::vector<GridCell> cells)
    : n_rows_(n_rows), n_cols_(n_cols), cells_(std::move(cells)) {
  std::stable_sort(cells_.begin(), cells_.end(), [](const GridCell& a, const GridCell& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
}

ValidationReport validate_grid(const TableGrid& grid) {
  ValidationReport report;
  if (grid.rows() < 1 || grid.cols() < 1) {
    report.violations.push_back({GridViolation::Kind::OutOfBounds, grid.rows(), grid.cols(), 0});
    return report;
  }
  Eigen::MatrixXi coverage = Eigen::MatrixXi::Zero(grid.rows(), grid.cols());
  for (const auto& cell : grid.cells()) {
    if (cell.row_span < 1 || cell.col_span < 1) {
      report.violations.push_back({GridViolation::Kind::BadSpan, cell.row, cell.col, 0});
      continue;
    }
    if (cell.row < 0 || cell.col < 0 || cell.row + cell.row_span > grid.rows() ||
        cell.col + cell.col_span > grid.cols()) {
      report.violations.push_back({GridViolation::Kind::OutOfBounds, cell.row, cell.col, 0});
      continue;
    }
    coverage.block(cell.row, cell.col, cell.row_span, cell.col_span).array() += 1;
  }
  for (int r = 0; r < grid.rows(); ++r) {
    for (int c = 0; c < grid.cols(); ++c) {
      const int k = coverage(r, c);
      if (k == 0) report.violations.push_back({GridViolation::Kind::Gap, r, c, 0});
      if (k > 1) report.violations.push_back({GridViolation::Kind::Overlap, r, c, k});
    }
  }
  return report;
}

int spanning_cell_count(const TableGrid& grid) {
  return static_cast<int>(std::count_if(grid.cells().begin(), grid.cells().end(),
                                        [](const GridCell& c) { return c.is_spanning(); }));
}

SourceTable make_source_table(TableGrid grid, CellContent content, std::string provenance) {
  if (content.size() != grid.size()) {
    throw Error(Errc::InconsistentSpans, "content has " + std::to_string(content.size()) +
                                             " entries for " + std::to_string(grid.size()) +
                                             " cells");
  }
  return SourceTable{std::move(grid), std::move(content), std::move(provenance), std::nullopt};
}

std::vector<int> cell_index_map(const TableGrid& grid) {
  std::vector<int> map(static_cast<std::size_t>(grid.rows()) * grid.cols(), -1);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& cell = grid[i];
    for (int r = cell.row; r < cell.row + cell.row_span && r < grid.rows(); ++r) {
      for (int c = cell.col; c < cell.col + cell.col_span && c < grid.cols(); ++c) {
        if (r >= 0 && c >= 0) map[static_cast<std::size_t>(r) * grid.cols() + c] = static_cast<int>(i);
      }
    }
  }
  return map;
}

}  // namespace tabsynth
