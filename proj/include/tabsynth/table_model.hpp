#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tabsynth/geometry.hpp"
#include "tabsynth/style_profile.hpp"

namespace tabsynth {

struct GridCell {
  int row = 0;
  int col = 0;
  int row_span = 1;
  int col_span = 1;
  bool is_header = false;

  bool is_spanning() const { return row_span > 1 || col_span > 1; }
  friend bool operator==(const GridCell&, const GridCell&) = default;
};

/// Logical table structure. Cells are kept sorted row-major by their
/// top-left anchor; the tiling invariant is checked by validate_grid, not
/// enforced here, so that invalid input can still be reported on.
class TableGrid {
 public:
  TableGrid() = default;
  TableGrid(int n_rows, int n_cols, std::vector<GridCell> cells);

  int rows() const { return n_rows_; }
  int cols() const { return n_cols_; }
  const std::vector<GridCell>& cells() const { return cells_; }
  std::size_t size() const { return cells_.size(); }
  const GridCell& operator[](std::size_t i) const { return cells_[i]; }

  friend bool operator==(const TableGrid&, const TableGrid&) = default;

 private:
  int n_rows_ = 0;
  int n_cols_ = 0;
  std::vector<GridCell> cells_;
};

/// Text lines of every cell, parallel to TableGrid::cells().
using CellLines = std::vector<std::string>;
using CellContent = std::vector<CellLines>;

struct SourceTable {
  TableGrid grid;
  CellContent content;
  std::string provenance;
  std::optional<StyleProfile> extracted_style;
};

struct GridViolation {
  enum class Kind { Gap, Overlap, OutOfBounds, BadSpan };
  Kind kind;
  int row;
  int col;
  int coverage;  // number of cells covering (row, col); meaningful for Gap/Overlap
};

struct ValidationReport {
  std::vector<GridViolation> violations;
  bool ok() const { return violations.empty(); }
};

ValidationReport validate_grid(const TableGrid& grid);

int spanning_cell_count(const TableGrid& grid);

/// Builds a SourceTable, rejecting a content vector of the wrong length.
SourceTable make_source_table(TableGrid grid, CellContent content, std::string provenance = {});

/// Index of the cell covering each lattice position, row-major; -1 for gaps.
std::vector<int> cell_index_map(const TableGrid& grid);

}  // namespace tabsynth
