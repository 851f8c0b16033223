#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tabsynth/geometry.hpp"
#include "tabsynth/style_profile.hpp"
#include "tabsynth/table_model.hpp"

namespace tabsynth {

/// Text fragment produced by an upstream PDF parser or OCR engine.
struct TextSpan {
  Rect box;
  std::string text;
  std::optional<double> font_size;
  std::optional<std::string> font_family;
  std::optional<Rgb> color;
};

/// Sorted lattice coordinates: n_rows+1 row ys and n_cols+1 column xs.
struct GridBoundaries {
  std::vector<double> row_ys;
  std::vector<double> col_xs;

  int rows() const { return static_cast<int>(row_ys.size()) - 1; }
  int cols() const { return static_cast<int>(col_xs.size()) - 1; }

  /// Box of the lattice rectangle covered by a cell.
  Rect cell_rect(const GridCell& cell) const {
    return Rect{col_xs[cell.col], row_ys[cell.row], col_xs[cell.col + cell.col_span] - col_xs[cell.col],
                row_ys[cell.row + cell.row_span] - row_ys[cell.row]};
  }
};

/// Fraction of a shared lattice edge a segment must cover to separate cells.
inline constexpr double kSeparatorCoverage = 0.8;

/// Parses one <table> element (table/thead/tbody/tfoot/tr/td/th with
/// rowspan/colspan). Cells inside <thead> or written as <th> are headers.
SourceTable parse_markup_table(std::string_view source);

/// Single-linkage clustering of sorted values with gap <= tol; each cluster
/// becomes its mean.
std::vector<double> snap_boundaries(std::vector<double> values, double tol);

/// Grid recovered from ruling lines, with the lattice and the TextSpan
/// indices assigned to each cell (top-to-bottom, left-to-right).
struct InferredTable {
  SourceTable table;
  GridBoundaries boundaries;
  std::vector<std::vector<std::size_t>> cell_spans;
};

InferredTable infer_table_from_lines(const std::vector<LineSegment>& lines,
                                     const std::vector<TextSpan>& texts, double tol);

SourceTable infer_grid_from_lines(const std::vector<LineSegment>& lines,
                                  const std::vector<TextSpan>& texts, double tol);

/// Groups the spans of one cell into text lines: a span starts a new line
/// when its vertical overlap with the line's first span is below half of
/// the shorter height.
std::vector<std::string> group_text_lines(const std::vector<TextSpan>& texts,
                                          const std::vector<std::size_t>& members);

}  // namespace tabsynth
