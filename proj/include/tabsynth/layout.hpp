#pragma once

#include <string>
#include <vector>

#include "tabsynth/font_metrics.hpp"
#include "tabsynth/geometry.hpp"
#include "tabsynth/ingest.hpp"
#include "tabsynth/style_profile.hpp"
#include "tabsynth/table_model.hpp"

namespace tabsynth {

/// A measured text block; line boxes are relative to the block's top-left.
struct TextBlock {
  double width = 0.0;
  double height = 0.0;
  std::vector<Rect> lines;
};

TextBlock measure_text_block(const std::vector<std::string>& lines, const ResolvedStyle& style,
                             const FontMetrics& metrics);

struct CellLayout {
  Rect cell_box;
  Rect aligned_box;
  Rect block_box;
  std::vector<Rect> line_boxes;
  std::vector<std::string> lines;  // text of each line box
  ResolvedStyle style;
};

/// Absolute geometry of a table in table-local coordinates (origin at the
/// table's top-left corner).
struct LayoutResult {
  Rect table_box;
  GridBoundaries boundaries;
  std::vector<CellLayout> cells;  // parallel to TableGrid::cells()
  std::vector<LineSegment> rulings;
};

/// Bottom-up sizing of rows and columns from unmerged cells (and cells
/// merged only across the other axis), then top-down placement inside
/// merged cells. A merged cell whose block does not fit grows its rows or
/// columns proportionally.
LayoutResult solve_layout(const TableGrid& grid, const CellContent& content, const StyleProfile& profile,
                          const FontMetrics& metrics);

/// Every cell boundary as maximal collinear segments, outer frame included.
std::vector<LineSegment> grid_rulings(const TableGrid& grid, const GridBoundaries& boundaries,
                                      double outer_thickness, double inner_thickness);

}  // namespace tabsynth
