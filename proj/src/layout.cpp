#include "tabsynth/layout.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>

#include "tabsynth/error.hpp"

namespace tabsynth {

TextBlock measure_text_block(const std::vector<std::string>& lines, const ResolvedStyle& style,
                             const FontMetrics& metrics) {
  TextBlock block;
  if (lines.empty()) return block;
  const double lh = metrics.line_height(style.font_family, style.font_size);
  std::vector<double> widths;
  widths.reserve(lines.size());
  for (const auto& l : lines) widths.push_back(metrics.line_width(style.font_family, style.font_size, l));

  const bool indent = style.block_align.kind == BlockAlign::Indent;
  const double d = indent ? style.block_align.indent : 0.0;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    block.width = std::max(block.width, widths[i] + (i == 0 ? d : 0.0));
  }
  const auto n = static_cast<double>(lines.size());
  block.height = n * lh + (n - 1.0) * style.line_spacing;

  for (std::size_t i = 0; i < widths.size(); ++i) {
    double x = 0.0;
    switch (style.block_align.kind) {
      case BlockAlign::Left: x = 0.0; break;
      case BlockAlign::Right: x = block.width - widths[i]; break;
      case BlockAlign::Center: x = (block.width - widths[i]) / 2.0; break;
      case BlockAlign::Indent: x = i == 0 ? d : 0.0; break;
    }
    block.lines.push_back(Rect{x, static_cast<double>(i) * (lh + style.line_spacing), widths[i], lh});
  }
  return block;
}

namespace {

double h_offset(const HorizontalAlignment& a, double avail, double w) {
  const double slack = std::max(0.0, avail - w);
  switch (a.kind) {
    case HAlign::Left: return 0.0;
    case HAlign::Right: return slack;
    case HAlign::Center: return slack / 2.0;
    case HAlign::IndentLeft: return std::min(a.indent, slack);
    case HAlign::IndentRight: return std::max(0.0, slack - a.indent);
  }
  return 0.0;
}

double v_offset(const VerticalAlignment& a, double avail, double h) {
  const double slack = std::max(0.0, avail - h);
  switch (a.kind) {
    case VAlign::Top: return 0.0;
    case VAlign::Bottom: return slack;
    case VAlign::Center: return slack / 2.0;
    case VAlign::IndentTop: return std::min(a.indent, slack);
    case VAlign::IndentBottom: return std::max(0.0, slack - a.indent);
  }
  return 0.0;
}

/// Scales sizes[first, first+count) so they sum to at least `need`.
void grow_span(Eigen::VectorXd& sizes, int first, int count, double need) {
  auto seg = sizes.segment(first, count);
  const double have = seg.sum();
  if (need <= have) return;
  if (have > 0.0) seg *= need / have;
  else seg.setConstant(need / count);
}

std::vector<double> partial_sums(const Eigen::VectorXd& sizes) {
  std::vector<double> out(static_cast<std::size_t>(sizes.size()) + 1, 0.0);
  for (Eigen::Index i = 0; i < sizes.size(); ++i) out[i + 1] = out[i] + sizes[i];
  return out;
}

}  // namespace

std::vector<LineSegment> grid_rulings(const TableGrid& grid, const GridBoundaries& b,
                                      double outer_thickness, double inner_thickness) {
  const int R = grid.rows();
  const int C = grid.cols();
  const std::vector<int> index = cell_index_map(grid);
  auto at = [&](int r, int c) { return index[static_cast<std::size_t>(r) * C + c]; };
  std::vector<LineSegment> out;

  for (int k = 0; k <= R; ++k) {
    const bool outer = k == 0 || k == R;
    int c = 0;
    while (c < C) {
      auto edge = [&](int cc) { return outer || at(k - 1, cc) != at(k, cc); };
      if (!edge(c)) {
        ++c;
        continue;
      }
      const int c0 = c;
      while (c < C && edge(c)) ++c;
      out.push_back({Orientation::Horizontal, b.row_ys[k], b.col_xs[c0], b.col_xs[c],
                     outer ? outer_thickness : inner_thickness});
    }
  }
  for (int k = 0; k <= C; ++k) {
    const bool outer = k == 0 || k == C;
    int r = 0;
    while (r < R) {
      auto edge = [&](int rr) { return outer || at(rr, k - 1) != at(rr, k); };
      if (!edge(r)) {
        ++r;
        continue;
      }
      const int r0 = r;
      while (r < R && edge(r)) ++r;
      out.push_back({Orientation::Vertical, b.col_xs[k], b.row_ys[r0], b.row_ys[r],
                     outer ? outer_thickness : inner_thickness});
    }
  }
  return out;
}

LayoutResult solve_layout(const TableGrid& grid, const CellContent& content, const StyleProfile& profile,
                          const FontMetrics& metrics) {
  if (!validate_grid(grid).ok()) throw Error(Errc::InconsistentSpans, "layout needs a tiled grid");
  if (content.size() != grid.size()) throw Error(Errc::InconsistentSpans, "content does not match grid");
  const int R = grid.rows();
  const int C = grid.cols();
  const std::size_t n = grid.size();

  std::vector<ResolvedStyle> styles;
  std::vector<TextBlock> blocks;
  std::vector<double> min_h(n);  // block height, or one line height for empty cells
  styles.reserve(n);
  blocks.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    styles.push_back(resolve_style(profile, grid[i].row, grid[i].col, R, C));
    blocks.push_back(measure_text_block(content[i], styles[i], metrics));
    min_h[i] = content[i].empty() ? metrics.line_height(styles[i].font_family, styles[i].font_size)
                                  : blocks[i].height;
  }
  auto need_h = [&](std::size_t i) { return min_h[i] + styles[i].padding_top + styles[i].padding_bottom; };
  auto need_w = [&](std::size_t i) { return blocks[i].width + styles[i].padding_left + styles[i].padding_right; };

  // Bottom-up: rows from cells one row tall, columns from cells one column wide.
  Eigen::VectorXd heights = Eigen::VectorXd::Zero(R);
  Eigen::VectorXd widths = Eigen::VectorXd::Zero(C);
  std::vector<bool> row_sized(R, false);
  std::vector<bool> col_sized(C, false);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& cell = grid[i];
    if (cell.row_span == 1) {
      heights[cell.row] = std::max(heights[cell.row], need_h(i));
      row_sized[cell.row] = true;
    }
    if (cell.col_span == 1) {
      widths[cell.col] = std::max(widths[cell.col], need_w(i));
      col_sized[cell.col] = true;
    }
  }
  // Rows or columns covered only by merged cells get one line / one em so
  // they never collapse.
  for (std::size_t i = 0; i < n; ++i) {
    const auto& cell = grid[i];
    const auto& s = styles[i];
    for (int r = cell.row; r < cell.row + cell.row_span; ++r) {
      if (!row_sized[r]) {
        heights[r] = std::max(heights[r], metrics.line_height(s.font_family, s.font_size) + s.padding_top + s.padding_bottom);
      }
    }
    for (int c = cell.col; c < cell.col + cell.col_span; ++c) {
      if (!col_sized[c]) widths[c] = std::max(widths[c], s.font_size + s.padding_left + s.padding_right);
    }
  }

  // Merged cells inherit their extent; overflow grows the spanned tracks.
  for (std::size_t i = 0; i < n; ++i) {
    const auto& cell = grid[i];
    if (cell.row_span > 1) grow_span(heights, cell.row, cell.row_span, need_h(i));
    if (cell.col_span > 1) grow_span(widths, cell.col, cell.col_span, need_w(i));
  }

  // Settle floating-point shortfalls so every block fits its aligned box
  // exactly as computed from the final boundaries.
  GridBoundaries b;
  for (;;) {
    b.row_ys = partial_sums(heights);
    b.col_xs = partial_sums(widths);
    bool fits = true;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& cell = grid[i];
      const auto& s = styles[i];
      const Rect box = b.cell_rect(cell);
      const double ah = box.h - s.padding_top - s.padding_bottom;
      const double aw = box.w - s.padding_left - s.padding_right;
      if (ah < min_h[i]) {
        double& last = heights[cell.row + cell.row_span - 1];
        last = std::max(last + (min_h[i] - ah), std::nextafter(last, std::numeric_limits<double>::infinity()));
        fits = false;
      }
      if (aw < blocks[i].width) {
        double& last = widths[cell.col + cell.col_span - 1];
        last = std::max(last + (blocks[i].width - aw), std::nextafter(last, std::numeric_limits<double>::infinity()));
        fits = false;
      }
    }
    if (fits) break;
  }

  LayoutResult out;
  out.table_box = Rect{0.0, 0.0, b.col_xs.back(), b.row_ys.back()};
  out.cells.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = styles[i];
    CellLayout cl;
    cl.style = s;
    cl.cell_box = b.cell_rect(grid[i]);
    cl.aligned_box = Rect{cl.cell_box.x + s.padding_left, cl.cell_box.y + s.padding_top,
                          cl.cell_box.w - s.padding_left - s.padding_right,
                          cl.cell_box.h - s.padding_top - s.padding_bottom};
    const TextBlock& blk = blocks[i];
    cl.block_box = Rect{cl.aligned_box.x + h_offset(s.h_align, cl.aligned_box.w, blk.width),
                        cl.aligned_box.y + v_offset(s.v_align, cl.aligned_box.h, blk.height), blk.width, blk.height};
    for (const auto& l : blk.lines) {
      cl.line_boxes.push_back(Rect{cl.block_box.x + l.x, cl.block_box.y + l.y, l.w, l.h});
    }
    cl.lines = content[i];
    out.cells.push_back(std::move(cl));
  }
  out.rulings = grid_rulings(grid, b, profile.outer.thickness, profile.inner.thickness);
  out.boundaries = std::move(b);
  return out;
}

}  // namespace tabsynth
