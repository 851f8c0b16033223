#include "tabsynth/ingest.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <numeric>

#include "tabsynth/error.hpp"
#include "tabsynth/markup.hpp"
#include "tabsynth/text.hpp"

namespace tabsynth {
namespace {

const markup::Node* find_table(const markup::Node& n) {
  if (n.tag == "table") return &n;
  for (const auto& child : n.children) {
    if (const auto* t = find_table(child)) return t;
  }
  return nullptr;
}

bool contains_table(const markup::Node& n) {
  for (const auto& child : n.children) {
    if (child.tag == "table" || contains_table(child)) return true;
  }
  return false;
}

struct RowRef {
  const markup::Node* tr;
  bool in_head;
};

void collect_rows(const markup::Node& table, std::vector<RowRef>& rows) {
  for (const auto& child : table.children) {
    if (child.tag == "tr") {
      rows.push_back({&child, false});
    } else if (child.tag == "thead" || child.tag == "tbody" || child.tag == "tfoot") {
      for (const auto& tr : child.children) {
        if (tr.tag == "tr") rows.push_back({&tr, child.tag == "thead"});
      }
    }
  }
}

/// Occupancy grid that grows to the right on demand.
class Occupancy {
 public:
  bool taken(int r, int c) const {
    return r < static_cast<int>(rows_.size()) && c < static_cast<int>(rows_[r].size()) && rows_[r][c];
  }
  void take(int r, int c) {
    if (r >= static_cast<int>(rows_.size())) rows_.resize(r + 1);
    if (c >= static_cast<int>(rows_[r].size())) rows_[r].resize(c + 1, 0);
    rows_[r][c] = 1;
  }
  int width() const {
    int w = 0;
    for (const auto& row : rows_) w = std::max(w, static_cast<int>(row.size()));
    return w;
  }

 private:
  std::vector<std::vector<char>> rows_;
};

}  // namespace

SourceTable parse_markup_table(std::string_view source) {
  const markup::Node root = markup::parse(source);
  const markup::Node* table = find_table(root);
  if (!table) throw Error(Errc::EmptyTable, "no <table> element");

  std::vector<RowRef> rows;
  collect_rows(*table, rows);
  if (rows.empty()) throw Error(Errc::EmptyTable, "table has no rows");

  Occupancy occ;
  std::vector<GridCell> cells;
  std::vector<std::pair<GridCell, CellLines>> placed;
  const int n_rows = static_cast<int>(rows.size());
  for (int r = 0; r < n_rows; ++r) {
    int c = 0;
    for (const auto& td : rows[r].tr->children) {
      if (td.tag != "td" && td.tag != "th") continue;
      if (contains_table(td)) throw Error(Errc::MalformedMarkup, "nested tables are not supported");
      while (occ.taken(r, c)) ++c;
      GridCell cell{r, c, markup::span_attr(td, "rowspan"), markup::span_attr(td, "colspan"),
                    td.tag == "th" || rows[r].in_head};
      if (r + cell.row_span > n_rows) {
        throw Error(Errc::InconsistentSpans, "rowspan of cell at row " + std::to_string(r) +
                                                 " exceeds the " + std::to_string(n_rows) + " rows");
      }
      for (int i = r; i < r + cell.row_span; ++i) {
        for (int j = c; j < c + cell.col_span; ++j) {
          if (occ.taken(i, j)) {
            throw Error(Errc::InconsistentSpans, "cell at (" + std::to_string(r) + "," +
                                                     std::to_string(c) + ") overlaps position (" +
                                                     std::to_string(i) + "," + std::to_string(j) + ")");
          }
          occ.take(i, j);
        }
      }
      placed.emplace_back(cell, markup::cell_lines(td));
      c += cell.col_span;
    }
  }
  const int n_cols = occ.width();
  if (n_cols == 0) throw Error(Errc::EmptyTable, "table has no cells");
  for (int r = 0; r < n_rows; ++r) {
    for (int c = 0; c < n_cols; ++c) {
      if (!occ.taken(r, c)) {
        throw Error(Errc::InconsistentSpans, "no cell covers position (" + std::to_string(r) + "," +
                                                 std::to_string(c) + ")");
      }
    }
  }
  // placed is already row-major by anchor, which is the TableGrid order.
  CellContent content;
  for (auto& [cell, lines] : placed) {
    cells.push_back(cell);
    content.push_back(std::move(lines));
  }
  return make_source_table(TableGrid(n_rows, n_cols, std::move(cells)), std::move(content), "markup");
}

std::vector<double> snap_boundaries(std::vector<double> values, double tol) {
  std::sort(values.begin(), values.end());
  std::vector<double> out;
  std::size_t i = 0;
  while (i < values.size()) {
    std::size_t j = i + 1;
    double sum = values[i];
    while (j < values.size() && values[j] - values[j - 1] <= tol) sum += values[j++];
    out.push_back(sum / static_cast<double>(j - i));
    i = j;
  }
  return out;
}

namespace {

std::size_t nearest_index(const std::vector<double>& sorted, double v) {
  const auto it = std::lower_bound(sorted.begin(), sorted.end(), v);
  if (it == sorted.begin()) return 0;
  if (it == sorted.end()) return sorted.size() - 1;
  const auto hi = static_cast<std::size_t>(it - sorted.begin());
  return (v - sorted[hi - 1] <= sorted[hi] - v) ? hi - 1 : hi;
}

/// Segments grouped by the boundary they snapped to, for one orientation.
class RulingIndex {
 public:
  RulingIndex(const std::vector<LineSegment>& lines, Orientation o, const std::vector<double>& positions,
              double tol)
      : tol_(tol), by_boundary_(positions.size()) {
    for (const auto& s : lines) {
      if (s.orientation != o) continue;
      by_boundary_[nearest_index(positions, s.position)].push_back(&s);
    }
  }

  /// Whether segments on boundary k cover enough of [a, b].
  bool separates(std::size_t k, double a, double b) const {
    std::vector<std::pair<double, double>> iv;
    for (const auto* s : by_boundary_[k]) {
      const double lo = std::max(a, s->start - tol_);
      const double hi = std::min(b, s->end + tol_);
      if (hi > lo) iv.emplace_back(lo, hi);
    }
    std::sort(iv.begin(), iv.end());
    double covered = 0.0;
    double cur_lo = 0.0;
    double cur_hi = -1.0;
    bool open = false;
    for (const auto& [lo, hi] : iv) {
      if (!open || lo > cur_hi) {
        if (open) covered += cur_hi - cur_lo;
        cur_lo = lo;
        cur_hi = hi;
        open = true;
      } else {
        cur_hi = std::max(cur_hi, hi);
      }
    }
    if (open) covered += cur_hi - cur_lo;
    return covered >= kSeparatorCoverage * (b - a);
  }

 private:
  double tol_;
  std::vector<std::vector<const LineSegment*>> by_boundary_;
};

std::vector<double> positions_of(const std::vector<LineSegment>& lines, Orientation o, double tol) {
  std::vector<double> v;
  for (const auto& s : lines) {
    if (s.orientation == o) v.push_back(s.position);
  }
  return snap_boundaries(std::move(v), tol);
}

/// Separator flags over the lattice. h(k, c): horizontal boundary k at
/// column c; v(r, k): vertical boundary k at row r.
struct Separators {
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> h;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> v;
};

Separators compute_separators(const std::vector<LineSegment>& lines, const std::vector<double>& ys,
                              const std::vector<double>& xs, const std::vector<double>& all_ys,
                              const std::vector<double>& all_xs, double tol) {
  // Segments are bucketed against the full snapped position lists so that
  // dropping a boundary never reassigns its segments to a neighbour.
  const RulingIndex hidx(lines, Orientation::Horizontal, all_ys, tol);
  const RulingIndex vidx(lines, Orientation::Vertical, all_xs, tol);
  const auto R = static_cast<Eigen::Index>(ys.size()) - 1;
  const auto C = static_cast<Eigen::Index>(xs.size()) - 1;
  Separators s;
  s.h.resize(R + 1, C);
  s.v.resize(R, C + 1);
  for (Eigen::Index k = 0; k <= R; ++k) {
    const auto bucket = nearest_index(all_ys, ys[k]);
    for (Eigen::Index c = 0; c < C; ++c) s.h(k, c) = hidx.separates(bucket, xs[c], xs[c + 1]);
  }
  for (Eigen::Index k = 0; k <= C; ++k) {
    const auto bucket = nearest_index(all_xs, xs[k]);
    for (Eigen::Index r = 0; r < R; ++r) s.v(r, k) = vidx.separates(bucket, ys[r], ys[r + 1]);
  }
  return s;
}

}  // namespace

std::vector<std::string> group_text_lines(const std::vector<TextSpan>& texts,
                                          const std::vector<std::size_t>& members) {
  std::vector<std::size_t> order = members;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ra = texts[a].box;
    const auto& rb = texts[b].box;
    return ra.y != rb.y ? ra.y < rb.y : ra.x < rb.x;
  });
  std::vector<std::vector<std::size_t>> lines;
  for (std::size_t i : order) {
    if (!lines.empty()) {
      const Rect& first = texts[lines.back().front()].box;
      const Rect& cur = texts[i].box;
      const double overlap = std::min(first.bottom(), cur.bottom()) - std::max(first.y, cur.y);
      if (overlap >= 0.5 * std::min(first.h, cur.h)) {
        lines.back().push_back(i);
        continue;
      }
    }
    lines.push_back({i});
  }
  std::vector<std::string> out;
  for (auto& line : lines) {
    std::stable_sort(line.begin(), line.end(),
                     [&](std::size_t a, std::size_t b) { return texts[a].box.x < texts[b].box.x; });
    std::string joined;
    for (std::size_t i : line) joined = text::join_fragments(joined, text::collapse_whitespace(texts[i].text));
    out.push_back(std::move(joined));
  }
  return out;
}

InferredTable infer_table_from_lines(const std::vector<LineSegment>& lines,
                                     const std::vector<TextSpan>& texts, double tol) {
  const std::vector<double> all_ys = positions_of(lines, Orientation::Horizontal, tol);
  const std::vector<double> all_xs = positions_of(lines, Orientation::Vertical, tol);
  if (all_ys.size() < 2 || all_xs.size() < 2) {
    throw Error(Errc::NoOuterBoundary, "need at least two horizontal and two vertical rulings");
  }

  // Drop boundaries that separate nothing (stray ticks, redundant lattice
  // lines), then require the outer frame to be closed.
  std::vector<double> ys = all_ys;
  std::vector<double> xs = all_xs;
  Separators sep;
  for (;;) {
    sep = compute_separators(lines, ys, xs, all_ys, all_xs, tol);
    const auto R = static_cast<Eigen::Index>(ys.size()) - 1;
    const auto C = static_cast<Eigen::Index>(xs.size()) - 1;
    bool changed = false;
    for (Eigen::Index k = R - 1; k >= 1 && !changed; --k) {
      if (!sep.h.row(k).any()) {
        ys.erase(ys.begin() + k);
        changed = true;
      }
    }
    for (Eigen::Index k = C - 1; k >= 1 && !changed; --k) {
      if (!sep.v.col(k).any()) {
        xs.erase(xs.begin() + k);
        changed = true;
      }
    }
    if (!changed) break;
  }
  const int R = static_cast<int>(ys.size()) - 1;
  const int C = static_cast<int>(xs.size()) - 1;
  if (!sep.h.row(0).all() || !sep.h.row(R).all() || !sep.v.col(0).all() || !sep.v.col(C).all()) {
    throw Error(Errc::NoOuterBoundary, "outer frame is not closed");
  }
  for (const auto& s : lines) {
    const auto& lo = s.orientation == Orientation::Horizontal ? xs.front() : ys.front();
    const auto& hi = s.orientation == Orientation::Horizontal ? xs.back() : ys.back();
    if (s.start < lo - tol || s.end > hi + tol) {
      throw Error(Errc::NoOuterBoundary, "a ruling extends beyond the outer frame");
    }
  }

  // Union lattice neighbours that have no separator between them.
  std::vector<int> parent(static_cast<std::size_t>(R) * C);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  auto unite = [&](int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  };
  for (int r = 0; r < R; ++r) {
    for (int c = 0; c < C; ++c) {
      if (c + 1 < C && !sep.v(r, c + 1)) unite(r * C + c, r * C + c + 1);
      if (r + 1 < R && !sep.h(r + 1, c)) unite(r * C + c, (r + 1) * C + c);
    }
  }
  struct Extent {
    int r0 = 1 << 30, c0 = 1 << 30, r1 = -1, c1 = -1, count = 0;
  };
  std::vector<Extent> ext(parent.size());
  for (int r = 0; r < R; ++r) {
    for (int c = 0; c < C; ++c) {
      auto& e = ext[find(r * C + c)];
      e.r0 = std::min(e.r0, r);
      e.c0 = std::min(e.c0, c);
      e.r1 = std::max(e.r1, r);
      e.c1 = std::max(e.c1, c);
      ++e.count;
    }
  }
  std::vector<GridCell> cells;
  for (std::size_t i = 0; i < ext.size(); ++i) {
    const auto& e = ext[i];
    if (e.count == 0) continue;
    const int area = (e.r1 - e.r0 + 1) * (e.c1 - e.c0 + 1);
    if (area != e.count) {
      throw Error(Errc::NonRectangularSpan, "merged region anchored at (" + std::to_string(e.r0) + "," +
                                                std::to_string(e.c0) + ") is not a rectangle");
    }
    cells.push_back(GridCell{e.r0, e.c0, e.r1 - e.r0 + 1, e.c1 - e.c0 + 1, false});
  }
  TableGrid grid(R, C, std::move(cells));
  const std::vector<int> index = cell_index_map(grid);

  std::vector<std::vector<std::size_t>> members(grid.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (text::collapse_whitespace(texts[i].text).empty()) continue;
    const double cx = texts[i].box.center_x();
    const double cy = texts[i].box.center_y();
    if (cx < xs.front() - tol || cx > xs.back() + tol || cy < ys.front() - tol || cy > ys.back() + tol) {
      throw Error(Errc::OrphanText, "text \"" + texts[i].text + "\" lies outside the table frame");
    }
    const int c = std::clamp(static_cast<int>(std::upper_bound(xs.begin(), xs.end(), cx) - xs.begin()) - 1, 0, C - 1);
    const int r = std::clamp(static_cast<int>(std::upper_bound(ys.begin(), ys.end(), cy) - ys.begin()) - 1, 0, R - 1);
    members[index[static_cast<std::size_t>(r) * C + c]].push_back(i);
  }

  CellContent content;
  content.reserve(grid.size());
  for (auto& m : members) {
    content.push_back(group_text_lines(texts, m));
    std::stable_sort(m.begin(), m.end(), [&](std::size_t a, std::size_t b) {
      return texts[a].box.y != texts[b].box.y ? texts[a].box.y < texts[b].box.y : texts[a].box.x < texts[b].box.x;
    });
  }
  InferredTable out{make_source_table(std::move(grid), std::move(content), "lines"),
                    GridBoundaries{std::move(ys), std::move(xs)}, std::move(members)};
  return out;
}

SourceTable infer_grid_from_lines(const std::vector<LineSegment>& lines,
                                  const std::vector<TextSpan>& texts, double tol) {
  return infer_table_from_lines(lines, texts, tol).table;
}

}  // namespace tabsynth
