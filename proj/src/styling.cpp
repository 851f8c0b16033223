#include "tabsynth/styling.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>

#include "tabsynth/error.hpp"

namespace tabsynth {
namespace {

// Distance within which a segment is taken to lie on a boundary.
constexpr double kExtractTol = 2.0;

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

template <class T>
T most_common(const std::vector<T>& values, T fallback) {
  std::vector<std::pair<T, int>> counts;
  for (const auto& v : values) {
    auto it = std::find_if(counts.begin(), counts.end(), [&](const auto& p) { return p.first == v; });
    if (it == counts.end()) counts.emplace_back(v, 1);
    else ++it->second;
  }
  if (counts.empty()) return fallback;
  // First-seen wins ties.
  auto best = counts.begin();
  for (auto it = counts.begin(); it != counts.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  return best->first;
}

Rect unite(const Rect& a, const Rect& b) {
  const double x0 = std::min(a.x, b.x);
  const double y0 = std::min(a.y, b.y);
  const double x1 = std::max(a.right(), b.right());
  const double y1 = std::max(a.bottom(), b.bottom());
  return Rect{x0, y0, x1 - x0, y1 - y0};
}

struct CellEvidence {
  Rect block;
  std::vector<Rect> lines;
};

/// Covered fraction of [a, b] by segments of one orientation lying at `pos`.
double coverage(const std::vector<LineSegment>& segs, Orientation o, double pos, double a, double b) {
  std::vector<std::pair<double, double>> iv;
  for (const auto& s : segs) {
    if (s.orientation != o || std::abs(s.position - pos) > kExtractTol) continue;
    const double lo = std::max(a, s.start - kExtractTol);
    const double hi = std::min(b, s.end + kExtractTol);
    if (hi > lo) iv.emplace_back(lo, hi);
  }
  std::sort(iv.begin(), iv.end());
  double covered = 0.0;
  double cur_lo = 0.0;
  double cur_hi = 0.0;
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
  return b > a ? covered / (b - a) : 0.0;
}

/// Picks the hypothesis with the smallest total absolute deviation; earlier
/// entries win ties.
template <std::size_t N>
std::size_t argmin(const std::array<double, N>& cost) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < N; ++i) {
    if (cost[i] < cost[best] - 1e-9) best = i;
  }
  return best;
}

struct AxisChoice {
  int align = 0;  // index into the hypothesis list
  double pad_lo = 0.0;
  double pad_hi = 0.0;
  bool has_data = false;
};

/// Alignment and paddings along one axis from (cell extent, block extent) pairs.
AxisChoice choose_axis(const std::vector<std::pair<std::pair<double, double>, std::pair<double, double>>>& obs) {
  AxisChoice out;
  if (obs.empty()) return out;
  out.has_data = true;
  out.pad_lo = std::numeric_limits<double>::infinity();
  out.pad_hi = std::numeric_limits<double>::infinity();
  for (const auto& [cell, block] : obs) {
    out.pad_lo = std::min(out.pad_lo, block.first - cell.first);
    out.pad_hi = std::min(out.pad_hi, cell.second - block.second);
  }
  // Hypotheses: 0 = start, 1 = centre, 2 = end.
  std::array<double, 3> cost{0.0, 0.0, 0.0};
  for (const auto& [cell, block] : obs) {
    const double a0 = cell.first + out.pad_lo;
    const double a1 = cell.second - out.pad_hi;
    cost[0] += std::abs(block.first - a0);
    cost[1] += std::abs(0.5 * (block.first + block.second) - 0.5 * (a0 + a1));
    cost[2] += std::abs(a1 - block.second);
  }
  out.align = static_cast<int>(argmin(cost));
  out.pad_lo = std::max(0.0, out.pad_lo);
  out.pad_hi = std::max(0.0, out.pad_hi);
  return out;
}

}  // namespace

StyleProfile extract_style_profile(const std::vector<TextSpan>& texts,
                                   const std::vector<LineSegment>& lines, const TableGrid& grid,
                                   const GridBoundaries& boundaries) {
  if (grid.size() == 0 || grid.rows() != boundaries.rows() || grid.cols() != boundaries.cols()) {
    throw Error(Errc::InsufficientEvidence, "grid has no cells or does not match its boundaries");
  }
  const auto& xs = boundaries.col_xs;
  const auto& ys = boundaries.row_ys;
  const std::vector<int> index = cell_index_map(grid);

  std::vector<std::vector<std::size_t>> members(grid.size());
  std::vector<double> sizes;
  std::vector<std::string> families;
  std::vector<Rgb> colors;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const auto& t = texts[i];
    if (t.text.empty()) continue;
    const double cx = t.box.center_x();
    const double cy = t.box.center_y();
    if (cx < xs.front() || cx > xs.back() || cy < ys.front() || cy > ys.back()) continue;
    const int c = std::clamp(static_cast<int>(std::upper_bound(xs.begin(), xs.end(), cx) - xs.begin()) - 1, 0, grid.cols() - 1);
    const int r = std::clamp(static_cast<int>(std::upper_bound(ys.begin(), ys.end(), cy) - ys.begin()) - 1, 0, grid.rows() - 1);
    members[index[static_cast<std::size_t>(r) * grid.cols() + c]].push_back(i);
    sizes.push_back(t.font_size ? *t.font_size : t.box.h / kLineHeightRatio);
    if (t.font_family) families.push_back(*t.font_family);
    if (t.color) colors.push_back(*t.color);
  }
  if (sizes.empty()) throw Error(Errc::InsufficientEvidence, "no text inside the table");

  // Per-cell blocks and line boxes.
  std::vector<std::optional<CellEvidence>> evidence(grid.size());
  for (std::size_t ci = 0; ci < grid.size(); ++ci) {
    auto m = members[ci];
    if (m.empty()) continue;
    std::stable_sort(m.begin(), m.end(), [&](std::size_t a, std::size_t b) {
      return texts[a].box.y != texts[b].box.y ? texts[a].box.y < texts[b].box.y : texts[a].box.x < texts[b].box.x;
    });
    CellEvidence ev;
    ev.block = texts[m.front()].box;
    Rect first = texts[m.front()].box;
    Rect line = first;
    for (std::size_t k = 1; k < m.size(); ++k) {
      const Rect& cur = texts[m[k]].box;
      ev.block = unite(ev.block, cur);
      const double overlap = std::min(first.bottom(), cur.bottom()) - std::max(first.y, cur.y);
      if (overlap >= 0.5 * std::min(first.h, cur.h)) {
        line = unite(line, cur);
      } else {
        ev.lines.push_back(line);
        first = cur;
        line = cur;
      }
    }
    ev.lines.push_back(line);
    evidence[ci] = std::move(ev);
  }

  StyleProfile p;
  p.id = "extracted";
  p.table.font_family = most_common<std::string>(families, "sans");
  p.table.font_size = median(sizes);
  p.table.color = most_common<Rgb>(colors, kBlack);
  p.table.background = kWhite;

  // Line spacing and intra-block alignment from multi-line cells.
  std::vector<double> spacings;
  std::array<double, 3> block_cost{0.0, 0.0, 0.0};
  for (const auto& ev : evidence) {
    if (!ev || ev->lines.size() < 2) continue;
    for (std::size_t k = 1; k < ev->lines.size(); ++k) {
      spacings.push_back(std::max(0.0, ev->lines[k].y - ev->lines[k - 1].bottom()));
    }
    for (const auto& l : ev->lines) {
      block_cost[0] += std::abs(l.x - ev->block.x);
      block_cost[1] += std::abs(l.center_x() - ev->block.center_x());
      block_cost[2] += std::abs(ev->block.right() - l.right());
    }
  }
  p.table.line_spacing = spacings.empty() ? 0.0 : median(spacings);
  constexpr std::array<BlockAlign, 3> kBlockKinds{BlockAlign::Left, BlockAlign::Center, BlockAlign::Right};
  p.table.block_align = BlockAlignment{kBlockKinds[argmin(block_cost)], 0.0};

  // Columns: horizontal alignment and left/right padding.
  constexpr std::array<HAlign, 3> kHKinds{HAlign::Left, HAlign::Center, HAlign::Right};
  constexpr std::array<VAlign, 3> kVKinds{VAlign::Top, VAlign::Center, VAlign::Bottom};
  std::vector<AxisChoice> col_choice(grid.cols());
  std::vector<AxisChoice> row_choice(grid.rows());
  for (int c = 0; c < grid.cols(); ++c) {
    std::vector<std::pair<std::pair<double, double>, std::pair<double, double>>> obs;
    for (std::size_t ci = 0; ci < grid.size(); ++ci) {
      const auto& cell = grid[ci];
      if (cell.col != c || cell.col_span != 1 || !evidence[ci]) continue;
      const Rect box = boundaries.cell_rect(cell);
      obs.push_back({{box.x, box.right()}, {evidence[ci]->block.x, evidence[ci]->block.right()}});
    }
    col_choice[c] = choose_axis(obs);
  }
  for (int r = 0; r < grid.rows(); ++r) {
    std::vector<std::pair<std::pair<double, double>, std::pair<double, double>>> obs;
    for (std::size_t ci = 0; ci < grid.size(); ++ci) {
      const auto& cell = grid[ci];
      if (cell.row != r || cell.row_span != 1 || !evidence[ci]) continue;
      const Rect box = boundaries.cell_rect(cell);
      obs.push_back({{box.y, box.bottom()}, {evidence[ci]->block.y, evidence[ci]->block.bottom()}});
    }
    row_choice[r] = choose_axis(obs);
  }

  auto table_defaults = [](const std::vector<AxisChoice>& choices, int& align, double& lo, double& hi) {
    std::vector<int> aligns;
    std::vector<double> los;
    std::vector<double> his;
    for (const auto& ch : choices) {
      if (!ch.has_data) continue;
      aligns.push_back(ch.align);
      los.push_back(ch.pad_lo);
      his.push_back(ch.pad_hi);
    }
    align = most_common<int>(aligns, 0);
    lo = los.empty() ? 0.0 : median(los);
    hi = his.empty() ? 0.0 : median(his);
  };
  int h_align = 0;
  int v_align = 0;
  double pl = 0.0;
  double pr = 0.0;
  double pt = 0.0;
  double pb = 0.0;
  table_defaults(col_choice, h_align, pl, pr);
  table_defaults(row_choice, v_align, pt, pb);
  p.table.h_align = HorizontalAlignment{kHKinds[h_align], 0.0};
  p.table.v_align = VerticalAlignment{kVKinds[v_align], 0.0};
  p.table.padding_left = pl;
  p.table.padding_right = pr;
  p.table.padding_top = pt;
  p.table.padding_bottom = pb;

  for (int c = 0; c < grid.cols(); ++c) {
    const auto& ch = col_choice[c];
    if (!ch.has_data) continue;
    CellStyle s;
    if (ch.align != h_align) s.h_align = HorizontalAlignment{kHKinds[ch.align], 0.0};
    if (ch.pad_lo != pl) s.padding_left = ch.pad_lo;
    if (ch.pad_hi != pr) s.padding_right = ch.pad_hi;
    if (!(s == CellStyle{})) p.cols[c] = s;
  }
  for (int r = 0; r < grid.rows(); ++r) {
    const auto& ch = row_choice[r];
    if (!ch.has_data) continue;
    CellStyle s;
    if (ch.align != v_align) s.v_align = VerticalAlignment{kVKinds[ch.align], 0.0};
    if (ch.pad_lo != pt) s.padding_top = ch.pad_lo;
    if (ch.pad_hi != pb) s.padding_bottom = ch.pad_hi;
    if (!(s == CellStyle{})) p.rows[r] = s;
  }

  // Borders.
  const int R = grid.rows();
  const int C = grid.cols();
  auto present = [&](Orientation o, double pos, double a, double b) {
    return coverage(lines, o, pos, a, b) >= kSeparatorCoverage;
  };
  const bool top = present(Orientation::Horizontal, ys.front(), xs.front(), xs.back());
  const bool bottom = present(Orientation::Horizontal, ys.back(), xs.front(), xs.back());
  const bool left = present(Orientation::Vertical, xs.front(), ys.front(), ys.back());
  const bool right = present(Orientation::Vertical, xs.back(), ys.front(), ys.back());
  if (top && bottom && left && right) p.outer.mode = OuterMode::Full;
  else if (top && bottom) p.outer.mode = OuterMode::NoSides;
  else if (left && right) p.outer.mode = OuterMode::NoTopBottom;
  else p.outer.mode = OuterMode::None;

  // Inner edges that separate two distinct cells.
  struct EdgeObs {
    int boundary;
    int lattice;
    bool visible;
  };
  std::vector<EdgeObs> h_edges;
  std::vector<EdgeObs> v_edges;
  for (int k = 1; k < R; ++k) {
    for (int c = 0; c < C; ++c) {
      if (index[(k - 1) * C + c] == index[k * C + c]) continue;
      h_edges.push_back({k, c, present(Orientation::Horizontal, ys[k], xs[c], xs[c + 1])});
    }
  }
  for (int k = 1; k < C; ++k) {
    for (int r = 0; r < R; ++r) {
      if (index[r * C + k - 1] == index[r * C + k]) continue;
      v_edges.push_back({k, r, present(Orientation::Vertical, xs[k], ys[r], ys[r + 1])});
    }
  }
  auto all_of = [](const std::vector<EdgeObs>& e, bool v) {
    return std::all_of(e.begin(), e.end(), [v](const EdgeObs& o) { return o.visible == v; });
  };
  const bool h_all = all_of(h_edges, true);
  const bool h_none = !h_edges.empty() && all_of(h_edges, false);
  const bool v_all = all_of(v_edges, true);
  const bool v_none = !v_edges.empty() && all_of(v_edges, false);

  auto partial = [&](const std::vector<EdgeObs>& edges, Orientation o) {
    // Boundaries fully drawn go into the mask; the rest become edge overrides.
    std::map<int, std::pair<int, int>> per_boundary;  // boundary -> (visible, total)
    for (const auto& e : edges) {
      auto& [vis, tot] = per_boundary[e.boundary];
      vis += e.visible;
      ++tot;
    }
    for (const auto& [k, counts] : per_boundary) {
      if (counts.first == counts.second) p.inner.mask.push_back(k);
    }
    for (const auto& e : edges) {
      const auto& counts = per_boundary[e.boundary];
      if (counts.first == counts.second || counts.first == 0 || e.visible == false) continue;
      if (o == Orientation::Horizontal) p.inner.edges.push_back({e.boundary, e.lattice, EdgeSide::Top, true});
      else p.inner.edges.push_back({e.lattice, e.boundary, EdgeSide::Left, true});
    }
  };

  if (h_all && v_all) {
    p.inner.mode = InnerMode::Full;
  } else if (h_none && v_all) {
    p.inner.mode = InnerMode::NoHorizontal;
  } else if (h_all && v_none) {
    p.inner.mode = InnerMode::NoVertical;
  } else if ((h_none || h_edges.empty()) && (v_none || v_edges.empty())) {
    p.inner.mode = InnerMode::None;
  } else if (v_all) {
    p.inner.mode = InnerMode::PartialHorizontal;
    partial(h_edges, Orientation::Horizontal);
  } else if (h_all) {
    p.inner.mode = InnerMode::PartialVertical;
    partial(v_edges, Orientation::Vertical);
  } else {
    p.inner.mode = InnerMode::Full;
    for (const auto& e : h_edges) {
      if (!e.visible) p.inner.edges.push_back({e.boundary, e.lattice, EdgeSide::Top, false});
    }
    for (const auto& e : v_edges) {
      if (!e.visible) p.inner.edges.push_back({e.lattice, e.boundary, EdgeSide::Left, false});
    }
  }

  // Thickness from the segments on the frame versus the interior.
  std::vector<double> outer_t;
  std::vector<double> inner_t;
  for (const auto& s : lines) {
    const bool on_frame = s.orientation == Orientation::Horizontal
                              ? (std::abs(s.position - ys.front()) <= kExtractTol || std::abs(s.position - ys.back()) <= kExtractTol)
                              : (std::abs(s.position - xs.front()) <= kExtractTol || std::abs(s.position - xs.back()) <= kExtractTol);
    (on_frame ? outer_t : inner_t).push_back(s.thickness);
  }
  if (!outer_t.empty()) p.outer.thickness = median(outer_t);
  if (!inner_t.empty()) p.inner.thickness = median(inner_t);
  return p;
}

std::string match_category(const CellContent& content,
                           const std::vector<CategoryDescriptor>& descriptors) {
  if (descriptors.empty()) throw Error(Errc::UnknownCategory, "no category descriptors");
  std::string all;
  for (const auto& lines : content) {
    for (const auto& line : lines) {
      all += line;
      all.push_back('\n');
    }
  }
  std::size_t best = 0;
  double best_score = 0.0;
  for (std::size_t i = 0; i < descriptors.size(); ++i) {
    double score = 0.0;
    for (const auto& kw : descriptors[i].keywords) {
      if (!kw.keyword.empty() && all.find(kw.keyword) != std::string::npos) score += kw.weight;
    }
    if (score > best_score) {
      best_score = score;
      best = i;
    }
  }
  if (best_score > 0.0) return descriptors[best].id;
  const auto fb = std::find_if(descriptors.begin(), descriptors.end(),
                               [](const CategoryDescriptor& d) { return d.fallback; });
  return fb != descriptors.end() ? fb->id : descriptors.front().id;
}

StyleProfile perturb_profile(const StyleProfile& profile, double max_frac, Rng& rng) {
  StyleProfile out = profile;
  if (max_frac <= 0.0) return out;
  for_each_numeric(out, [&](double& v) {
    const double u = rng.uniform(-max_frac, max_frac);
    // Paddings and indents may reach 0; strictly positive sizes stay positive.
    v = std::max(v * (1.0 + u), v * 1e-6);
  });
  return out;
}

const StyleProfile& select_profile(const std::string& category_id,
                                   const std::vector<CategoryDescriptor>& descriptors, Rng& rng) {
  const auto it = std::find_if(descriptors.begin(), descriptors.end(),
                               [&](const CategoryDescriptor& d) { return d.id == category_id; });
  if (it == descriptors.end()) throw Error(Errc::UnknownCategory, "unknown category '" + category_id + "'");
  if (it->profiles.empty()) throw Error(Errc::UnknownCategory, "category '" + category_id + "' has no profiles");
  return it->profiles[rng.index(it->profiles.size())];
}

}  // namespace tabsynth
