#include "tabsynth/style_profile.hpp"

#include <algorithm>

#include "tabsynth/error.hpp"

namespace tabsynth {
namespace {

template <class T>
void take(std::optional<T>& dst, const std::optional<T>& src) {
  if (src) dst = src;
}

int resolve_index(int key, int n) { return key < 0 ? n + key : key; }

template <class T>
const T& require(const std::optional<T>& v, const char* name, int row, int col) {
  if (!v) {
    throw Error(Errc::UnresolvableAttribute, std::string(name) + " unset for cell (" +
                                                 std::to_string(row) + "," + std::to_string(col) +
                                                 ")");
  }
  return *v;
}

std::optional<bool> keyed_lookup(const std::map<int, bool>& m, int index, int n) {
  std::optional<bool> out;
  for (const auto& [key, visible] : m) {
    if (resolve_index(key, n) == index) out = visible;
  }
  return out;
}

}  // namespace

void CellStyle::overlay(const CellStyle& s) {
  take(font_family, s.font_family);
  take(font_size, s.font_size);
  take(color, s.color);
  take(line_spacing, s.line_spacing);
  take(block_align, s.block_align);
  take(h_align, s.h_align);
  take(v_align, s.v_align);
  take(padding_top, s.padding_top);
  take(padding_bottom, s.padding_bottom);
  take(padding_left, s.padding_left);
  take(padding_right, s.padding_right);
  take(background, s.background);
}

ResolvedStyle resolve_style(const StyleProfile& profile, int row, int col, int n_rows, int n_cols) {
  CellStyle merged = profile.table;
  for (const auto& [key, style] : profile.rows) {
    if (resolve_index(key, n_rows) == row) merged.overlay(style);
  }
  for (const auto& [key, style] : profile.cols) {
    if (resolve_index(key, n_cols) == col) merged.overlay(style);
  }
  for (const auto& o : profile.cells) {
    if (resolve_index(o.row, n_rows) == row && resolve_index(o.col, n_cols) == col) {
      merged.overlay(o.style);
    }
  }
  ResolvedStyle r;
  r.font_family = require(merged.font_family, "fontFamily", row, col);
  r.font_size = require(merged.font_size, "fontSize", row, col);
  r.color = require(merged.color, "color", row, col);
  r.line_spacing = require(merged.line_spacing, "lineSpacing", row, col);
  r.block_align = require(merged.block_align, "blockAlign", row, col);
  r.h_align = require(merged.h_align, "hAlign", row, col);
  r.v_align = require(merged.v_align, "vAlign", row, col);
  r.padding_top = require(merged.padding_top, "paddingTop", row, col);
  r.padding_bottom = require(merged.padding_bottom, "paddingBottom", row, col);
  r.padding_left = require(merged.padding_left, "paddingLeft", row, col);
  r.padding_right = require(merged.padding_right, "paddingRight", row, col);
  r.background = require(merged.background, "background", row, col);
  return r;
}

bool inner_edge_visible(const StyleProfile& profile, Orientation orientation, int boundary,
                        int lattice, int n_rows, int n_cols) {
  const InnerBorder& inner = profile.inner;
  const bool horizontal = orientation == Orientation::Horizontal;
  const int n_along = horizontal ? n_rows : n_cols;

  bool visible = true;
  switch (inner.mode) {
    case InnerMode::Full:
      visible = true;
      break;
    case InnerMode::None:
      visible = false;
      break;
    case InnerMode::NoHorizontal:
      visible = !horizontal;
      break;
    case InnerMode::NoVertical:
      visible = horizontal;
      break;
    case InnerMode::PartialHorizontal:
    case InnerMode::PartialVertical: {
      const bool partial_here = horizontal == (inner.mode == InnerMode::PartialHorizontal);
      if (partial_here) {
        visible = std::any_of(inner.mask.begin(), inner.mask.end(), [&](int k) {
          return resolve_index(k, n_along) == boundary;
        });
      }
      break;
    }
  }

  if (auto o = keyed_lookup(horizontal ? inner.row_dividers : inner.col_dividers, boundary, n_along)) {
    visible = *o;
  }

  for (const auto& e : inner.edges) {
    const int r = resolve_index(e.row, n_rows);
    const int c = resolve_index(e.col, n_cols);
    bool hit = false;
    if (horizontal) {
      hit = c == lattice && ((e.side == EdgeSide::Top && r == boundary) ||
                             (e.side == EdgeSide::Bottom && r + 1 == boundary));
    } else {
      hit = r == lattice && ((e.side == EdgeSide::Left && c == boundary) ||
                             (e.side == EdgeSide::Right && c + 1 == boundary));
    }
    if (hit) visible = e.visible;
  }
  return visible;
}

OuterSides outer_sides(OuterMode mode) {
  switch (mode) {
    case OuterMode::Full:
      return {true, true, true, true};
    case OuterMode::NoSides:
      return {true, true, false, false};
    case OuterMode::NoTopBottom:
      return {false, false, true, true};
    case OuterMode::None:
      break;
  }
  return {false, false, false, false};
}

std::vector<std::string> profile_violations(const StyleProfile& profile) {
  std::vector<std::string> out;
  auto check = [&](const CellStyle& s, const std::string& where) {
    auto positive = [&](const std::optional<double>& v, const char* name) {
      if (v && !(*v > 0.0)) out.push_back(where + "." + name + " must be > 0");
    };
    auto non_negative = [&](const std::optional<double>& v, const char* name) {
      if (v && !(*v >= 0.0)) out.push_back(where + "." + name + " must be >= 0");
    };
    positive(s.font_size, "fontSize");
    non_negative(s.line_spacing, "lineSpacing");
    non_negative(s.padding_top, "paddingTop");
    non_negative(s.padding_bottom, "paddingBottom");
    non_negative(s.padding_left, "paddingLeft");
    non_negative(s.padding_right, "paddingRight");
    if (s.h_align && !(s.h_align->indent >= 0.0)) out.push_back(where + ".hIndent must be >= 0");
    if (s.v_align && !(s.v_align->indent >= 0.0)) out.push_back(where + ".vIndent must be >= 0");
    if (s.block_align && !(s.block_align->indent >= 0.0)) {
      out.push_back(where + ".blockIndent must be >= 0");
    }
  };
  check(profile.table, "table");
  for (const auto& [k, s] : profile.rows) check(s, "rows[" + std::to_string(k) + "]");
  for (const auto& [k, s] : profile.cols) check(s, "cols[" + std::to_string(k) + "]");
  for (const auto& c : profile.cells) {
    check(c.style, "cells[" + std::to_string(c.row) + "," + std::to_string(c.col) + "]");
  }
  if (!(profile.outer.thickness > 0.0)) out.push_back("outerBorder.thickness must be > 0");
  if (!(profile.inner.thickness > 0.0)) out.push_back("innerBorder.thickness must be > 0");
  if (!(profile.inner.dash > 0.0)) out.push_back("innerBorder.dash must be > 0");
  if (!(profile.inner.gap > 0.0)) out.push_back("innerBorder.gap must be > 0");
  return out;
}

StyleProfile default_profile() {
  StyleProfile p;
  p.id = "default-bordered";
  p.table.font_family = "sans";
  p.table.font_size = 10.0;
  p.table.color = kBlack;
  p.table.line_spacing = 2.0;
  p.table.block_align = BlockAlignment{BlockAlign::Left, 0.0};
  p.table.h_align = HorizontalAlignment{HAlign::Left, 0.0};
  p.table.v_align = VerticalAlignment{VAlign::Center, 0.0};
  p.table.padding_top = 3.0;
  p.table.padding_bottom = 3.0;
  p.table.padding_left = 4.0;
  p.table.padding_right = 4.0;
  p.table.background = kWhite;
  return p;
}

}  // namespace tabsynth
