#pragma once

#include <string>
#include <vector>

#include "tabsynth/ingest.hpp"
#include "tabsynth/random.hpp"
#include "tabsynth/style_profile.hpp"
#include "tabsynth/table_model.hpp"

namespace tabsynth {

struct WeightedKeyword {
  std::string keyword;
  double weight = 1.0;
};

struct CategoryDescriptor {
  std::string id;
  std::vector<WeightedKeyword> keywords;
  std::vector<StyleProfile> profiles;
  bool fallback = false;
};

/// Line height used to turn an observed span height back into a font size
/// when the span does not carry one.
inline constexpr double kLineHeightRatio = 1.2;

/// Recovers a profile from extracted geometry. Horizontal alignment and
/// left/right padding are chosen per column, vertical alignment and
/// top/bottom padding per row; the most common choice becomes the table
/// default and other rows/columns get overrides.
StyleProfile extract_style_profile(const std::vector<TextSpan>& texts,
                                   const std::vector<LineSegment>& lines, const TableGrid& grid,
                                   const GridBoundaries& boundaries);

/// Highest keyword score wins, ties by list order; zero score yields the
/// fallback descriptor (the first one flagged, else the first listed).
std::string match_category(const CellContent& content,
                           const std::vector<CategoryDescriptor>& descriptors);

/// Multiplies every numeric attribute by (1+u), u ~ U[-max_frac, max_frac].
/// Modes, alignment kinds, line types, fonts, masks and colours are kept.
StyleProfile perturb_profile(const StyleProfile& profile, double max_frac, Rng& rng);

/// Uniform draw from the category's candidate set.
const StyleProfile& select_profile(const std::string& category_id,
                                   const std::vector<CategoryDescriptor>& descriptors, Rng& rng);

/// Calls `f(double&)` on every numeric attribute in a fixed order.
template <class F>
void for_each_numeric(StyleProfile& p, F&& f);

// --- implementation -------------------------------------------------------

namespace detail {
template <class F>
void numeric_fields(CellStyle& s, F& f) {
  if (s.font_size) f(*s.font_size);
  if (s.line_spacing) f(*s.line_spacing);
  if (s.block_align) f(s.block_align->indent);
  if (s.h_align) f(s.h_align->indent);
  if (s.v_align) f(s.v_align->indent);
  if (s.padding_top) f(*s.padding_top);
  if (s.padding_bottom) f(*s.padding_bottom);
  if (s.padding_left) f(*s.padding_left);
  if (s.padding_right) f(*s.padding_right);
}
}  // namespace detail

template <class F>
void for_each_numeric(StyleProfile& p, F&& f) {
  detail::numeric_fields(p.table, f);
  for (auto& [k, s] : p.rows) detail::numeric_fields(s, f);
  for (auto& [k, s] : p.cols) detail::numeric_fields(s, f);
  for (auto& c : p.cells) detail::numeric_fields(c.style, f);
  f(p.outer.thickness);
  f(p.inner.thickness);
  f(p.inner.dash);
  f(p.inner.gap);
}

}  // namespace tabsynth
