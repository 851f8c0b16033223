#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tabsynth/geometry.hpp"

namespace tabsynth {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

inline constexpr Rgb kBlack{0, 0, 0};
inline constexpr Rgb kWhite{255, 255, 255};

/// Alignment of text lines inside a text block. `Indent` offsets the first line.
enum class BlockAlign { Left, Center, Right, Indent };
/// Horizontal alignment of a text block inside its aligned box.
enum class HAlign { Left, Right, Center, IndentLeft, IndentRight };
/// Vertical alignment of a text block inside its aligned box.
enum class VAlign { Top, Bottom, Center, IndentTop, IndentBottom };

struct BlockAlignment {
  BlockAlign kind = BlockAlign::Left;
  double indent = 0.0;
  friend bool operator==(const BlockAlignment&, const BlockAlignment&) = default;
};

struct HorizontalAlignment {
  HAlign kind = HAlign::Left;
  double indent = 0.0;
  friend bool operator==(const HorizontalAlignment&, const HorizontalAlignment&) = default;
};

struct VerticalAlignment {
  VAlign kind = VAlign::Top;
  double indent = 0.0;
  friend bool operator==(const VerticalAlignment&, const VerticalAlignment&) = default;
};

/// Partial set of cell-level attributes. Unset fields fall through to the
/// next coarser granularity.
struct CellStyle {
  std::optional<std::string> font_family;
  std::optional<double> font_size;
  std::optional<Rgb> color;
  std::optional<double> line_spacing;
  std::optional<BlockAlignment> block_align;
  std::optional<HorizontalAlignment> h_align;
  std::optional<VerticalAlignment> v_align;
  std::optional<double> padding_top;
  std::optional<double> padding_bottom;
  std::optional<double> padding_left;
  std::optional<double> padding_right;
  std::optional<Rgb> background;

  /// Copies every field set in `specific` over this one.
  void overlay(const CellStyle& specific);

  friend bool operator==(const CellStyle&, const CellStyle&) = default;
};

/// Every attribute of a single cell after precedence resolution.
struct ResolvedStyle {
  std::string font_family;
  double font_size = 0.0;
  Rgb color;
  double line_spacing = 0.0;
  BlockAlignment block_align;
  HorizontalAlignment h_align;
  VerticalAlignment v_align;
  double padding_top = 0.0;
  double padding_bottom = 0.0;
  double padding_left = 0.0;
  double padding_right = 0.0;
  Rgb background;

  friend bool operator==(const ResolvedStyle&, const ResolvedStyle&) = default;
};

enum class OuterMode { Full, NoSides, NoTopBottom, None };
enum class OuterLineType { SingleSolid, DoubleSolid };

struct OuterBorder {
  OuterMode mode = OuterMode::Full;
  OuterLineType line_type = OuterLineType::SingleSolid;
  double thickness = 1.0;
  Rgb color = kBlack;
  friend bool operator==(const OuterBorder&, const OuterBorder&) = default;
};

enum class InnerMode { Full, NoHorizontal, NoVertical, None, PartialHorizontal, PartialVertical };
enum class InnerLineType { Solid, Dashed };
enum class EdgeSide { Top, Bottom, Left, Right };

struct EdgeOverride {
  int row = 0;
  int col = 0;
  EdgeSide side = EdgeSide::Top;
  bool visible = true;
  friend bool operator==(const EdgeOverride&, const EdgeOverride&) = default;
};

/// Inner ruling attributes. For the partial modes `mask` lists the internal
/// boundaries that stay drawn: boundary k sits between row (or column) k-1
/// and k; negative entries count from the far edge (-1 = before the last row).
struct InnerBorder {
  InnerMode mode = InnerMode::Full;
  std::vector<int> mask;
  InnerLineType line_type = InnerLineType::Solid;
  double dash = 4.0;
  double gap = 2.0;
  double thickness = 1.0;
  Rgb color = kBlack;
  std::map<int, bool> row_dividers;  // horizontal boundary index -> visible
  std::map<int, bool> col_dividers;  // vertical boundary index -> visible
  std::vector<EdgeOverride> edges;
  friend bool operator==(const InnerBorder&, const InnerBorder&) = default;
};

struct CellOverride {
  int row = 0;
  int col = 0;
  CellStyle style;
  friend bool operator==(const CellOverride&, const CellOverride&) = default;
};

/// House style of a table. Row, column and cell keys may be negative, in
/// which case they count from the end (-1 = last row).
struct StyleProfile {
  std::string id;
  CellStyle table;
  std::map<int, CellStyle> rows;
  std::map<int, CellStyle> cols;
  std::vector<CellOverride> cells;
  OuterBorder outer;
  InnerBorder inner;

  friend bool operator==(const StyleProfile&, const StyleProfile&) = default;
};

/// Resolves the style of the cell anchored at (row, col). Precedence is
/// cell > column > row > table. Throws Errc::UnresolvableAttribute.
ResolvedStyle resolve_style(const StyleProfile& profile, int row, int col, int n_rows, int n_cols);

/// Visibility of one lattice edge of an internal boundary. For horizontal
/// boundaries `boundary` is in [1, n_rows-1] and `lattice` is the column;
/// for vertical ones `boundary` is in [1, n_cols-1] and `lattice` is the row.
bool inner_edge_visible(const StyleProfile& profile, Orientation orientation, int boundary,
                        int lattice, int n_rows, int n_cols);

/// Which sides of the outer boundary are drawn.
struct OuterSides {
  bool top = true;
  bool bottom = true;
  bool left = true;
  bool right = true;
};
OuterSides outer_sides(OuterMode mode);

/// Checks pixel attributes, returning human-readable violations.
std::vector<std::string> profile_violations(const StyleProfile& profile);

/// A fully specified, fully bordered default profile.
StyleProfile default_profile();

}  // namespace tabsynth
