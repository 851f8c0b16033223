#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tabsynth/layout.hpp"
#include "tabsynth/serialization.hpp"
#include "tabsynth/table_model.hpp"

namespace tabsynth {

/// Integer box [x, y, w, h] in image pixels.
using IntBox = std::array<long, 4>;

struct CellAnnotation {
  std::vector<std::string> tokens;
  IntBox bbox{};
  std::vector<IntBox> lines;
};

struct AnnotationMeta {
  int spanning_cell_count = 0;
  bool bordered = false;
  std::string category_id;
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
  std::string profile_id;
  bool retained = false;
  int width = 0;
  int height = 0;
};

struct AnnotationRecord {
  std::string image_file;
  std::vector<std::string> structure_tokens;
  std::vector<CellAnnotation> cells;  // row-major, parallel to the grid
  AnnotationMeta meta;
};

/// Number of leading rows emitted inside <thead>: the longest prefix whose
/// cells are all headers and do not span past it.
int header_row_count(const TableGrid& grid);

/// Canonical markup: row-major rows, spans as attributes, leading header
/// rows in <thead> followed by <tbody>; tables without leading header rows
/// get no section wrappers. Lines of a cell are joined with <br>.
std::string emit_structure_markup(const TableGrid& grid, const CellContent& content);

/// Structure-only token list; concatenated it is valid markup (with empty cells).
std::vector<std::string> structure_tokens(const TableGrid& grid);

/// Rebuilds markup from structure tokens, filling cells in order with
/// `cell_text` when given.
std::string tokens_to_markup(const std::vector<std::string>& tokens,
                             const std::vector<std::string>* cell_text = nullptr);

/// Builds a record from a layout. Boxes are offset by `margin` and rounded
/// half-up. `meta.width/height` must hold the image size. Throws
/// Errc::BoxOutOfBounds when a rounded box escapes its container.
AnnotationRecord emit_annotation(const LayoutResult& layout, const TableGrid& grid, const CellContent& content,
                                 AnnotationMeta meta, std::string image_file, int margin);

json annotation_to_json(const AnnotationRecord& record);
AnnotationRecord annotation_from_json(const json& j);

/// Markup of a record, with cell text (space-joined tokens) when `with_content`.
std::string record_markup(const AnnotationRecord& record, bool with_content);

}  // namespace tabsynth
