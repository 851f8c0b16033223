#include "tabsynth/annotate.hpp"

#include <algorithm>

#include "tabsynth/error.hpp"
#include "tabsynth/markup.hpp"
#include "tabsynth/text.hpp"

namespace tabsynth {

int header_row_count(const TableGrid& grid) {
  int best = 0;
  int reach = 0;
  std::size_t i = 0;
  for (int h = 1; h <= grid.rows(); ++h) {
    bool all_header = true;
    for (; i < grid.size() && grid[i].row == h - 1; ++i) {
      all_header = all_header && grid[i].is_header;
      reach = std::max(reach, grid[i].row + grid[i].row_span);
    }
    if (!all_header) break;
    if (reach <= h) best = h;
  }
  return best;
}

namespace {

/// Calls emit(token) for the structure of `grid`, and cell(i) where the
/// content of cell i belongs.
template <class Emit, class Cell>
void walk_structure(const TableGrid& grid, Emit&& emit, Cell&& cell) {
  const int head = header_row_count(grid);
  emit("<table>");
  if (head > 0) emit("<thead>");
  std::size_t i = 0;
  for (int r = 0; r < grid.rows(); ++r) {
    if (head > 0 && r == head) emit("<tbody>");
    emit("<tr>");
    for (; i < grid.size() && grid[i].row == r; ++i) {
      const GridCell& c = grid[i];
      const bool th = c.is_header && r >= head;
      const char* open = th ? "<th" : "<td";
      if (c.is_spanning()) {
        emit(open);
        if (c.row_span > 1) emit(" rowspan=\"" + std::to_string(c.row_span) + "\"");
        if (c.col_span > 1) emit(" colspan=\"" + std::to_string(c.col_span) + "\"");
        emit(">");
      } else {
        emit(std::string(open) + ">");
      }
      cell(i);
      emit(th ? "</th>" : "</td>");
    }
    emit("</tr>");
    if (head > 0 && r == head - 1) emit("</thead>");
  }
  if (head > 0 && head < grid.rows()) emit("</tbody>");
  emit("</table>");
}

std::string cell_markup(const CellLines& lines) {
  std::string out;
  for (std::size_t k = 0; k < lines.size(); ++k) {
    if (k) out += "<br>";
    out += markup::escape_text(lines[k]);
  }
  return out;
}

}  // namespace

std::string emit_structure_markup(const TableGrid& grid, const CellContent& content) {
  std::string out;
  walk_structure(
      grid, [&](const std::string& t) { out += t; },
      [&](std::size_t i) {
        if (i < content.size()) out += cell_markup(content[i]);
      });
  return out;
}

std::vector<std::string> structure_tokens(const TableGrid& grid) {
  std::vector<std::string> out;
  walk_structure(grid, [&](const std::string& t) { out.push_back(t); }, [](std::size_t) {});
  return out;
}

std::string tokens_to_markup(const std::vector<std::string>& tokens, const std::vector<std::string>* cell_text) {
  std::string out;
  std::size_t cell = 0;
  for (const auto& t : tokens) {
    if (t == "</td>" || t == "</th>") {
      if (cell_text && cell < cell_text->size()) out += markup::escape_text((*cell_text)[cell]);
      ++cell;
    }
    out += t;
  }
  return out;
}

namespace {

constexpr double kNestTol = 1e-6;

IntBox round_box(const Rect& r, double m) {
  const long x0 = round_half_up(r.x + m), y0 = round_half_up(r.y + m);
  return {x0, y0, round_half_up(r.right() + m) - x0, round_half_up(r.bottom() + m) - y0};
}

/// Rounds `child` and clamps it into the already rounded `outer`. The real
/// boxes must nest; rounding can only disagree at exact half-pixel ties.
IntBox nest(const Rect& child, const Rect& parent, const IntBox& outer, double m, const char* what) {
  if (!parent.contains(child, kNestTol)) {
    throw Error(Errc::BoxOutOfBounds, std::string(what) + " escapes its container");
  }
  IntBox b = round_box(child, m);
  long x0 = std::max(b[0], outer[0]), y0 = std::max(b[1], outer[1]);
  long x1 = std::min(b[0] + b[2], outer[0] + outer[2]), y1 = std::min(b[1] + b[3], outer[1] + outer[3]);
  x1 = std::max(x1, x0);
  y1 = std::max(y1, y0);
  return {x0, y0, x1 - x0, y1 - y0};
}

json box_json(const IntBox& b) { return json::array({b[0], b[1], b[2], b[3]}); }

IntBox box_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) throw Error(Errc::ParseFailure, "box must be [x,y,w,h]");
  return {j[0].get<long>(), j[1].get<long>(), j[2].get<long>(), j[3].get<long>()};
}

}  // namespace

AnnotationRecord emit_annotation(const LayoutResult& layout, const TableGrid& grid, const CellContent& content,
                                 AnnotationMeta meta, std::string image_file, int margin) {
  if (layout.cells.size() != grid.size() || content.size() != grid.size()) {
    throw Error(Errc::InconsistentSpans, "layout, grid and content disagree");
  }
  const double m = margin;
  const IntBox image{0, 0, meta.width, meta.height};
  const Rect image_rect{-m, -m, double(meta.width), double(meta.height)};
  const IntBox table = nest(layout.table_box, image_rect, image, m, "table box");

  AnnotationRecord rec;
  rec.image_file = std::move(image_file);
  rec.structure_tokens = structure_tokens(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const CellLayout& cl = layout.cells[i];
    CellAnnotation ca;
    ca.tokens = text::content_tokens(content[i]);
    ca.bbox = nest(cl.cell_box, layout.table_box, table, m, "cell box");
    const IntBox aligned = nest(cl.aligned_box, cl.cell_box, ca.bbox, m, "aligned box");
    if (!cl.line_boxes.empty()) {
      const IntBox block = nest(cl.block_box, cl.aligned_box, aligned, m, "text block");
      for (const Rect& lb : cl.line_boxes) ca.lines.push_back(nest(lb, cl.block_box, block, m, "text line"));
    }
    rec.cells.push_back(std::move(ca));
  }
  meta.spanning_cell_count = spanning_cell_count(grid);
  rec.meta = std::move(meta);
  return rec;
}

json annotation_to_json(const AnnotationRecord& r) {
  json cells = json::array();
  for (const auto& c : r.cells) {
    json lines = json::array();
    for (const auto& l : c.lines) lines.push_back(box_json(l));
    cells.push_back(json{{"tokens", c.tokens}, {"bbox", box_json(c.bbox)}, {"lines", std::move(lines)}});
  }
  const auto& m = r.meta;
  json meta{{"spanningCellCount", m.spanning_cell_count},
            {"bordered", m.bordered},
            {"categoryId", m.category_id},
            {"seed", m.seed},
            {"index", m.index},
            {"profileId", m.profile_id},
            {"retained", m.retained},
            {"width", m.width},
            {"height", m.height}};
  return json{{"file", r.image_file}, {"structure", r.structure_tokens}, {"cells", std::move(cells)},
              {"meta", std::move(meta)}};
}

AnnotationRecord annotation_from_json(const json& j) {
  try {
    AnnotationRecord r;
    r.image_file = j.value("file", std::string());
    r.structure_tokens = j.at("structure").get<std::vector<std::string>>();
    for (const auto& c : j.value("cells", json::array())) {
      CellAnnotation ca;
      ca.tokens = c.value("tokens", std::vector<std::string>());
      if (c.contains("bbox")) ca.bbox = box_from_json(c.at("bbox"));
      for (const auto& l : c.value("lines", json::array())) ca.lines.push_back(box_from_json(l));
      r.cells.push_back(std::move(ca));
    }
    if (j.contains("meta")) {
      const json& m = j.at("meta");
      r.meta.spanning_cell_count = m.value("spanningCellCount", 0);
      r.meta.bordered = m.value("bordered", false);
      r.meta.category_id = m.value("categoryId", std::string());
      r.meta.seed = m.value("seed", std::uint64_t{0});
      r.meta.index = m.value("index", std::uint64_t{0});
      r.meta.profile_id = m.value("profileId", std::string());
      r.meta.retained = m.value("retained", false);
      r.meta.width = m.value("width", 0);
      r.meta.height = m.value("height", 0);
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseFailure, std::string("annotation record: ") + e.what());
  }
}

std::string record_markup(const AnnotationRecord& record, bool with_content) {
  if (!with_content) return tokens_to_markup(record.structure_tokens);
  std::vector<std::string> texts;
  texts.reserve(record.cells.size());
  for (const auto& c : record.cells) texts.push_back(text::join_tokens(c.tokens));
  return tokens_to_markup(record.structure_tokens, &texts);
}

}  // namespace tabsynth
