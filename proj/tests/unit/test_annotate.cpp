#include <doctest.h>

#include "../support/generators.hpp"
#include "tabsynth/annotate.hpp"
#include "tabsynth/ingest.hpp"
#include "tabsynth/layout.hpp"
#include "tabsynth/metrics.hpp"

using namespace tabsynth;

namespace {

StyleProfile padded(double pad) {
  StyleProfile p = default_profile();
  p.table.padding_top = p.table.padding_bottom = p.table.padding_left = p.table.padding_right = pad;
  p.table.font_size = 10.0;
  p.table.line_spacing = 0.0;
  return p;
}

AnnotationMeta meta_for(const TableGrid& g, const LayoutResult& lay, int margin) {
  AnnotationMeta m;
  m.spanning_cell_count = spanning_cell_count(g);
  m.width = static_cast<int>(round_half_up(lay.table_box.w)) + 2 * margin;
  m.height = static_cast<int>(round_half_up(lay.table_box.h)) + 2 * margin;
  return m;
}

bool inside(const IntBox& inner, const IntBox& outer) {
  return inner[0] >= outer[0] && inner[1] >= outer[1] && inner[0] + inner[2] <= outer[0] + outer[2] &&
         inner[1] + inner[3] <= outer[1] + outer[3];
}

}  // namespace

TEST_CASE("emit_structure_markup") {
  CHECK(emit_structure_markup(TableGrid(1, 2, {{0, 0, 1, 1}, {0, 1, 1, 1}}), {{"a"}, {"b"}}) ==
        "<table><tr><td>a</td><td>b</td></tr></table>");
  const std::string span =
      emit_structure_markup(TableGrid(2, 2, {{0, 0, 1, 2}, {1, 0, 1, 1}, {1, 1, 1, 1}}), {{"h"}, {"a"}, {"b"}});
  CHECK(span.find("<td colspan=\"2\">h</td>") != std::string::npos);
  CHECK(emit_structure_markup(TableGrid(1, 1, {{0, 0, 1, 1}}), {{"x", "a<b"}}) ==
        "<table><tr><td>x<br>a&lt;b</td></tr></table>");
}

TEST_CASE("leading header rows go to thead") {
  const TableGrid g(2, 1, {{0, 0, 1, 1, true}, {1, 0, 1, 1}});
  CHECK(header_row_count(g) == 1);
  CHECK(emit_structure_markup(g, {{"H"}, {"v"}}) ==
        "<table><thead><tr><td>H</td></tr></thead><tbody><tr><td>v</td></tr></tbody></table>");
}

TEST_CASE("structure tokens rebuild the markup") {
  const TableGrid g(2, 2, {{0, 0, 2, 1}, {0, 1, 1, 1}, {1, 1, 1, 1}});
  const auto tokens = structure_tokens(g);
  CHECK(tokens.front() == "<table>");
  CHECK(tokens.back() == "</table>");
  const std::vector<std::string> text{"x", "y", "z"};
  CHECK(tokens_to_markup(tokens, &text) == emit_structure_markup(g, {{"x"}, {"y"}, {"z"}}));
}

TEST_CASE("parse(emit(g)) == g for 1000 random grids up to 8x8") {
  Rng rng(51);
  for (int k = 0; k < 1000; ++k) {
    const TableGrid g = testing::random_grid(rng);
    const CellContent content = testing::random_content(rng, g);
    const std::string markup = emit_structure_markup(g, content);
    CHECK(parse_markup_table(markup).grid == g);
    CHECK(teds(markup, markup, true) == 1.0);
    CHECK(parse_markup_table(tokens_to_markup(structure_tokens(g))).grid == g);
  }
}

TEST_CASE("emit_annotation: margin offset and empty cells") {
  FixedFontMetrics fm;
  const TableGrid g(1, 1, {{0, 0, 1, 1}});
  const LayoutResult lay = solve_layout(g, {{"资产负债"}}, padded(2), fm);
  const AnnotationRecord rec = emit_annotation(lay, g, {{"资产负债"}}, meta_for(g, lay, 8), "t.png", 8);
  CHECK(rec.cells[0].bbox == IntBox{8, 8, 44, 16});
  CHECK(rec.cells[0].lines == std::vector<IntBox>{{10, 10, 40, 12}});
  CHECK(rec.cells[0].tokens == std::vector<std::string>{"资", "产", "负", "债"});

  const LayoutResult empty_lay = solve_layout(g, {{}}, padded(2), fm);
  const AnnotationRecord e = emit_annotation(empty_lay, g, {{}}, meta_for(g, empty_lay, 8), "e.png", 8);
  CHECK(e.cells[0].tokens.empty());
  CHECK(e.cells[0].lines.empty());
  CHECK(e.cells[0].bbox[2] > 0);
}

TEST_CASE("annotation JSON round trip and record invariants") {
  FixedFontMetrics fm;
  Rng rng(52);
  for (int k = 0; k < 200; ++k) {
    const TableGrid g = testing::random_grid(rng);
    const CellContent content = testing::random_content(rng, g);
    const StyleProfile p = testing::random_profile(rng);
    const LayoutResult lay = solve_layout(g, content, p, fm);
    AnnotationMeta meta = meta_for(g, lay, 8);
    meta.seed = rng.next();
    meta.category_id = "general";
    const AnnotationRecord rec = emit_annotation(lay, g, content, meta, "r.png", 8);
    CHECK(rec.meta.spanning_cell_count == spanning_cell_count(g));

    const IntBox image{0, 0, meta.width, meta.height};
    for (std::size_t i = 0; i < rec.cells.size(); ++i) {
      const auto& c = rec.cells[i];
      CHECK(inside(c.bbox, image));
      for (const auto& l : c.lines) CHECK(inside(l, c.bbox));
      CHECK(c.lines.size() == content[i].size());
    }
    CHECK(parse_markup_table(record_markup(rec, false)).grid == g);

    const json j = annotation_to_json(rec);
    const AnnotationRecord back = annotation_from_json(j);
    CHECK(annotation_to_json(back).dump() == j.dump());
    CHECK(j.begin().key() == "file");
  }
}
