#include "tabsynth/serialization.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tabsynth/error.hpp"

namespace tabsynth {
namespace {

template <class E, std::size_t N>
using NameTable = std::array<std::pair<E, const char*>, N>;

constexpr NameTable<BlockAlign, 4> kBlockAlignNames{{{BlockAlign::Left, "left"},
                                                     {BlockAlign::Center, "center"},
                                                     {BlockAlign::Right, "right"},
                                                     {BlockAlign::Indent, "indent"}}};
constexpr NameTable<HAlign, 5> kHAlignNames{{{HAlign::Left, "left"},
                                             {HAlign::Right, "right"},
                                             {HAlign::Center, "center"},
                                             {HAlign::IndentLeft, "indent-left"},
                                             {HAlign::IndentRight, "indent-right"}}};
constexpr NameTable<VAlign, 5> kVAlignNames{{{VAlign::Top, "top"},
                                             {VAlign::Bottom, "bottom"},
                                             {VAlign::Center, "center"},
                                             {VAlign::IndentTop, "indent-top"},
                                             {VAlign::IndentBottom, "indent-bottom"}}};
constexpr NameTable<OuterMode, 4> kOuterModeNames{{{OuterMode::Full, "full"},
                                                   {OuterMode::NoSides, "no-sides"},
                                                   {OuterMode::NoTopBottom, "no-top-bottom"},
                                                   {OuterMode::None, "none"}}};
constexpr NameTable<OuterLineType, 2> kOuterLineNames{{{OuterLineType::SingleSolid, "single-solid"},
                                                       {OuterLineType::DoubleSolid, "double-solid"}}};
constexpr NameTable<InnerMode, 6> kInnerModeNames{{{InnerMode::Full, "full"},
                                                   {InnerMode::NoHorizontal, "no-horizontal"},
                                                   {InnerMode::NoVertical, "no-vertical"},
                                                   {InnerMode::None, "none"},
                                                   {InnerMode::PartialHorizontal, "partial-horizontal"},
                                                   {InnerMode::PartialVertical, "partial-vertical"}}};
constexpr NameTable<InnerLineType, 2> kInnerLineNames{{{InnerLineType::Solid, "solid"},
                                                       {InnerLineType::Dashed, "dashed"}}};
constexpr NameTable<EdgeSide, 4> kSideNames{{{EdgeSide::Top, "top"},
                                             {EdgeSide::Bottom, "bottom"},
                                             {EdgeSide::Left, "left"},
                                             {EdgeSide::Right, "right"}}};

template <class E, std::size_t N>
const char* name_of(const NameTable<E, N>& table, E v) {
  for (const auto& [e, n] : table) {
    if (e == v) return n;
  }
  return "?";
}

template <class E, std::size_t N>
E parse_name(const NameTable<E, N>& table, const std::string& s, const char* what) {
  for (const auto& [e, n] : table) {
    if (s == n) return e;
  }
  throw Error(Errc::ParseFailure, std::string("unknown ") + what + " '" + s + "'");
}

[[noreturn]] void parse_fail(const std::string& why) { throw Error(Errc::ParseFailure, why); }

template <class T>
T get(const json& j, const char* key) {
  if (!j.contains(key)) parse_fail(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    parse_fail(std::string("field '") + key + "': " + e.what());
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    parse_fail(std::string("field '") + key + "': " + e.what());
  }
}

json cell_style_to_json(const CellStyle& s) {
  json j = json::object();
  if (s.font_family) j["fontFamily"] = *s.font_family;
  if (s.font_size) j["fontSize"] = *s.font_size;
  if (s.color) j["color"] = color_to_hex(*s.color);
  if (s.line_spacing) j["lineSpacing"] = *s.line_spacing;
  if (s.block_align) {
    j["blockAlign"] = name_of(kBlockAlignNames, s.block_align->kind);
    if (s.block_align->kind == BlockAlign::Indent) j["blockIndent"] = s.block_align->indent;
  }
  if (s.h_align) {
    j["hAlign"] = name_of(kHAlignNames, s.h_align->kind);
    if (s.h_align->kind == HAlign::IndentLeft || s.h_align->kind == HAlign::IndentRight) {
      j["hIndent"] = s.h_align->indent;
    }
  }
  if (s.v_align) {
    j["vAlign"] = name_of(kVAlignNames, s.v_align->kind);
    if (s.v_align->kind == VAlign::IndentTop || s.v_align->kind == VAlign::IndentBottom) {
      j["vIndent"] = s.v_align->indent;
    }
  }
  if (s.padding_top) j["paddingTop"] = *s.padding_top;
  if (s.padding_bottom) j["paddingBottom"] = *s.padding_bottom;
  if (s.padding_left) j["paddingLeft"] = *s.padding_left;
  if (s.padding_right) j["paddingRight"] = *s.padding_right;
  if (s.background) j["background"] = color_to_hex(*s.background);
  return j;
}

CellStyle cell_style_from_json(const json& j) {
  if (!j.is_object()) parse_fail("style must be an object");
  CellStyle s;
  if (j.contains("fontFamily")) s.font_family = get<std::string>(j, "fontFamily");
  if (j.contains("fontSize")) s.font_size = get<double>(j, "fontSize");
  if (j.contains("color")) s.color = color_from_hex(get<std::string>(j, "color"));
  if (j.contains("lineSpacing")) s.line_spacing = get<double>(j, "lineSpacing");
  if (j.contains("blockAlign")) {
    s.block_align = BlockAlignment{parse_name(kBlockAlignNames, get<std::string>(j, "blockAlign"), "blockAlign"),
                                   get_or<double>(j, "blockIndent", 0.0)};
  }
  if (j.contains("hAlign")) {
    s.h_align = HorizontalAlignment{parse_name(kHAlignNames, get<std::string>(j, "hAlign"), "hAlign"),
                                    get_or<double>(j, "hIndent", 0.0)};
  }
  if (j.contains("vAlign")) {
    s.v_align = VerticalAlignment{parse_name(kVAlignNames, get<std::string>(j, "vAlign"), "vAlign"),
                                  get_or<double>(j, "vIndent", 0.0)};
  }
  if (j.contains("paddingTop")) s.padding_top = get<double>(j, "paddingTop");
  if (j.contains("paddingBottom")) s.padding_bottom = get<double>(j, "paddingBottom");
  if (j.contains("paddingLeft")) s.padding_left = get<double>(j, "paddingLeft");
  if (j.contains("paddingRight")) s.padding_right = get<double>(j, "paddingRight");
  if (j.contains("background")) s.background = color_from_hex(get<std::string>(j, "background"));
  return s;
}

int parse_key(const std::string& k) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(k, &used);
    if (used != k.size()) parse_fail("bad index key '" + k + "'");
    return v;
  } catch (const std::logic_error&) {
    parse_fail("bad index key '" + k + "'");
  }
}

}  // namespace

std::string color_to_hex(const Rgb& c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c.r, c.g, c.b);
  return buf;
}

Rgb color_from_hex(const std::string& s) {
  if (s.size() != 7 || s[0] != '#') parse_fail("bad colour '" + s + "'");
  unsigned v = 0;
  for (std::size_t i = 1; i < 7; ++i) {
    const char ch = s[i];
    unsigned d = 0;
    if (ch >= '0' && ch <= '9') d = ch - '0';
    else if (ch >= 'a' && ch <= 'f') d = ch - 'a' + 10;
    else if (ch >= 'A' && ch <= 'F') d = ch - 'A' + 10;
    else parse_fail("bad colour '" + s + "'");
    v = v * 16 + d;
  }
  return Rgb{static_cast<std::uint8_t>(v >> 16), static_cast<std::uint8_t>((v >> 8) & 0xFF),
             static_cast<std::uint8_t>(v & 0xFF)};
}

json table_to_json(const TableGrid& grid, const CellContent& content) {
  json j;
  j["nRows"] = grid.rows();
  j["nCols"] = grid.cols();
  json cells = json::array();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& c = grid[i];
    json cj;
    cj["row"] = c.row;
    cj["col"] = c.col;
    cj["rowSpan"] = c.row_span;
    cj["colSpan"] = c.col_span;
    cj["isHeader"] = c.is_header;
    cj["lines"] = i < content.size() ? json(content[i]) : json::array();
    cells.push_back(std::move(cj));
  }
  j["cells"] = std::move(cells);
  return j;
}

SourceTable table_from_json(const json& j) {
  if (!j.is_object()) parse_fail("table must be an object");
  const int n_rows = get<int>(j, "nRows");
  const int n_cols = get<int>(j, "nCols");
  if (!j.contains("cells") || !j.at("cells").is_array()) parse_fail("'cells' must be an array");
  const json& cells_j = j.at("cells");
  std::vector<std::pair<GridCell, CellLines>> cells;
  for (const auto& cj : cells_j) {
    GridCell c{get<int>(cj, "row"), get<int>(cj, "col"), get_or<int>(cj, "rowSpan", 1),
               get_or<int>(cj, "colSpan", 1), get_or<bool>(cj, "isHeader", false)};
    cells.emplace_back(c, get_or<CellLines>(cj, "lines", {}));
  }
  std::stable_sort(cells.begin(), cells.end(), [](const auto& a, const auto& b) {
    return a.first.row != b.first.row ? a.first.row < b.first.row : a.first.col < b.first.col;
  });
  std::vector<GridCell> grid_cells;
  CellContent content;
  for (auto& [c, lines] : cells) {
    grid_cells.push_back(c);
    content.push_back(std::move(lines));
  }
  SourceTable t = make_source_table(TableGrid(n_rows, n_cols, std::move(grid_cells)), std::move(content),
                                    get_or<std::string>(j, "provenance", ""));
  if (j.contains("style")) t.extracted_style = profile_from_json(j.at("style"));
  return t;
}

json profile_to_json(const StyleProfile& p) {
  json j;
  j["id"] = p.id;
  j["table"] = cell_style_to_json(p.table);
  if (!p.rows.empty()) {
    json rows = json::object();
    for (const auto& [k, s] : p.rows) rows[std::to_string(k)] = cell_style_to_json(s);
    j["rows"] = std::move(rows);
  }
  if (!p.cols.empty()) {
    json cols = json::object();
    for (const auto& [k, s] : p.cols) cols[std::to_string(k)] = cell_style_to_json(s);
    j["columns"] = std::move(cols);
  }
  if (!p.cells.empty()) {
    json cells = json::array();
    for (const auto& c : p.cells) cells.push_back({{"row", c.row}, {"col", c.col}, {"style", cell_style_to_json(c.style)}});
    j["cells"] = std::move(cells);
  }
  j["outerBorder"] = {{"mode", name_of(kOuterModeNames, p.outer.mode)},
                      {"lineType", name_of(kOuterLineNames, p.outer.line_type)},
                      {"thickness", p.outer.thickness},
                      {"color", color_to_hex(p.outer.color)}};
  json inner;
  inner["mode"] = name_of(kInnerModeNames, p.inner.mode);
  if (!p.inner.mask.empty()) inner["mask"] = p.inner.mask;
  inner["lineType"] = name_of(kInnerLineNames, p.inner.line_type);
  inner["dash"] = p.inner.dash;
  inner["gap"] = p.inner.gap;
  inner["thickness"] = p.inner.thickness;
  inner["color"] = color_to_hex(p.inner.color);
  auto dividers = [](const std::map<int, bool>& m) {
    json d = json::object();
    for (const auto& [k, v] : m) d[std::to_string(k)] = v;
    return d;
  };
  if (!p.inner.row_dividers.empty()) inner["rowDividers"] = dividers(p.inner.row_dividers);
  if (!p.inner.col_dividers.empty()) inner["colDividers"] = dividers(p.inner.col_dividers);
  if (!p.inner.edges.empty()) {
    json edges = json::array();
    for (const auto& e : p.inner.edges) {
      edges.push_back({{"row", e.row}, {"col", e.col}, {"side", name_of(kSideNames, e.side)}, {"visible", e.visible}});
    }
    inner["edges"] = std::move(edges);
  }
  j["innerBorder"] = std::move(inner);
  return j;
}

StyleProfile profile_from_json(const json& j) {
  if (!j.is_object()) parse_fail("profile must be an object");
  StyleProfile p;
  p.id = get_or<std::string>(j, "id", "");
  if (j.contains("table")) p.table = cell_style_from_json(j.at("table"));
  if (j.contains("rows")) {
    for (const auto& [k, v] : j.at("rows").items()) p.rows[parse_key(k)] = cell_style_from_json(v);
  }
  if (j.contains("columns")) {
    for (const auto& [k, v] : j.at("columns").items()) p.cols[parse_key(k)] = cell_style_from_json(v);
  }
  if (j.contains("cells")) {
    for (const auto& c : j.at("cells")) {
      p.cells.push_back({get<int>(c, "row"), get<int>(c, "col"), cell_style_from_json(c.at("style"))});
    }
  }
  if (j.contains("outerBorder")) {
    const json& o = j.at("outerBorder");
    p.outer.mode = parse_name(kOuterModeNames, get_or<std::string>(o, "mode", "full"), "outer mode");
    p.outer.line_type = parse_name(kOuterLineNames, get_or<std::string>(o, "lineType", "single-solid"), "outer line type");
    p.outer.thickness = get_or<double>(o, "thickness", 1.0);
    p.outer.color = color_from_hex(get_or<std::string>(o, "color", "#000000"));
  }
  if (j.contains("innerBorder")) {
    const json& i = j.at("innerBorder");
    p.inner.mode = parse_name(kInnerModeNames, get_or<std::string>(i, "mode", "full"), "inner mode");
    p.inner.mask = get_or<std::vector<int>>(i, "mask", {});
    p.inner.line_type = parse_name(kInnerLineNames, get_or<std::string>(i, "lineType", "solid"), "inner line type");
    p.inner.dash = get_or<double>(i, "dash", 4.0);
    p.inner.gap = get_or<double>(i, "gap", 2.0);
    p.inner.thickness = get_or<double>(i, "thickness", 1.0);
    p.inner.color = color_from_hex(get_or<std::string>(i, "color", "#000000"));
    auto dividers = [](const json& d, std::map<int, bool>& out) {
      for (const auto& [k, v] : d.items()) out[parse_key(k)] = v.get<bool>();
    };
    if (i.contains("rowDividers")) dividers(i.at("rowDividers"), p.inner.row_dividers);
    if (i.contains("colDividers")) dividers(i.at("colDividers"), p.inner.col_dividers);
    if (i.contains("edges")) {
      for (const auto& e : i.at("edges")) {
        p.inner.edges.push_back({get<int>(e, "row"), get<int>(e, "col"),
                                 parse_name(kSideNames, get<std::string>(e, "side"), "edge side"),
                                 get_or<bool>(e, "visible", true)});
      }
    }
  }
  const auto problems = profile_violations(p);
  if (!problems.empty()) parse_fail("profile '" + p.id + "': " + problems.front());
  return p;
}

json line_input_to_json(const LineInput& in) {
  json j;
  json lines = json::array();
  for (const auto& s : in.lines) {
    lines.push_back({{"orient", s.orientation == Orientation::Horizontal ? "h" : "v"},
                     {"pos", s.position},
                     {"start", s.start},
                     {"end", s.end},
                     {"thickness", s.thickness}});
  }
  json texts = json::array();
  for (const auto& t : in.texts) {
    json tj = {{"x", t.box.x}, {"y", t.box.y}, {"w", t.box.w}, {"h", t.box.h}, {"text", t.text}};
    if (t.font_size) tj["fontSize"] = *t.font_size;
    if (t.font_family) tj["fontFamily"] = *t.font_family;
    if (t.color) tj["color"] = color_to_hex(*t.color);
    texts.push_back(std::move(tj));
  }
  j["lines"] = std::move(lines);
  j["texts"] = std::move(texts);
  return j;
}

LineInput line_input_from_json(const json& j) {
  if (!j.is_object()) parse_fail("line input must be an object");
  LineInput in;
  for (const auto& l : get_or<json>(j, "lines", json::array())) {
    const auto orient = get<std::string>(l, "orient");
    if (orient != "h" && orient != "v") parse_fail("orient must be 'h' or 'v'");
    LineSegment s{orient == "h" ? Orientation::Horizontal : Orientation::Vertical, get<double>(l, "pos"),
                  get<double>(l, "start"), get<double>(l, "end"), get_or<double>(l, "thickness", 1.0)};
    if (!(s.start < s.end)) parse_fail("line segment needs start < end");
    if (!(s.thickness > 0.0)) parse_fail("line segment needs thickness > 0");
    in.lines.push_back(s);
  }
  for (const auto& t : get_or<json>(j, "texts", json::array())) {
    TextSpan span;
    span.box = Rect{get<double>(t, "x"), get<double>(t, "y"), get<double>(t, "w"), get<double>(t, "h")};
    span.text = get_or<std::string>(t, "text", "");
    if (t.contains("fontSize")) span.font_size = get<double>(t, "fontSize");
    if (t.contains("fontFamily")) span.font_family = get<std::string>(t, "fontFamily");
    if (t.contains("color")) span.color = color_from_hex(get<std::string>(t, "color"));
    if (!span.text.empty() && !(span.box.w > 0.0 && span.box.h > 0.0)) {
      parse_fail("text span '" + span.text + "' needs a positive box");
    }
    in.texts.push_back(std::move(span));
  }
  return in;
}

std::vector<CategoryDescriptor> categories_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_array()) parse_fail("category file must hold an array");
  std::vector<CategoryDescriptor> out;
  for (const auto& cj : j) {
    CategoryDescriptor d;
    d.id = get<std::string>(cj, "id");
    d.fallback = get_or<bool>(cj, "fallback", false);
    for (const auto& kw : get_or<json>(cj, "keywords", json::array())) {
      WeightedKeyword w{get<std::string>(kw, "k"), get_or<double>(kw, "w", 1.0)};
      if (!(w.weight > 0.0)) parse_fail("keyword weights must be > 0 in category '" + d.id + "'");
      d.keywords.push_back(std::move(w));
    }
    for (const auto& pj : get_or<json>(cj, "profiles", json::array())) {
      if (pj.is_string()) {
        d.profiles.push_back(profile_from_json(read_json_file(base_dir / pj.get<std::string>())));
      } else {
        d.profiles.push_back(profile_from_json(pj));
      }
    }
    if (d.profiles.empty()) parse_fail("category '" + d.id + "' has no profiles");
    out.push_back(std::move(d));
  }
  if (out.empty()) parse_fail("category file is empty");
  return out;
}

std::vector<CategoryDescriptor> load_categories(const std::filesystem::path& path) {
  return categories_from_json(read_json_file(path), path.parent_path());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::ParseFailure, path.string() + ": " + e.what());
  }
}

}  // namespace tabsynth
