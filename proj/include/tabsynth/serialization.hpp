#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tabsynth/ingest.hpp"
#include "tabsynth/style_profile.hpp"
#include "tabsynth/styling.hpp"
#include "tabsynth/table_model.hpp"

namespace tabsynth {

using json = nlohmann::ordered_json;

/// Canonical table JSON:
/// {"nRows","nCols","cells":[{"row","col","rowSpan","colSpan","isHeader","lines"}]}.
json table_to_json(const TableGrid& grid, const CellContent& content);
/// Reads canonical table JSON; optional "provenance" and "style" members are
/// picked up when present. Throws Errc::ParseFailure.
SourceTable table_from_json(const json& j);

json profile_to_json(const StyleProfile& profile);
StyleProfile profile_from_json(const json& j);

std::string color_to_hex(const Rgb& c);
Rgb color_from_hex(const std::string& s);

/// Line/text input: {"lines":[{"orient","pos","start","end","thickness"}],
/// "texts":[{"x","y","w","h","text","fontSize"?,"fontFamily"?,"color"?}]}.
struct LineInput {
  std::vector<LineSegment> lines;
  std::vector<TextSpan> texts;
};
json line_input_to_json(const LineInput& in);
LineInput line_input_from_json(const json& j);

/// Category file: a JSON array of {"id","keywords":[{"k","w"}],"profiles":[...],"fallback"}.
/// A profile entry is either an inline profile object or a path relative to
/// the category file.
std::vector<CategoryDescriptor> categories_from_json(const json& j, const std::filesystem::path& base_dir);
std::vector<CategoryDescriptor> load_categories(const std::filesystem::path& path);

json read_json_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace tabsynth
