#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tabsynth::markup {

/// Element or text node of a parsed HTML fragment.
struct Node {
  std::string tag;  // lower-case element name; empty for text nodes
  std::vector<std::pair<std::string, std::string>> attrs;
  std::vector<Node> children;
  std::string text;

  bool is_text() const { return tag.empty(); }
  const std::string* attr(std::string_view name) const;
};

/// Parses an HTML fragment into a synthetic root node (tag "#root").
/// Void elements (br, img, hr, ...) need no close tag; any other unbalanced
/// tag throws Errc::MalformedMarkup. Comments and doctypes are skipped,
/// character references decoded.
Node parse(std::string_view source);

std::string decode_entities(std::string_view s);
std::string escape_text(std::string_view s);

/// Text lines of a cell element: descendants flattened, <br> splits lines,
/// whitespace collapsed per line. A cell with no visible text has no lines.
std::vector<std::string> cell_lines(const Node& cell);

/// Integer attribute with HTML defaults: missing or < 1 yields 1.
int span_attr(const Node& cell, std::string_view name);

}  // namespace tabsynth::markup
