#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tabsynth::text {

/// Decodes UTF-8; malformed sequences become U+FFFD.
std::u32string decode_utf8(std::string_view s);
void append_utf8(std::string& out, char32_t cp);
std::string encode_utf8(std::u32string_view s);

/// East Asian wide/fullwidth code points (CJK ideographs, kana, hangul, fullwidth forms).
bool is_wide(char32_t cp);
bool is_space(char32_t cp);

/// Collapses whitespace runs to one space and trims both ends.
std::string collapse_whitespace(std::string_view s);

/// Content tokens of a cell: one token per wide character, one per
/// whitespace-delimited run of other characters.
std::vector<std::string> content_tokens(const std::vector<std::string>& lines);

/// Joins tokens back to text, inserting a space only between two narrow tokens.
std::string join_tokens(const std::vector<std::string>& tokens);

/// Joins two fragments of one text line: a space unless either side of the
/// seam is a wide character.
std::string join_fragments(const std::string& left, const std::string& right);

}  // namespace tabsynth::text
