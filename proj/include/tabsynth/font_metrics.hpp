#pragma once

#include <string_view>

namespace tabsynth {

/// Advance widths and line heights, in pixels.
class FontMetrics {
 public:
  virtual ~FontMetrics() = default;

  virtual double advance(std::string_view family, double size, char32_t cp) const = 0;
  /// Ascent + descent; at least `size`.
  virtual double line_height(std::string_view family, double size) const = 0;

  /// Sum of advances of a UTF-8 line.
  double line_width(std::string_view family, double size, std::string_view utf8) const;
};

/// Fixed advances: 1.0 x size for wide (CJK) characters, 0.6 x size for
/// everything else; line height 1.2 x size.
class FixedFontMetrics final : public FontMetrics {
 public:
  static constexpr double kNarrowAdvance = 0.6;
  static constexpr double kWideAdvance = 1.0;
  static constexpr double kLineHeight = 1.2;

  double advance(std::string_view family, double size, char32_t cp) const override;
  double line_height(std::string_view family, double size) const override;
};

}  // namespace tabsynth
