#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "tabsynth/font_metrics.hpp"

namespace tabsynth {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Minimal TrueType (glyf outline) reader: cmap formats 4 and 12, simple
/// and composite glyphs, horizontal metrics.
class TrueTypeFont {
 public:
  static TrueTypeFont load(const std::filesystem::path& path);
  explicit TrueTypeFont(std::vector<std::uint8_t> data);

  std::uint16_t glyph_index(char32_t cp) const;
  bool has_glyph(char32_t cp) const { return glyph_index(cp) != 0; }

  double units_per_em() const { return units_per_em_; }
  double ascent() const { return ascent_; }    // font units, positive up
  double descent() const { return descent_; }  // font units, negative
  double line_gap() const { return line_gap_; }
  double advance_units(std::uint16_t glyph) const;

  /// Closed polylines in font units (y up), quadratic curves flattened.
  std::vector<std::vector<Point2>> outline(std::uint16_t glyph) const;

 private:
  std::uint16_t u16(std::size_t off) const;
  std::int16_t i16(std::size_t off) const { return static_cast<std::int16_t>(u16(off)); }
  std::uint32_t u32(std::size_t off) const;
  std::size_t glyph_offset(std::uint16_t glyph, std::size_t& length) const;
  void append_outline(std::uint16_t glyph, const double m[6], int depth,
                      std::vector<std::vector<Point2>>& out) const;

  std::vector<std::uint8_t> data_;
  std::size_t glyf_ = 0;
  std::size_t loca_ = 0;
  std::size_t hmtx_ = 0;
  std::size_t cmap_sub_ = 0;
  int cmap_format_ = 0;
  int loca_long_ = 0;
  int num_glyphs_ = 0;
  int num_hmetrics_ = 0;
  double units_per_em_ = 1000.0;
  double ascent_ = 0.0;
  double descent_ = 0.0;
  double line_gap_ = 0.0;
};

/// Metrics from TrueType fonts keyed by family id. Unknown families use the
/// default font; code points missing from a font fall back to fixed advances.
class TrueTypeMetrics final : public FontMetrics {
 public:
  TrueTypeMetrics(std::map<std::string, std::shared_ptr<const TrueTypeFont>> fonts,
                  std::shared_ptr<const TrueTypeFont> fallback);

  double advance(std::string_view family, double size, char32_t cp) const override;
  double line_height(std::string_view family, double size) const override;

  const TrueTypeFont& font(std::string_view family) const;
  /// Baseline offset from the top of a line box.
  double baseline(std::string_view family, double size) const;

 private:
  std::map<std::string, std::shared_ptr<const TrueTypeFont>, std::less<>> fonts_;
  std::shared_ptr<const TrueTypeFont> fallback_;
  FixedFontMetrics fixed_;
};

}  // namespace tabsynth
