#include "tabsynth/font_metrics.hpp"

#include "tabsynth/text.hpp"

namespace tabsynth {

double FontMetrics::line_width(std::string_view family, double size, std::string_view utf8) const {
  double w = 0.0;
  for (char32_t cp : text::decode_utf8(utf8)) w += advance(family, size, cp);
  return w;
}

double FixedFontMetrics::advance(std::string_view, double size, char32_t cp) const {
  return (text::is_wide(cp) ? kWideAdvance : kNarrowAdvance) * size;
}

double FixedFontMetrics::line_height(std::string_view, double size) const { return kLineHeight * size; }

}  // namespace tabsynth
