#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "tabsynth/font_metrics.hpp"
#include "tabsynth/layout.hpp"
#include "tabsynth/style_profile.hpp"
#include "tabsynth/truetype.hpp"

namespace tabsynth {

/// RGB raster stored as three row-major planes.
class Canvas {
 public:
  using Plane = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  Canvas(int width, int height, Rgb fill);

  int width() const { return static_cast<int>(r_.cols()); }
  int height() const { return static_cast<int>(r_.rows()); }

  Rgb at(int x, int y) const { return {r_(y, x), g_(y, x), b_(y, x)}; }
  void set(int x, int y, Rgb c);
  /// Alpha-blends `c` over the pixel; out-of-range coordinates are ignored.
  void blend(int x, int y, Rgb c, double alpha);
  /// Fills the half-open pixel range [x0,x1) x [y0,y1), clipped to the canvas.
  void fill_rect(long x0, long y0, long x1, long y1, Rgb c);

  /// Interleaved RGB bytes, row-major.
  std::vector<std::uint8_t> interleaved() const;

  friend bool operator==(const Canvas& a, const Canvas& b) {
    return a.r_ == b.r_ && a.g_ == b.g_ && a.b_ == b.b_;
  }

 private:
  Plane r_, g_, b_;
};

/// Maps a text line with its style to pixels. `line_box` is in canvas
/// coordinates and has not been rounded yet.
class GlyphRasterizer {
 public:
  virtual ~GlyphRasterizer() = default;
  virtual std::string_view backend() const = 0;
  /// The metrics layout must use for the output to match.
  virtual const FontMetrics& metrics() const = 0;
  virtual void draw_line(Canvas& canvas, std::string_view utf8, const ResolvedStyle& style,
                         const Rect& line_box) const = 0;
};

/// Paints each non-space glyph's advance box solid, no anti-aliasing.
class BoxGlyphRasterizer final : public GlyphRasterizer {
 public:
  std::string_view backend() const override { return "box-glyph"; }
  const FontMetrics& metrics() const override { return metrics_; }
  void draw_line(Canvas& canvas, std::string_view utf8, const ResolvedStyle& style,
                 const Rect& line_box) const override;

 private:
  FixedFontMetrics metrics_;
};

/// Anti-aliased TrueType outlines; code points missing from the font are
/// drawn as hollow boxes.
class RealFontRasterizer final : public GlyphRasterizer {
 public:
  explicit RealFontRasterizer(std::shared_ptr<const TrueTypeMetrics> metrics);

  std::string_view backend() const override { return "real-font"; }
  const FontMetrics& metrics() const override { return *metrics_; }
  void draw_line(Canvas& canvas, std::string_view utf8, const ResolvedStyle& style,
                 const Rect& line_box) const override;

 private:
  std::shared_ptr<const TrueTypeMetrics> metrics_;
};

struct RenderOptions {
  int margin = 8;
  Rgb page = kWhite;
  int max_dimension = 4096;
};

/// A ruling segment that is actually drawn, in table-local coordinates.
struct VisibleRuling {
  LineSegment segment;
  bool outer = false;
};

/// Layout rulings filtered by the profile's border modes, split into
/// maximal runs of visible lattice edges. Double outer borders are reported
/// once, at the primary stroke.
std::vector<VisibleRuling> visible_rulings(const LayoutResult& layout, const StyleProfile& profile);

/// True when every cell edge of the layout is drawn.
bool is_fully_bordered(const LayoutResult& layout, const StyleProfile& profile);

/// Canvas size for a layout: rounded table extent plus the margin on each side.
std::pair<int, int> canvas_size(const LayoutResult& layout, const RenderOptions& options);

/// Draws cell backgrounds, then text lines, then border lines. Throws
/// Errc::CanvasOverflow when either dimension exceeds options.max_dimension.
Canvas render_table(const LayoutResult& layout, const StyleProfile& profile, const GlyphRasterizer& rasterizer,
                    const RenderOptions& options = {});

std::vector<std::uint8_t> encode_png(const Canvas& canvas);
void write_png(const Canvas& canvas, const std::filesystem::path& path);

/// "{datasetId}_{index:06}.png"
std::string image_file_name(std::string_view dataset_id, std::uint64_t index);

}  // namespace tabsynth
