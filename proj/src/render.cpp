#include "tabsynth/render.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>

#include "tabsynth/error.hpp"
#include "tabsynth/text.hpp"

namespace tabsynth {

Canvas::Canvas(int width, int height, Rgb fill)
    : r_(Plane::Constant(height, width, fill.r)),
      g_(Plane::Constant(height, width, fill.g)),
      b_(Plane::Constant(height, width, fill.b)) {}

void Canvas::set(int x, int y, Rgb c) {
  if (x < 0 || y < 0 || x >= width() || y >= height()) return;
  r_(y, x) = c.r;
  g_(y, x) = c.g;
  b_(y, x) = c.b;
}

void Canvas::blend(int x, int y, Rgb c, double alpha) {
  if (x < 0 || y < 0 || x >= width() || y >= height() || alpha <= 0.0) return;
  alpha = std::min(alpha, 1.0);
  auto mix = [alpha](std::uint8_t dst, std::uint8_t src) {
    return static_cast<std::uint8_t>(std::lround(dst + (double(src) - dst) * alpha));
  };
  r_(y, x) = mix(r_(y, x), c.r);
  g_(y, x) = mix(g_(y, x), c.g);
  b_(y, x) = mix(b_(y, x), c.b);
}

void Canvas::fill_rect(long x0, long y0, long x1, long y1, Rgb c) {
  x0 = std::max(x0, 0L);
  y0 = std::max(y0, 0L);
  x1 = std::min<long>(x1, width());
  y1 = std::min<long>(y1, height());
  if (x0 >= x1 || y0 >= y1) return;
  r_.block(y0, x0, y1 - y0, x1 - x0).setConstant(c.r);
  g_.block(y0, x0, y1 - y0, x1 - x0).setConstant(c.g);
  b_.block(y0, x0, y1 - y0, x1 - x0).setConstant(c.b);
}

std::vector<std::uint8_t> Canvas::interleaved() const {
  std::vector<std::uint8_t> out(static_cast<std::size_t>(width()) * height() * 3);
  std::size_t i = 0;
  for (int y = 0; y < height(); ++y) {
    for (int x = 0; x < width(); ++x) {
      out[i++] = r_(y, x);
      out[i++] = g_(y, x);
      out[i++] = b_(y, x);
    }
  }
  return out;
}

void BoxGlyphRasterizer::draw_line(Canvas& canvas, std::string_view utf8, const ResolvedStyle& style,
                                   const Rect& line_box) const {
  const long y0 = round_half_up(line_box.y);
  const long y1 = round_half_up(line_box.bottom());
  double pen = line_box.x;
  for (char32_t cp : text::decode_utf8(utf8)) {
    const double adv = metrics_.advance(style.font_family, style.font_size, cp);
    if (!text::is_space(cp)) canvas.fill_rect(round_half_up(pen), y0, round_half_up(pen + adv), y1, style.color);
    pen += adv;
  }
}

namespace {

constexpr int kSubRows = 4;

/// Nonzero-winding fill with exact horizontal coverage and vertical supersampling.
void fill_polygons(Canvas& canvas, const std::vector<std::vector<Point2>>& polys, Rgb color) {
  double minx = 1e300, miny = 1e300, maxx = -1e300, maxy = -1e300;
  for (const auto& poly : polys) {
    for (const auto& p : poly) {
      minx = std::min(minx, p.x), maxx = std::max(maxx, p.x);
      miny = std::min(miny, p.y), maxy = std::max(maxy, p.y);
    }
  }
  if (minx > maxx) return;
  const int x0 = std::max(0, static_cast<int>(std::floor(minx)));
  const int y0 = std::max(0, static_cast<int>(std::floor(miny)));
  const int x1 = std::min(canvas.width(), static_cast<int>(std::ceil(maxx)) + 1);
  const int y1 = std::min(canvas.height(), static_cast<int>(std::ceil(maxy)) + 1);
  if (x0 >= x1 || y0 >= y1) return;

  Eigen::ArrayXXd cover = Eigen::ArrayXXd::Zero(y1 - y0, x1 - x0);
  std::vector<std::pair<double, int>> xs;
  for (int py = y0; py < y1; ++py) {
    for (int s = 0; s < kSubRows; ++s) {
      const double sy = py + (s + 0.5) / kSubRows;
      xs.clear();
      for (const auto& poly : polys) {
        for (std::size_t i = 0; i < poly.size(); ++i) {
          const Point2& a = poly[i];
          const Point2& b = poly[(i + 1) % poly.size()];
          if (a.y == b.y) continue;
          if (sy < std::min(a.y, b.y) || sy >= std::max(a.y, b.y)) continue;
          xs.emplace_back(a.x + (sy - a.y) * (b.x - a.x) / (b.y - a.y), b.y > a.y ? 1 : -1);
        }
      }
      std::sort(xs.begin(), xs.end());
      int winding = 0;
      double start = 0.0;
      for (const auto& [x, dir] : xs) {
        const int before = winding;
        winding += dir;
        if (before == 0 && winding != 0) start = x;
        if (before != 0 && winding == 0) {
          const double xa = std::max(start, double(x0));
          const double xb = std::min(x, double(x1));
          for (int px = static_cast<int>(std::floor(xa)); px < xb && px < x1; ++px) {
            const double overlap = std::min(xb, px + 1.0) - std::max(xa, double(px));
            if (overlap > 0) cover(py - y0, px - x0) += overlap / kSubRows;
          }
        }
      }
    }
  }
  for (int py = y0; py < y1; ++py) {
    for (int px = x0; px < x1; ++px) canvas.blend(px, py, color, cover(py - y0, px - x0));
  }
}

}  // namespace

RealFontRasterizer::RealFontRasterizer(std::shared_ptr<const TrueTypeMetrics> metrics)
    : metrics_(std::move(metrics)) {
  if (!metrics_) throw Error(Errc::ConfigError, "real-font backend needs font metrics");
}

void RealFontRasterizer::draw_line(Canvas& canvas, std::string_view utf8, const ResolvedStyle& style,
                                   const Rect& line_box) const {
  const TrueTypeFont& font = metrics_->font(style.font_family);
  const double scale = style.font_size / font.units_per_em();
  const double baseline = line_box.y + metrics_->baseline(style.font_family, style.font_size);
  double pen = line_box.x;
  for (char32_t cp : text::decode_utf8(utf8)) {
    const double adv = metrics_->advance(style.font_family, style.font_size, cp);
    const std::uint16_t g = font.glyph_index(cp);
    if (g != 0) {
      auto polys = font.outline(g);
      for (auto& poly : polys) {
        for (auto& p : poly) p = {pen + p.x * scale, baseline - p.y * scale};
      }
      fill_polygons(canvas, polys, style.color);
    } else if (!text::is_space(cp)) {
      const long x0 = round_half_up(pen + 1), x1 = round_half_up(pen + adv - 1);
      const long y0 = round_half_up(line_box.y + 1), y1 = round_half_up(line_box.bottom() - 1);
      canvas.fill_rect(x0, y0, x1, y0 + 1, style.color);
      canvas.fill_rect(x0, y1 - 1, x1, y1, style.color);
      canvas.fill_rect(x0, y0, x0 + 1, y1, style.color);
      canvas.fill_rect(x1 - 1, y0, x1, y1, style.color);
    }
    pen += adv;
  }
}

namespace {

int boundary_index(const std::vector<double>& coords, double v) {
  auto it = std::lower_bound(coords.begin(), coords.end(), v);
  if (it == coords.end() || *it != v) throw Error(Errc::InconsistentSpans, "ruling is off the grid");
  return static_cast<int>(it - coords.begin());
}

}  // namespace

std::vector<VisibleRuling> visible_rulings(const LayoutResult& layout, const StyleProfile& profile) {
  const auto& b = layout.boundaries;
  const int R = b.rows();
  const int C = b.cols();
  const OuterSides sides = outer_sides(profile.outer.mode);
  std::vector<VisibleRuling> out;
  for (const LineSegment& seg : layout.rulings) {
    const bool horizontal = seg.orientation == Orientation::Horizontal;
    const auto& across = horizontal ? b.row_ys : b.col_xs;
    const auto& along = horizontal ? b.col_xs : b.row_ys;
    const int k = boundary_index(across, seg.position);
    const int last = horizontal ? R : C;
    if (k == 0 || k == last) {
      const bool shown = horizontal ? (k == 0 ? sides.top : sides.bottom) : (k == 0 ? sides.left : sides.right);
      if (shown) out.push_back({seg, true});
      continue;
    }
    const int a0 = boundary_index(along, seg.start);
    const int a1 = boundary_index(along, seg.end);
    int i = a0;
    while (i < a1) {
      if (!inner_edge_visible(profile, seg.orientation, k, i, R, C)) {
        ++i;
        continue;
      }
      const int s = i;
      while (i < a1 && inner_edge_visible(profile, seg.orientation, k, i, R, C)) ++i;
      LineSegment part = seg;
      part.start = along[s];
      part.end = along[i];
      out.push_back({part, false});
    }
  }
  return out;
}

bool is_fully_bordered(const LayoutResult& layout, const StyleProfile& profile) {
  double all = 0.0, shown = 0.0;
  for (const auto& s : layout.rulings) all += s.length();
  for (const auto& v : visible_rulings(layout, profile)) shown += v.segment.length();
  return shown >= all - 1e-9 * std::max(1.0, all);
}

std::pair<int, int> canvas_size(const LayoutResult& layout, const RenderOptions& options) {
  return {static_cast<int>(round_half_up(layout.table_box.w)) + 2 * options.margin,
          static_cast<int>(round_half_up(layout.table_box.h)) + 2 * options.margin};
}

namespace {

/// Paints a stroke `ti` pixels thick whose first pixel row (or column) is
/// `p0`, covering [a0, a1) along the line.
void stroke(Canvas& canvas, Orientation o, long p0, long a0, long a1, long ti, Rgb color, long dash, long gap) {
  auto paint = [&](long s, long e) {
    if (o == Orientation::Horizontal) canvas.fill_rect(s, p0, e, p0 + ti, color);
    else canvas.fill_rect(p0, s, p0 + ti, e, color);
  };
  if (dash <= 0 || gap <= 0) {
    paint(a0, a1);
    return;
  }
  for (long s = a0; s < a1; s += dash + gap) paint(s, std::min(s + dash, a1));
}

}  // namespace

Canvas render_table(const LayoutResult& layout, const StyleProfile& profile, const GlyphRasterizer& rasterizer,
                    const RenderOptions& options) {
  const auto [width, height] = canvas_size(layout, options);
  if (width > options.max_dimension || height > options.max_dimension) {
    throw Error(Errc::CanvasOverflow, "canvas " + std::to_string(width) + "x" + std::to_string(height) +
                                          " exceeds " + std::to_string(options.max_dimension));
  }
  Canvas canvas(width, height, options.page);
  const double m = options.margin;

  for (const CellLayout& cell : layout.cells) {
    const Rect& r = cell.cell_box;
    canvas.fill_rect(round_half_up(r.x + m), round_half_up(r.y + m), round_half_up(r.right() + m),
                     round_half_up(r.bottom() + m), cell.style.background);
  }
  for (const CellLayout& cell : layout.cells) {
    for (std::size_t i = 0; i < cell.line_boxes.size() && i < cell.lines.size(); ++i) {
      Rect box = cell.line_boxes[i];
      box.x += m;
      box.y += m;
      rasterizer.draw_line(canvas, cell.lines[i], cell.style, box);
    }
  }

  const auto& b = layout.boundaries;
  const bool dashed = profile.inner.line_type == InnerLineType::Dashed;
  const long dash = dashed ? std::max(1L, round_half_up(profile.inner.dash)) : 0;
  const long gap = dashed ? round_half_up(profile.inner.gap) : 0;
  for (const VisibleRuling& vr : visible_rulings(layout, profile)) {
    const LineSegment& s = vr.segment;
    const long ti = std::max(1L, round_half_up(s.thickness));
    const long p0 = round_half_up(s.position + m) - ti / 2;
    const long a0 = round_half_up(s.start + m) - ti / 2;
    const long a1 = round_half_up(s.end + m) - ti / 2 + ti;
    const Rgb color = vr.outer ? profile.outer.color : profile.inner.color;
    stroke(canvas, s.orientation, p0, a0, a1, ti, color, vr.outer ? 0 : dash, vr.outer ? 0 : gap);
    if (vr.outer && profile.outer.line_type == OuterLineType::DoubleSolid) {
      const bool near = s.orientation == Orientation::Horizontal ? s.position == b.row_ys.front()
                                                                 : s.position == b.col_xs.front();
      const long shift = near ? -2 * ti : 2 * ti;
      stroke(canvas, s.orientation, p0 + shift, a0 - 2 * ti, a1 + 2 * ti, ti, color, 0, 0);
    }
  }
  return canvas;
}

namespace {

void png_append(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void png_flush_noop(png_structp) {}

}  // namespace

std::vector<std::uint8_t> encode_png(const Canvas& canvas) {
  std::vector<std::uint8_t> out;
  std::vector<std::uint8_t> pixels = canvas.interleaved();
  std::vector<png_bytep> rows(static_cast<std::size_t>(canvas.height()));
  for (int y = 0; y < canvas.height(); ++y) rows[y] = pixels.data() + static_cast<std::size_t>(y) * canvas.width() * 3;

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error(Errc::IoError, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(Errc::IoError, "png encoding failed");
  }
  png_set_write_fn(png, &out, png_append, png_flush_noop);
  png_set_IHDR(png, info, canvas.width(), canvas.height(), 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

void write_png(const Canvas& canvas, const std::filesystem::path& path) {
  const auto bytes = encode_png(canvas);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::IoError, "cannot write " + path.string());
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error(Errc::IoError, "short write to " + path.string());
}

std::string image_file_name(std::string_view dataset_id, std::uint64_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "_%06llu.png", static_cast<unsigned long long>(index));
  return std::string(dataset_id) + buf;
}

}  // namespace tabsynth
