#include "tabsynth/truetype.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

#include "tabsynth/error.hpp"

namespace tabsynth {

namespace {

constexpr int kCurveSteps = 6;
constexpr int kMaxCompositeDepth = 8;

std::uint32_t tag(const char* s) {
  return (std::uint32_t(std::uint8_t(s[0])) << 24) | (std::uint32_t(std::uint8_t(s[1])) << 16) |
         (std::uint32_t(std::uint8_t(s[2])) << 8) | std::uint32_t(std::uint8_t(s[3]));
}

void flatten_contour(const std::vector<Point2>& pts, const std::vector<bool>& on,
                     std::vector<Point2>& out) {
  const std::size_t n = pts.size();
  if (n == 0) return;
  // Start from an on-curve point, or the midpoint of the first two off points.
  std::size_t start = 0;
  while (start < n && !on[start]) ++start;
  Point2 first;
  if (start == n) {
    first = {(pts[0].x + pts[1 % n].x) / 2, (pts[0].y + pts[1 % n].y) / 2};
    start = 0;
  } else {
    first = pts[start];
  }
  out.push_back(first);
  Point2 cur = first;
  bool have_ctrl = false;
  Point2 ctrl;
  auto quad_to = [&](Point2 c, Point2 p) {
    for (int s = 1; s <= kCurveSteps; ++s) {
      const double t = double(s) / kCurveSteps;
      const double a = (1 - t) * (1 - t), b = 2 * (1 - t) * t, d = t * t;
      out.push_back({a * cur.x + b * c.x + d * p.x, a * cur.y + b * c.y + d * p.y});
    }
    cur = p;
  };
  for (std::size_t k = 1; k <= n; ++k) {
    const std::size_t i = (start + k) % n;
    const Point2 p = k == n && on[start] ? first : pts[i];
    const bool is_on = k == n ? true : on[i];
    const Point2 target = k == n ? first : p;
    if (is_on) {
      if (have_ctrl) quad_to(ctrl, target);
      else {
        out.push_back(target);
        cur = target;
      }
      have_ctrl = false;
    } else {
      if (have_ctrl) {
        const Point2 mid{(ctrl.x + p.x) / 2, (ctrl.y + p.y) / 2};
        quad_to(ctrl, mid);
      }
      ctrl = p;
      have_ctrl = true;
    }
  }
}

}  // namespace

TrueTypeFont TrueTypeFont::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open font " + path.string());
  std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return TrueTypeFont(std::move(data));
}

std::uint16_t TrueTypeFont::u16(std::size_t off) const {
  if (off + 2 > data_.size()) throw Error(Errc::ParseFailure, "truncated font");
  return static_cast<std::uint16_t>((data_[off] << 8) | data_[off + 1]);
}

std::uint32_t TrueTypeFont::u32(std::size_t off) const {
  return (std::uint32_t(u16(off)) << 16) | u16(off + 2);
}

TrueTypeFont::TrueTypeFont(std::vector<std::uint8_t> data) : data_(std::move(data)) {
  const int num_tables = u16(4);
  std::size_t head = 0, hhea = 0, maxp = 0, cmap = 0;
  for (int i = 0; i < num_tables; ++i) {
    const std::size_t rec = 12 + 16 * std::size_t(i);
    const std::uint32_t t = u32(rec);
    const std::size_t off = u32(rec + 8);
    if (t == tag("head")) head = off;
    else if (t == tag("hhea")) hhea = off;
    else if (t == tag("maxp")) maxp = off;
    else if (t == tag("cmap")) cmap = off;
    else if (t == tag("glyf")) glyf_ = off;
    else if (t == tag("loca")) loca_ = off;
    else if (t == tag("hmtx")) hmtx_ = off;
  }
  if (!head || !hhea || !maxp || !cmap || !glyf_ || !loca_ || !hmtx_) {
    throw Error(Errc::ParseFailure, "font lacks required tables (glyf outlines only)");
  }
  units_per_em_ = u16(head + 18);
  loca_long_ = i16(head + 50);
  num_glyphs_ = u16(maxp + 4);
  ascent_ = i16(hhea + 4);
  descent_ = i16(hhea + 6);
  line_gap_ = i16(hhea + 8);
  num_hmetrics_ = u16(hhea + 34);

  const int n_sub = u16(cmap + 2);
  int best = 0;
  for (int i = 0; i < n_sub; ++i) {
    const std::size_t rec = cmap + 4 + 8 * std::size_t(i);
    const int platform = u16(rec), encoding = u16(rec + 2);
    const std::size_t sub = cmap + u32(rec + 4);
    const int format = u16(sub);
    int rank = 0;
    if (format == 12 && (platform == 3 || platform == 0)) rank = 3;
    else if (format == 4 && platform == 3 && encoding == 1) rank = 2;
    else if (format == 4 && platform == 0) rank = 1;
    if (rank > best) {
      best = rank;
      cmap_sub_ = sub;
      cmap_format_ = format;
    }
  }
  if (best == 0) throw Error(Errc::ParseFailure, "font has no unicode cmap");
}

std::uint16_t TrueTypeFont::glyph_index(char32_t cp) const {
  const auto c = static_cast<std::uint32_t>(cp);
  if (cmap_format_ == 12) {
    const std::uint32_t groups = u32(cmap_sub_ + 12);
    std::uint32_t lo = 0, hi = groups;
    while (lo < hi) {
      const std::uint32_t mid = (lo + hi) / 2;
      const std::size_t g = cmap_sub_ + 16 + 12 * std::size_t(mid);
      if (c < u32(g)) hi = mid;
      else if (c > u32(g + 4)) lo = mid + 1;
      else return static_cast<std::uint16_t>(u32(g + 8) + (c - u32(g)));
    }
    return 0;
  }
  if (c > 0xFFFF) return 0;
  const int seg_count = u16(cmap_sub_ + 6) / 2;
  const std::size_t ends = cmap_sub_ + 14;
  const std::size_t starts = ends + 2 * seg_count + 2;
  const std::size_t deltas = starts + 2 * seg_count;
  const std::size_t ranges = deltas + 2 * seg_count;
  for (int i = 0; i < seg_count; ++i) {
    if (c > u16(ends + 2 * i)) continue;
    const std::uint32_t start = u16(starts + 2 * i);
    if (c < start) return 0;
    const std::uint16_t delta = u16(deltas + 2 * i);
    const std::uint16_t range = u16(ranges + 2 * i);
    if (range == 0) return static_cast<std::uint16_t>(c + delta);
    const std::size_t at = ranges + 2 * i + range + 2 * (c - start);
    const std::uint16_t g = u16(at);
    return g == 0 ? 0 : static_cast<std::uint16_t>(g + delta);
  }
  return 0;
}

double TrueTypeFont::advance_units(std::uint16_t glyph) const {
  const int i = std::min<int>(glyph, num_hmetrics_ - 1);
  return u16(hmtx_ + 4 * std::size_t(i));
}

std::size_t TrueTypeFont::glyph_offset(std::uint16_t glyph, std::size_t& length) const {
  if (glyph >= num_glyphs_) {
    length = 0;
    return 0;
  }
  std::size_t a, b;
  if (loca_long_) {
    a = u32(loca_ + 4 * std::size_t(glyph));
    b = u32(loca_ + 4 * std::size_t(glyph) + 4);
  } else {
    a = 2 * std::size_t(u16(loca_ + 2 * std::size_t(glyph)));
    b = 2 * std::size_t(u16(loca_ + 2 * std::size_t(glyph) + 2));
  }
  length = b > a ? b - a : 0;
  return glyf_ + a;
}

std::vector<std::vector<Point2>> TrueTypeFont::outline(std::uint16_t glyph) const {
  std::vector<std::vector<Point2>> out;
  const double identity[6] = {1, 0, 0, 1, 0, 0};
  append_outline(glyph, identity, 0, out);
  return out;
}

void TrueTypeFont::append_outline(std::uint16_t glyph, const double m[6], int depth,
                                  std::vector<std::vector<Point2>>& out) const {
  std::size_t len = 0;
  const std::size_t g = glyph_offset(glyph, len);
  if (len == 0 || depth > kMaxCompositeDepth) return;
  const int n_contours = i16(g);

  if (n_contours >= 0) {
    std::vector<int> end_pts(n_contours);
    for (int i = 0; i < n_contours; ++i) end_pts[i] = u16(g + 10 + 2 * i);
    const int n_pts = n_contours ? end_pts.back() + 1 : 0;
    std::size_t p = g + 10 + 2 * std::size_t(n_contours);
    p += 2 + u16(p);
    std::vector<std::uint8_t> flags;
    flags.reserve(n_pts);
    while (static_cast<int>(flags.size()) < n_pts) {
      const std::uint8_t f = data_.at(p++);
      flags.push_back(f);
      if (f & 8) {
        const int rep = data_.at(p++);
        for (int r = 0; r < rep; ++r) flags.push_back(f);
      }
    }
    std::vector<Point2> pts(n_pts);
    int v = 0;
    for (int i = 0; i < n_pts; ++i) {
      const std::uint8_t f = flags[i];
      if (f & 2) v += (f & 16) ? data_.at(p) : -int(data_.at(p)), ++p;
      else if (!(f & 16)) v += i16(p), p += 2;
      pts[i].x = v;
    }
    v = 0;
    for (int i = 0; i < n_pts; ++i) {
      const std::uint8_t f = flags[i];
      if (f & 4) v += (f & 32) ? data_.at(p) : -int(data_.at(p)), ++p;
      else if (!(f & 32)) v += i16(p), p += 2;
      pts[i].y = v;
    }
    for (auto& q : pts) {
      const double x = q.x, y = q.y;
      q.x = m[0] * x + m[2] * y + m[4];
      q.y = m[1] * x + m[3] * y + m[5];
    }
    int first = 0;
    for (int c = 0; c < n_contours; ++c) {
      std::vector<Point2> cp(pts.begin() + first, pts.begin() + end_pts[c] + 1);
      std::vector<bool> on;
      for (int i = first; i <= end_pts[c]; ++i) on.push_back(flags[i] & 1);
      std::vector<Point2> poly;
      flatten_contour(cp, on, poly);
      if (poly.size() >= 3) out.push_back(std::move(poly));
      first = end_pts[c] + 1;
    }
    return;
  }

  std::size_t p = g + 10;
  for (;;) {
    const std::uint16_t flags = u16(p);
    const std::uint16_t child = u16(p + 2);
    p += 4;
    double dx, dy;
    if (flags & 1) {
      dx = i16(p), dy = i16(p + 2);
      p += 4;
    } else {
      dx = static_cast<std::int8_t>(data_.at(p)), dy = static_cast<std::int8_t>(data_.at(p + 1));
      p += 2;
    }
    double a = 1, b = 0, c = 0, d = 1;
    auto f2dot14 = [&](std::size_t at) { return i16(at) / 16384.0; };
    if (flags & 8) {
      a = d = f2dot14(p);
      p += 2;
    } else if (flags & 0x40) {
      a = f2dot14(p), d = f2dot14(p + 2);
      p += 4;
    } else if (flags & 0x80) {
      a = f2dot14(p), b = f2dot14(p + 2), c = f2dot14(p + 4), d = f2dot14(p + 6);
      p += 8;
    }
    if (!(flags & 2)) dx = dy = 0;  // point matching is not supported
    // child transform composed with parent: parent(m) * local
    const double cm[6] = {m[0] * a + m[2] * b, m[1] * a + m[3] * b, m[0] * c + m[2] * d,
                          m[1] * c + m[3] * d, m[0] * dx + m[2] * dy + m[4], m[1] * dx + m[3] * dy + m[5]};
    append_outline(child, cm, depth + 1, out);
    if (!(flags & 0x20)) break;
  }
}

TrueTypeMetrics::TrueTypeMetrics(std::map<std::string, std::shared_ptr<const TrueTypeFont>> fonts,
                                 std::shared_ptr<const TrueTypeFont> fallback)
    : fonts_(fonts.begin(), fonts.end()), fallback_(std::move(fallback)) {
  if (!fallback_) throw Error(Errc::ConfigError, "real-font metrics need a default font");
}

const TrueTypeFont& TrueTypeMetrics::font(std::string_view family) const {
  auto it = fonts_.find(family);
  return it == fonts_.end() ? *fallback_ : *it->second;
}

double TrueTypeMetrics::advance(std::string_view family, double size, char32_t cp) const {
  const TrueTypeFont& f = font(family);
  const std::uint16_t g = f.glyph_index(cp);
  if (g == 0) return fixed_.advance(family, size, cp);
  return f.advance_units(g) * size / f.units_per_em();
}

double TrueTypeMetrics::line_height(std::string_view family, double size) const {
  const TrueTypeFont& f = font(family);
  return std::max(size, (f.ascent() - f.descent()) * size / f.units_per_em());
}

double TrueTypeMetrics::baseline(std::string_view family, double size) const {
  const TrueTypeFont& f = font(family);
  const double scale = size / f.units_per_em();
  const double body = (f.ascent() - f.descent()) * scale;
  return (line_height(family, size) - body) / 2.0 + f.ascent() * scale;
}

}  // namespace tabsynth
