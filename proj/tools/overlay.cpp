#include "overlay.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <map>

namespace lacmatch::cli {

namespace {

const std::map<char, std::array<std::uint8_t, 7>>& font() {
  static const std::map<char, std::array<std::uint8_t, 7>> glyphs = {
#include "font5x7.inc"
  };
  return glyphs;
}

void put(RgbImage& img, int x, int y, Rgb c) {
  if (x >= 0 && y >= 0 && x < img.width && y < img.height) img.set(x, y, c.r, c.g, c.b);
}

}  // namespace

void draw_text(RgbImage& img, int x, int y, const std::string& text, Rgb colour, int scale) {
  const auto& glyphs = font();
  int pen = x;
  for (char ch : text) {
    auto it = glyphs.find(static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
    if (it == glyphs.end()) it = glyphs.find('?');
    for (int row = 0; row < 7; ++row)
      for (int col = 0; col < 5; ++col) {
        if (!((it->second[static_cast<std::size_t>(row)] >> (4 - col)) & 1)) continue;
        for (int dy = 0; dy < scale; ++dy)
          for (int dx = 0; dx < scale; ++dx) put(img, pen + col * scale + dx, y + row * scale + dy, colour);
      }
    pen += 6 * scale;
  }
}

void draw_cross(RgbImage& img, Point2 at, int half, Rgb colour) {
  const int cx = static_cast<int>(std::lround(at.x));
  const int cy = static_cast<int>(std::lround(at.y));
  for (int d = -half; d <= half; ++d)
    for (int w = -1; w <= 1; ++w) {
      put(img, cx + d, cy + w, colour);
      put(img, cx + w, cy + d, colour);
    }
}

RgbImage render_overlay(const GrayImage& frame, const FrameResult& result, const TemplateSet& set) {
  RgbImage img = RgbImage::from_gray(frame);
  const Rgb marker = result.stale ? Rgb{160, 160, 160} : Rgb{255, 40, 40};
  const Rgb text = result.stale ? Rgb{200, 200, 200} : Rgb{255, 230, 0};
  for (const auto& [id, p] : result.label_positions) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) continue;
    if (p.x < 0 || p.y < 0 || p.x >= frame.width() || p.y >= frame.height()) continue;
    draw_cross(img, p, 8, marker);
    draw_text(img, static_cast<int>(p.x) + 12, static_cast<int>(p.y) - 7, set.label(id).name, text);
  }
  if (result.status == FrameStatus::kNoMatch) draw_text(img, 8, 8, "NO MATCH", {255, 80, 80});
  return img;
}

}  // namespace lacmatch::cli
