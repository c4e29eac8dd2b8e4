#pragma once

#include <string>

#include "lacmatch/image_io.hpp"
#include "lacmatch/lac.hpp"

namespace lacmatch::cli {

struct Rgb {
  std::uint8_t r, g, b;
};

/// 5x7 bitmap text, each font pixel drawn as a scale x scale block.
void draw_text(RgbImage& img, int x, int y, const std::string& text, Rgb colour, int scale = 2);
void draw_cross(RgbImage& img, Point2 at, int half, Rgb colour);

/// Frame with a cross and the name of every label inside it.
RgbImage render_overlay(const GrayImage& frame, const FrameResult& result, const TemplateSet& set);

}  // namespace lacmatch::cli
