#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "lacmatch/image.hpp"

namespace lacmatch {

/// Interleaved 8-bit RGB raster, used only for overlay output.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // size = 3 * width * height

  static RgbImage from_gray(const GrayImage& g);
  void set(int x, int y, std::uint8_t r, std::uint8_t gr, std::uint8_t b);
};

/// ITU-R BT.601 luma, rounded to nearest.
std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b);

GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayImage& img);

/// Any PNG colour type; colour is reduced to luma, alpha is dropped.
GrayImage read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const GrayImage& img);
void write_png(const std::filesystem::path& path, const RgbImage& img);

/// Dispatches on file signature (P5 or PNG). Throws InputError otherwise.
GrayImage read_image(const std::filesystem::path& path);
/// Dispatches on extension: .pgm or .png.
void write_image(const std::filesystem::path& path, const GrayImage& img);

}  // namespace lacmatch
