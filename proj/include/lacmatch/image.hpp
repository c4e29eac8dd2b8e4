#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace lacmatch {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
  friend bool operator==(const Point2&, const Point2&) = default;
};

double distance(Point2 a, Point2 b);
bool is_finite(Point2 p);

struct Size2 {
  int width = 0;
  int height = 0;
  friend bool operator==(const Size2&, const Size2&) = default;
};

/// Axis-aligned integer rectangle, half-open: [x, x+w) x [y, y+h).
struct Rect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  bool contains(Point2 p) const {
    return p.x >= x && p.y >= y && p.x < x + w && p.y < y + h;
  }
  bool overlaps(const Rect& o) const {
    return x < o.x + o.w && o.x < x + w && y < o.y + o.h && o.y < y + h;
  }
  Point2 origin() const { return {static_cast<double>(x), static_cast<double>(y)}; }
  friend bool operator==(const Rect&, const Rect&) = default;
};

/// 8-bit single-channel raster, row-major.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, std::uint8_t fill = 0);
  GrayImage(int width, int height, std::vector<std::uint8_t> data);

  int width() const { return width_; }
  int height() const { return height_; }
  Size2 size() const { return {width_, height_}; }
  bool empty() const { return data_.empty(); }

  std::uint8_t operator()(int x, int y) const {
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }
  std::uint8_t& operator()(int x, int y) {
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }
  bool inside(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  std::span<const std::uint8_t> pixels() const { return data_; }
  std::span<std::uint8_t> pixels() { return data_; }
  const std::uint8_t* row(int y) const {
    return data_.data() + static_cast<std::size_t>(y) * width_;
  }

  /// Copy of a sub-rectangle; throws BoundaryError if it leaves the image.
  GrayImage crop(const Rect& r) const;

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Summed-area table with a zero first row and column:
/// at(x, y) = sum of src(u, v) for u < x, v < y.
class IntegralImage {
 public:
  IntegralImage() = default;
  explicit IntegralImage(const GrayImage& img);

  int width() const { return width_; }    // source width
  int height() const { return height_; }  // source height

  std::int64_t at(int x, int y) const {
    return sums_[static_cast<std::size_t>(y) * (width_ + 1) + x];
  }
  /// Sum over [x0, x1) x [y0, y1); bounds are not checked.
  std::int64_t box_sum(int x0, int y0, int x1, int y1) const {
    return at(x1, y1) - at(x0, y1) - at(x1, y0) + at(x0, y0);
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::int64_t> sums_;
};

IntegralImage compute_integral(const GrayImage& img);

/// Top-left pixel of the side-s box centred at p: round(p) - floor(s/2).
int box_origin(double coordinate, int side);

/// Mean intensity of the s x s box centred at `center`.
/// Throws BoundaryError when the box is not fully inside the image.
double box_mean(const IntegralImage& ii, Point2 center, int side);

/// Bilinear sample with edge clamping.
double sample_bilinear(const GrayImage& img, double x, double y);

/// Separable Gaussian blur, kernel radius ceil(3 sigma), edge clamping.
/// sigma <= 0 returns a copy.
GrayImage gaussian_blur(const GrayImage& img, double sigma);

}  // namespace lacmatch
