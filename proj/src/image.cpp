#include "lacmatch/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "lacmatch/errors.hpp"

namespace lacmatch {

double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

bool is_finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

GrayImage::GrayImage(int width, int height, std::uint8_t fill)
    : width_(width), height_(height) {
  if (width < 1 || height < 1) throw InputError("image dimensions must be positive");
  data_.assign(static_cast<std::size_t>(width) * height, fill);
}

GrayImage::GrayImage(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width < 1 || height < 1) throw InputError("image dimensions must be positive");
  if (data_.size() != static_cast<std::size_t>(width) * height)
    throw InputError("image data length does not match width x height");
}

GrayImage GrayImage::crop(const Rect& r) const {
  if (r.w < 1 || r.h < 1 || r.x < 0 || r.y < 0 || r.x + r.w > width_ || r.y + r.h > height_)
    throw BoundaryError("crop rectangle outside image");
  GrayImage out(r.w, r.h);
  for (int y = 0; y < r.h; ++y)
    std::copy_n(row(r.y + y) + r.x, r.w, out.data_.data() + static_cast<std::size_t>(y) * r.w);
  return out;
}

IntegralImage::IntegralImage(const GrayImage& img)
    : width_(img.width()), height_(img.height()) {
  const int stride = width_ + 1;
  sums_.assign(static_cast<std::size_t>(stride) * (height_ + 1), 0);
  for (int y = 0; y < height_; ++y) {
    const std::uint8_t* src = img.row(y);
    std::int64_t row_sum = 0;
    std::int64_t* above = &sums_[static_cast<std::size_t>(y) * stride];
    std::int64_t* cur = above + stride;
    for (int x = 0; x < width_; ++x) {
      row_sum += src[x];
      cur[x + 1] = above[x + 1] + row_sum;
    }
  }
}

IntegralImage compute_integral(const GrayImage& img) { return IntegralImage(img); }

int box_origin(double coordinate, int side) {
  return static_cast<int>(std::floor(coordinate + 0.5)) - side / 2;
}

double box_mean(const IntegralImage& ii, Point2 center, int side) {
  if (side < 1) throw BoundaryError("box side must be >= 1");
  const int x0 = box_origin(center.x, side);
  const int y0 = box_origin(center.y, side);
  if (x0 < 0 || y0 < 0 || x0 + side > ii.width() || y0 + side > ii.height())
    throw BoundaryError("box of side " + std::to_string(side) + " at (" +
                        std::to_string(center.x) + ", " + std::to_string(center.y) +
                        ") leaves the image");
  return static_cast<double>(ii.box_sum(x0, y0, x0 + side, y0 + side)) /
         (static_cast<double>(side) * side);
}

double sample_bilinear(const GrayImage& img, double x, double y) {
  const int w = img.width();
  const int h = img.height();
  x = std::clamp(x, 0.0, static_cast<double>(w - 1));
  y = std::clamp(y, 0.0, static_cast<double>(h - 1));
  const int x0 = static_cast<int>(x);
  const int y0 = static_cast<int>(y);
  const int x1 = std::min(x0 + 1, w - 1);
  const int y1 = std::min(y0 + 1, h - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const double top = img(x0, y0) * (1.0 - fx) + img(x1, y0) * fx;
  const double bottom = img(x0, y1) * (1.0 - fx) + img(x1, y1) * fx;
  return top * (1.0 - fy) + bottom * fy;
}

GrayImage gaussian_blur(const GrayImage& img, double sigma) {
  if (sigma <= 0.0) return img;
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * r + 1));
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) sum += k[static_cast<std::size_t>(i + r)] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (double& v : k) v /= sum;

  const int w = img.width();
  const int h = img.height();
  std::vector<double> tmp(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[static_cast<std::size_t>(i + r)] * img(std::clamp(x + i, 0, w - 1), y);
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  GrayImage out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i)
        acc += k[static_cast<std::size_t>(i + r)] * tmp[static_cast<std::size_t>(std::clamp(y + i, 0, h - 1)) * w + x];
      out(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(acc), 0L, 255L));
    }
  return out;
}

}  // namespace lacmatch
