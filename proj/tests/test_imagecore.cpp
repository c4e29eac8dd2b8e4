#include <doctest.h>

#include "lacmatch/errors.hpp"
#include "lacmatch/image.hpp"
#include "lacmatch/image_io.hpp"
#include "support.hpp"

#include <fstream>

using namespace lacmatch;

namespace {

std::int64_t direct_sum(const GrayImage& img, int x0, int y0, int x1, int y1) {
  std::int64_t s = 0;
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) s += img(x, y);
  return s;
}

}  // namespace

TEST_CASE("integral of a single pixel") {
  const GrayImage img(1, 1, 7);
  const auto ii = compute_integral(img);
  CHECK(ii.at(1, 1) == 7);
  CHECK(ii.at(0, 0) == 0);
  CHECK(ii.at(1, 0) == 0);
  CHECK(ii.at(0, 1) == 0);
}

TEST_CASE("constant field box sums are s squared") {
  const GrayImage img(12, 9, 1);
  const auto ii = compute_integral(img);
  for (int s = 1; s <= 9; ++s) CHECK(ii.box_sum(0, 0, s, s) == s * s);
  CHECK(ii.box_sum(3, 2, 8, 7) == 25);
}

TEST_CASE("random 5x5 box sum matches nested loops") {
  const GrayImage img = testing::random_image(5, 5, 11);
  const auto ii = compute_integral(img);
  // pixels (1,1) through (3,3) inclusive
  CHECK(ii.box_sum(1, 1, 4, 4) == direct_sum(img, 1, 1, 4, 4));
}

TEST_CASE("integral has zero first row and column and is monotone") {
  const GrayImage img = testing::random_image(23, 17, 3);
  const auto ii = compute_integral(img);
  for (int x = 0; x <= 23; ++x) CHECK(ii.at(x, 0) == 0);
  for (int y = 0; y <= 17; ++y) CHECK(ii.at(0, y) == 0);
  for (int y = 0; y <= 17; ++y)
    for (int x = 0; x <= 23; ++x) {
      if (x > 0) CHECK(ii.at(x, y) >= ii.at(x - 1, y));
      if (y > 0) CHECK(ii.at(x, y) >= ii.at(x, y - 1));
      CHECK(ii.at(x, y) == direct_sum(img, 0, 0, x, y));
    }
}

TEST_CASE("accumulator survives a 4096x4096 all-255 image") {
  const GrayImage img(4096, 4096, 255);
  const auto ii = compute_integral(img);
  CHECK(ii.at(4096, 4096) == std::int64_t{255} * 4096 * 4096);
}

TEST_CASE("box_mean examples") {
  SUBCASE("constant") {
    const auto ii = compute_integral(GrayImage(20, 20, 50));
    CHECK(box_mean(ii, {10, 10}, 5) == 50.0);
    CHECK(box_mean(ii, {3, 4}, 4) == 50.0);
  }
  SUBCASE("s = 1 is the pixel") {
    const GrayImage img = testing::random_image(9, 9, 5);
    const auto ii = compute_integral(img);
    for (int y = 0; y < 9; ++y)
      for (int x = 0; x < 9; ++x) CHECK(box_mean(ii, {double(x), double(y)}, 1) == img(x, y));
  }
  SUBCASE("3x3 at the centre of a random 7x7") {
    const GrayImage img = testing::random_image(7, 7, 9);
    const auto ii = compute_integral(img);
    double direct = 0;
    for (int y = 2; y <= 4; ++y)
      for (int x = 2; x <= 4; ++x) direct += img(x, y);
    CHECK(box_mean(ii, {3, 3}, 3) == doctest::Approx(direct / 9.0).epsilon(1e-12));
  }
}

TEST_CASE("even boxes anchor at p - floor(s/2)") {
  CHECK(box_origin(10.0, 4) == 8);
  CHECK(box_origin(10.0, 3) == 9);
  CHECK(box_origin(10.4, 2) == 9);
  GrayImage img(6, 6, 0);
  img(2, 2) = 40;  // inside [2,4) x [2,4) for centre (3,3), s = 2
  const auto ii = compute_integral(img);
  CHECK(box_mean(ii, {3, 3}, 2) == 10.0);
}

TEST_CASE("box_mean rejects boxes leaving the image") {
  const auto ii = compute_integral(GrayImage(10, 10, 1));
  CHECK_THROWS_AS(box_mean(ii, {0, 5}, 3), BoundaryError);
  CHECK_THROWS_AS(box_mean(ii, {9, 9}, 3), BoundaryError);
  CHECK_NOTHROW(box_mean(ii, {9, 9}, 2));
  CHECK_THROWS_AS(box_mean(ii, {5, 5}, 11), BoundaryError);
  CHECK_NOTHROW(box_mean(ii, {1, 1}, 3));
  CHECK_THROWS_AS(box_mean(ii, {5, 5}, 0), BoundaryError);
}

TEST_CASE("property: box_mean equals the direct mean on random boxes") {
  CounterRng rng(77);
  for (int trial = 0; trial < 300; ++trial) {
    const int w = 8 + static_cast<int>(rng.below(40)), h = 8 + static_cast<int>(rng.below(40));
    const GrayImage img = testing::random_image(w, h, rng.next_u64());
    const auto ii = compute_integral(img);
    const int s = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(std::min(w, h))));
    const int x0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(w - s + 1)));
    const int y0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(h - s + 1)));
    const Point2 c{double(x0 + s / 2), double(y0 + s / 2)};
    const double direct = static_cast<double>(direct_sum(img, x0, y0, x0 + s, y0 + s)) / (s * s);
    CHECK(std::abs(box_mean(ii, c, s) - direct) < 1e-9);
  }
}

TEST_CASE("image construction and cropping") {
  CHECK_THROWS_AS(GrayImage(0, 4), InputError);
  CHECK_THROWS_AS(GrayImage(2, 2, std::vector<std::uint8_t>(3)), InputError);
  const GrayImage img = testing::random_image(10, 8, 1);
  const GrayImage c = img.crop({2, 3, 4, 5});
  CHECK(c.width() == 4);
  CHECK(c(0, 0) == img(2, 3));
  CHECK(c(3, 4) == img(5, 7));
  CHECK_THROWS_AS(img.crop({8, 0, 4, 2}), BoundaryError);
}

TEST_CASE("bilinear sampling and blur") {
  GrayImage img(2, 1);
  img(0, 0) = 0;
  img(1, 0) = 100;
  CHECK(sample_bilinear(img, 0.25, 0) == doctest::Approx(25));
  CHECK(sample_bilinear(img, -3, 0) == 0);
  CHECK(sample_bilinear(img, 5, 2) == 100);
  const GrayImage flat(30, 20, 90);
  CHECK(gaussian_blur(flat, 2.0) == flat);
  const GrayImage r = testing::random_image(16, 16, 4);
  CHECK(gaussian_blur(r, 0.0) == r);
}

TEST_CASE("luma uses BT.601 weights rounded to nearest") {
  CHECK(luma(255, 0, 0) == 76);
  CHECK(luma(0, 255, 0) == 150);
  CHECK(luma(0, 0, 255) == 29);
  CHECK(luma(255, 255, 255) == 255);
  CHECK(luma(10, 20, 30) == 18);
}

TEST_CASE("PGM and PNG round trips") {
  testing::TempDir dir("io");
  const GrayImage img = testing::random_image(37, 21, 8);
  write_pgm(dir / "a.pgm", img);
  write_png(dir / "a.png", img);
  CHECK(read_pgm(dir / "a.pgm") == img);
  CHECK(read_png(dir / "a.png") == img);
  CHECK(read_image(dir / "a.pgm") == img);
  CHECK(read_image(dir / "a.png") == img);

  RgbImage rgb;
  rgb.width = 2;
  rgb.height = 1;
  rgb.data = {255, 0, 0, 10, 20, 30};
  write_png(dir / "c.png", rgb);
  const GrayImage g = read_png(dir / "c.png");
  CHECK(g(0, 0) == 76);
  CHECK(g(1, 0) == 18);

  std::ofstream(dir / "junk.png") << "not an image";
  CHECK_THROWS_AS(read_image(dir / "junk.png"), InputError);
  CHECK_THROWS_AS(read_image(dir / "missing.png"), InputError);
}
