#include <doctest.h>

#include <algorithm>
#include <numbers>

#include "lacmatch/errors.hpp"
#include "lacmatch/evaluation.hpp"
#include "lacmatch/features.hpp"
#include "lacmatch/matching.hpp"
#include "support.hpp"

using namespace lacmatch;

namespace {

// Independent segment test: 9 contiguous circle pixels all brighter than
// p + t or all darker than p - t.
bool oracle_is_corner(const GrayImage& img, int x, int y, int t) {
  static const int dx[16] = {0, 1, 2, 3, 3, 3, 2, 1, 0, -1, -2, -3, -3, -3, -2, -1};
  static const int dy[16] = {-3, -3, -2, -1, 0, 1, 2, 3, 3, 3, 2, 1, 0, -1, -2, -3};
  const int p = img(x, y);
  for (int sign : {1, -1}) {
    int run = 0;
    for (int i = 0; i < 32; ++i) {
      const int v = img(x + dx[i % 16], y + dy[i % 16]);
      const bool hit = sign > 0 ? v > p + t : v < p - t;
      run = hit ? run + 1 : 0;
      if (run >= 9) return true;
    }
  }
  return false;
}

double oracle_orientation(const GrayImage& img, Point2 c, int r) {
  double m01 = 0, m10 = 0;
  const int cx = static_cast<int>(c.x), cy = static_cast<int>(c.y);
  for (int v = -r; v <= r; ++v)
    for (int u = -r; u <= r; ++u)
      if (u * u + v * v <= r * r) {
        m10 += u * img(cx + u, cy + v);
        m01 += v * img(cx + u, cy + v);
      }
  double a = std::atan2(m01, m10);
  if (a < 0) a += 2 * std::numbers::pi;
  return a;
}

double angle_diff(double a, double b) {
  double d = std::fmod(a - b, 2 * std::numbers::pi);
  if (d < -std::numbers::pi) d += 2 * std::numbers::pi;
  if (d > std::numbers::pi) d -= 2 * std::numbers::pi;
  return d;
}

}  // namespace

TEST_CASE("constant image has no keypoints") {
  CHECK(detect_keypoints(GrayImage(128, 128, 90), 20, 500).empty());
}

TEST_CASE("bright square on black yields its corners") {
  GrayImage img(64, 64, 0);
  for (int y = 30; y < 35; ++y)
    for (int x = 30; x < 35; ++x) img(x, y) = 200;
  const auto kps = detect_keypoints(img, 20, 100, 16);
  REQUIRE(!kps.empty());
  for (const auto& kp : kps)
    CHECK(oracle_is_corner(img, static_cast<int>(kp.position.x), static_cast<int>(kp.position.y), 20));
  for (Point2 corner : {Point2{30, 30}, Point2{34, 30}, Point2{30, 34}, Point2{34, 34}}) {
    const bool found = std::any_of(kps.begin(), kps.end(),
                                   [&](const Keypoint& k) { return distance(k.position, corner) <= 1.5; });
    CHECK(found);
  }
}

TEST_CASE("detector contract on a board of squares") {
  // X-junctions of a plain checkerboard fail the 9-pixel arc, so the
  // squares are separated.
  GrayImage img(200, 200);
  for (int y = 0; y < 200; ++y)
    for (int x = 0; x < 200; ++x) img(x, y) = (x % 12 < 6 && y % 12 < 6) ? 220 : 30;
  const auto kps = detect_keypoints(img, 20, 100);
  CHECK(kps.size() <= 100);
  CHECK(!kps.empty());
  for (std::size_t i = 0; i < kps.size(); ++i) {
    CHECK(kps[i].response > 0);
    CHECK(kps[i].position.x >= kFeatureBorder);
    CHECK(kps[i].position.y >= kFeatureBorder);
    CHECK(kps[i].position.x < 200 - kFeatureBorder);
    CHECK(kps[i].position.y < 200 - kFeatureBorder);
    CHECK(kps[i].angle >= 0);
    CHECK(kps[i].angle < 2 * std::numbers::pi);
    if (i) CHECK(kps[i - 1].response >= kps[i].response);
  }
}

TEST_CASE("detector keypoints agree with the segment-test oracle on texture") {
  const GrayImage img = synthetic_panorama({300, 200}, 5);
  const auto kps = detect_keypoints(img, 20, 5000);
  REQUIRE(kps.size() > 50);
  for (const auto& kp : kps) {
    const int x = static_cast<int>(kp.position.x), y = static_cast<int>(kp.position.y);
    CHECK(oracle_is_corner(img, x, y, 20));
    CHECK(fast_score(img, x, y, 20) == doctest::Approx(kp.response));
  }
}

TEST_CASE("orientation") {
  SUBCASE("radially symmetric patch gives 0") {
    GrayImage img(64, 64, 0);
    for (int y = 0; y < 64; ++y)
      for (int x = 0; x < 64; ++x) {
        const double r = std::hypot(x - 32, y - 32);
        img(x, y) = static_cast<std::uint8_t>(std::max(0.0, 200 - 10 * r));
      }
    CHECK(compute_orientation(img, {{32, 32}, 1, 0}) == 0.0);
    CHECK(compute_orientation(GrayImage(64, 64, 9), {{32, 32}, 1, 0}) == 0.0);
  }
  SUBCASE("ramp in +x points along 0") {
    GrayImage img(64, 64);
    for (int y = 0; y < 64; ++y)
      for (int x = 0; x < 64; ++x) img(x, y) = static_cast<std::uint8_t>(3 * x);
    const Keypoint kp{{32, 32}, 1, 0};
    const double a = compute_orientation(img, kp);
    CHECK(std::abs(angle_diff(a, 0.0)) < 1e-9);
    CHECK(a == doctest::Approx(oracle_orientation(img, kp.position, kOrientationRadius)));
  }
  SUBCASE("matches direct moment summation on texture") {
    const GrayImage img = synthetic_panorama({160, 160}, 12);
    for (int i = 0; i < 20; ++i) {
      const Point2 c{40.0 + 4 * i, 30.0 + 5 * i};
      CHECK(std::abs(angle_diff(compute_orientation(img, {c, 1, 0}), oracle_orientation(img, c, 15))) < 1e-9);
    }
  }
  SUBCASE("rotating the patch by 90 degrees shifts the angle by pi/2") {
    const GrayImage img = synthetic_panorama({121, 121}, 21);
    GrayImage rot(121, 121);
    // rot(x, y) = img(y, 120 - x): image offset (du, dv) becomes (-dv, du).
    for (int y = 0; y < 121; ++y)
      for (int x = 0; x < 121; ++x) rot(x, y) = img(y, 120 - x);
    int checked = 0;
    for (int v = 40; v <= 80; v += 10)
      for (int u = 40; u <= 80; u += 10) {
        const double a = compute_orientation(img, {{double(u), double(v)}, 1, 0});
        const double b = compute_orientation(rot, {{120.0 - v, double(u)}, 1, 0});
        CHECK(std::abs(angle_diff(b - a, std::numbers::pi / 2)) < 0.05);
        ++checked;
      }
    CHECK(checked == 25);
  }
}

TEST_CASE("BRIEF pattern and basic contract") {
  const auto pattern = default_brief_pattern();
  CHECK(pattern.size() == 256);
  for (const auto& p : pattern)
    for (int v : {p.ax, p.ay, p.bx, p.by}) CHECK(std::abs(v) <= 15);

  const GrayImage img = synthetic_panorama({128, 128}, 3);
  const Keypoint kp{{64, 64}, 1, 0.7f};
  const auto a = compute_brief(img, kp), b = compute_brief(img, kp);
  CHECK(a.bits() == 256);
  CHECK(hamming(a, b) == 0);

  const auto flat = compute_brief(GrayImage(64, 64, 120), {{32, 32}, 1, 1.0f});
  for (int k = 0; k < 256; ++k) CHECK(!flat.bit(k));

  CHECK_THROWS_AS(compute_brief(img, {{5, 64}, 1, 0}), BoundaryError);
}

TEST_CASE("property: orientation compensation lowers BRIEF distance under rotation") {
  const GrayImage base = gaussian_blur(synthetic_panorama({400, 400}, 44), kBriefSmoothingSigma);
  auto kps = detect_keypoints(synthetic_panorama({400, 400}, 44), 20, 2000);
  std::erase_if(kps, [](const Keypoint& k) { return distance(k.position, {200, 200}) > 120; });
  REQUIRE(kps.size() >= 100);
  for (double deg : {15.0, 30.0, 45.0}) {
    const double th = deg * std::numbers::pi / 180.0;
    // rotated(x) = base(R^-1 (x - c) + c)
    Eigen::Matrix3d r;
    r << std::cos(th), -std::sin(th), 0, std::sin(th), std::cos(th), 0, 0, 0, 1;
    const Homography to_rot = Homography::translation(200, 200) * Homography(r) * Homography::translation(-200, -200);
    const GrayImage rotated = render_view(base, to_rot.inverse(), {400, 400});
    double with = 0, without = 0;
    for (const auto& kp : kps) {
      const auto d0 = compute_brief(base, kp);
      Keypoint moved = kp;
      moved.position = project_point(to_rot, kp.position);
      Keypoint comp = moved;
      comp.angle = static_cast<float>(std::fmod(kp.angle + th, 2 * std::numbers::pi));
      with += hamming(d0, compute_brief(rotated, comp));
      without += hamming(d0, compute_brief(rotated, moved));
    }
    CAPTURE(deg);
    CHECK(with / kps.size() < without / kps.size());
  }
}

TEST_CASE("descriptor storage") {
  BinaryDescriptor d(70);
  d.set(0, true);
  d.set(69, true);
  CHECK(d.bit(69));
  CHECK(!d.bit(68));
  DescriptorSet s(70);
  s.push_back(d);
  s.push_back(BinaryDescriptor(70));
  CHECK(s.size() == 2);
  CHECK(s.at(0) == d);
  CHECK(s.words_per_descriptor() == 2);
  CHECK_THROWS_AS(s.push_back(BinaryDescriptor(64)), InputError);
}
