#include <doctest.h>

#include "lacmatch/errors.hpp"
#include "lacmatch/homography.hpp"
#include "support.hpp"

using namespace lacmatch;

namespace {

std::vector<Correspondence> project_all(const Homography& h, std::span<const Point2> src) {
  std::vector<Correspondence> out;
  for (auto p : src) out.push_back({p, project_point(h, p)});
  return out;
}

std::vector<Point2> random_points(CounterRng& rng, int n) {
  std::vector<Point2> pts;
  for (int i = 0; i < n; ++i) pts.push_back({rng.uniform(0, 640), rng.uniform(0, 480)});
  return pts;
}

struct Contaminated {
  std::vector<Correspondence> pairs;
  std::vector<bool> truth;
  Homography h;
};

Contaminated contaminated(CounterRng& rng, int inliers, int outliers, double noise) {
  Contaminated c;
  c.h = testing::random_homography(rng);
  for (int i = 0; i < inliers + outliers; ++i) {
    const Point2 s{rng.uniform(0, 640), rng.uniform(0, 480)};
    Point2 d = project_point(c.h, s);
    if (i < inliers)
      d = d + Point2{rng.normal(0, noise), rng.normal(0, noise)};
    else
      d = {rng.uniform(-50, 700), rng.uniform(-50, 530)};
    c.pairs.push_back({s, d});
    c.truth.push_back(i < inliers);
  }
  return c;
}

}  // namespace

TEST_CASE("project_point examples") {
  const Point2 p = project_point(Homography::identity(), {3, 4});
  CHECK(p == Point2{3, 4});
  CHECK(project_point(Homography::translation(5, -2), {0, 0}) == Point2{5, -2});
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m(2, 0) = 1;
  m(2, 2) = 0;
  CHECK_THROWS_AS(project_point(Homography(m), {0, 7}), PointAtInfinityError);
}

TEST_CASE("normalisation") {
  Eigen::Matrix3d m;
  m << 2, 0, 4, 0, 2, 6, 0, 0, 2;
  const Homography h(m);
  CHECK(h(2, 2) == 1.0);
  CHECK(h(0, 2) == 2.0);
  CHECK(h(1, 2) == 3.0);
  Eigen::Matrix3d z = Eigen::Matrix3d::Zero();
  z(0, 1) = 3;
  z(1, 0) = 4;
  z(2, 0) = 1;
  CHECK(Homography(z).matrix().norm() == doctest::Approx(1.0));
}

TEST_CASE("DLT examples") {
  const std::vector<Point2> sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  const auto id = estimate_dlt(project_all(Homography::identity(), sq));
  CHECK((id.matrix() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-9);

  const auto tr = estimate_dlt(project_all(Homography::translation(5, -2), sq));
  CHECK((tr.matrix() - Homography::translation(5, -2).matrix()).cwiseAbs().maxCoeff() < 1e-9);

  CounterRng rng(99);
  const Homography h = testing::random_homography(rng);
  const auto pts = random_points(rng, 6);
  CHECK(testing::relative_frobenius(estimate_dlt(project_all(h, pts)), h) < 1e-6);

  CHECK_THROWS_AS(estimate_dlt(project_all(h, std::vector<Point2>{{0, 0}, {1, 0}, {0, 1}})), InputError);
  const std::vector<Point2> line{{0, 0}, {1, 1}, {2, 2}, {3, 3}, {4, 4}};
  CHECK_THROWS_AS(estimate_dlt(project_all(Homography::identity(), line)), DegenerateError);
}

TEST_CASE("property: DLT is exact on noiseless inputs of any size") {
  CounterRng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const Homography h = testing::random_homography(rng);
    const int n = 4 + static_cast<int>(rng.below(60));
    const auto pts = random_points(rng, n);
    const auto pairs = project_all(h, pts);
    const Homography e = estimate_dlt(pairs);
    CHECK(testing::relative_frobenius(e, h) < 1e-6);
    for (const auto& c : pairs) CHECK(distance(project_point(e, c.src), c.dst) < 1e-6);
  }
}

TEST_CASE("RANSAC examples") {
  CounterRng rng(21);
  const Homography h = testing::random_homography(rng);
  const auto pairs = project_all(h, random_points(rng, 20));
  const auto est = ransac(pairs, {});
  REQUIRE(est.success);
  CHECK(est.inlier_count() == 20);
  CHECK(testing::relative_frobenius(est.homography, h) < 1e-6);

  CHECK_THROWS_AS(ransac(std::span(pairs).first(3), {}), InputError);
  CHECK_THROWS_AS(degensac(std::span(pairs).first(3), {}), InputError);

  const auto c = contaminated(rng, 50, 50, 0.0);
  RobustConfig cfg;
  cfg.seed = 5;
  const auto r = ransac(c.pairs, cfg);
  int tp = 0;
  for (int i = 0; i < 50; ++i) tp += r.inlier_mask[i];
  CHECK(tp / 50.0 >= 0.95);
}

TEST_CASE("property: RANSAC determinism and mask consistency") {
  CounterRng rng(33);
  for (int trial = 0; trial < 30; ++trial) {
    const auto c = contaminated(rng, 60, 40, 1.0);
    RobustConfig cfg;
    cfg.seed = rng.next_u64();
    using Fn = RobustEstimate (*)(std::span<const Correspondence>, const RobustConfig&);
    for (Fn fn : {static_cast<Fn>(&ransac), static_cast<Fn>(&degensac)}) {
      const auto a = fn(c.pairs, cfg);
      const auto b = fn(c.pairs, cfg);
      CHECK(a.inlier_mask == b.inlier_mask);
      CHECK(a.homography == b.homography);
      REQUIRE(a.inlier_mask.size() == c.pairs.size());
      if (!a.success) continue;
      CHECK(a.inlier_count() >= 4);
      for (std::size_t i = 0; i < c.pairs.size(); ++i)
        if (a.inlier_mask[i]) CHECK(reprojection_error_sq(a.homography, c.pairs[i]) < cfg.reproj_tol * cfg.reproj_tol);
    }
  }
}

TEST_CASE("collinear samples") {
  CHECK(triangle_area({0, 0}, {1, 1}, {2, 2}) == 0.0);
  CHECK(triangle_area({0, 0}, {4, 0}, {0, 3}) == doctest::Approx(6.0));
  // Five points, four on one line: every 4-sample holds three collinear
  // points, so degensac finds no model while plain RANSAC may try.
  const std::vector<Correspondence> pairs{{{0, 0}, {0, 0}}, {{10, 10}, {10, 10}}, {{20, 20}, {20, 20}},
                                          {{30, 30}, {30, 30}}, {{5, 40}, {5, 40}}};
  RobustConfig cfg;
  cfg.max_iter = 50;
  const auto d = degensac(pairs, cfg);
  CHECK(!d.success);
  CHECK(d.iterations_used == 50);
}

TEST_CASE("degensac equals ransac on all-inlier input") {
  CounterRng rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const Homography h = testing::random_homography(rng);
    const auto pairs = project_all(h, random_points(rng, 40));
    RobustConfig cfg;
    cfg.seed = trial;
    const auto a = ransac(pairs, cfg), b = degensac(pairs, cfg);
    CHECK((a.homography.matrix() - b.homography.matrix()).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("property: degensac never has fewer inliers than ransac") {
  CounterRng rng(100);
  double mean_r = 0, mean_d = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = contaminated(rng, 60, 40, 1.0);
    RobustConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(trial);
    const auto r = ransac(c.pairs, cfg), d = degensac(c.pairs, cfg);
    CHECK(d.inlier_count() >= r.inlier_count());
    mean_r += inlier_rate(r);
    mean_d += inlier_rate(d);
  }
  CHECK(mean_d >= mean_r);
}

TEST_CASE("inlier rate and iteration bound") {
  RobustEstimate e;
  e.inlier_mask = {true, true, false, true};
  CHECK(inlier_rate(e) == 0.75);
  e.inlier_mask = {false, false};
  CHECK(inlier_rate(e) == 0.0);
  e.inlier_mask = {};
  CHECK(inlier_rate(e) == 0.0);

  CHECK(adaptive_iterations(1.0, 0.995, 2000) <= 1);
  CHECK(adaptive_iterations(0.0, 0.995, 2000) == 2000);
  const double w = 0.5;
  const int expected = static_cast<int>(std::ceil(std::log(1 - 0.995) / std::log(1 - std::pow(w, 4))));
  CHECK(adaptive_iterations(w, 0.995, 2000) == expected);
}
