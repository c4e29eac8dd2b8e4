#include <doctest.h>

#include <json.hpp>
#include <numbers>

#include "lacmatch/errors.hpp"
#include "lacmatch/topology.hpp"
#include "support.hpp"

using namespace lacmatch;

namespace {

std::vector<Label> label_set() {
  return {{1, "pump", {100, 100}}, {2, "valve", {260, 130}}, {3, "gauge", {180, 300}},
          {4, "motor", {40, 220}},  {5, "tank", {330, 260}},  {6, "fan", {220, 40}}};
}

// Labels under a similarity: scale s, rotation phi, then shift.
LabelPositions similar(std::span<const Label> labels, double s, double phi, Point2 shift) {
  LabelPositions out;
  for (const auto& l : labels) {
    const Point2 p = l.position;
    out[l.id] = Point2{s * (std::cos(phi) * p.x - std::sin(phi) * p.y),
                       s * (std::sin(phi) * p.x + std::cos(phi) * p.y)} + shift;
  }
  return out;
}

std::map<int, double> uniform_support(const LabelPositions& p) {
  std::map<int, double> s;
  for (const auto& [id, q] : p) s[id] = 1.0;
  return s;
}

double max_gap(const LabelPositions& a, const LabelPositions& b) {
  double m = 0;
  for (const auto& [id, p] : a) m = std::max(m, distance(p, b.at(id)));
  return m;
}

}  // namespace

TEST_CASE("build_topology examples") {
  const std::vector<Label> two{{1, "a", {0, 0}}, {2, "b", {3, 4}}};
  const auto t = build_topology(two);
  const auto r = t.relation(1, 2);
  REQUIRE(r);
  CHECK(r->distance == 5.0);
  CHECK(r->angle == doctest::Approx(std::atan2(4.0, 3.0)));
  CHECK(t.pair_count() == 2);
  CHECK(!t.relation(1, 9));

  const std::vector<Label> one{{1, "a", {5, 5}}};
  CHECK(build_topology(one).pair_count() == 0);
  CHECK(build_topology(one).relation(1, 1)->distance == 0.0);

  auto moved = label_set();
  for (auto& l : moved) l.position = l.position + Point2{10, 10};
  const auto a = build_topology(label_set()), b = build_topology(moved);
  CHECK(a.to_json() == b.to_json());
}

TEST_CASE("topology invariants") {
  const auto t = build_topology(label_set());
  CHECK(t.pair_count() == 30);
  for (int i : t.ids())
    for (int j : t.ids()) {
      const auto ij = *t.relation(i, j), ji = *t.relation(j, i);
      CHECK(ij.distance == doctest::Approx(ji.distance));
      CHECK(ij.angle >= 0);
      CHECK(ij.angle < 2 * std::numbers::pi);
      if (i == j) {
        CHECK(ij.distance == 0.0);
        continue;
      }
      CHECK(std::fmod(ij.angle + std::numbers::pi, 2 * std::numbers::pi) == doctest::Approx(ji.angle));
    }
}

TEST_CASE("topology JSON has six decimals") {
  const std::vector<Label> two{{1, "a", {0, 0}}, {2, "b", {1, 1}}};
  const auto text = build_topology(two).to_json();
  const auto j = nlohmann::json::parse(text);
  CHECK(j["pairs"].size() == 2);
  CHECK(text.find("1.414214") != std::string::npos);
  CHECK(text.find("0.785398") != std::string::npos);
}

TEST_CASE("refinement examples") {
  const auto labels = label_set();
  const auto topo = build_topology(labels);
  const auto consistent = similar(labels, 0.8, 0.3, {50, -20});
  for (double lambda : {0.0, 0.3, 1.0})
    CHECK(max_gap(refine_labels_polar(consistent, topo, uniform_support(consistent), lambda), consistent) < 1e-9);

  auto perturbed = consistent;
  perturbed[3] = perturbed[3] + Point2{20, 0};
  auto support = uniform_support(perturbed);
  support[3] = 0.0;
  const auto fixed = refine_labels_polar(perturbed, topo, support, 1.0);
  CHECK(distance(fixed.at(3), consistent.at(3)) < 1.0);
  CHECK(fixed.at(1) == perturbed.at(1));  // anchor: highest support, lowest id

  CHECK(refine_labels_polar(perturbed, topo, support, 0.0) == perturbed);

  const LabelPositions single{{2, {7, 8}}};
  CHECK(refine_labels_polar(single, topo, {}, 1.0) == single);

  CHECK_THROWS_AS(refine_labels_polar(perturbed, topo, support, 1.5), InputError);
  CHECK_THROWS_AS(refine_labels_polar(perturbed, topo, support, -0.1), InputError);
}

TEST_CASE("property: refinement is idempotent at lambda 1 and stays finite") {
  const auto labels = label_set();
  const auto topo = build_topology(labels);
  CounterRng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    auto p = similar(labels, rng.uniform(0.5, 2.0), rng.uniform(0, 6.28), {rng.uniform(-99, 99), rng.uniform(-99, 99)});
    for (auto& [id, q] : p) q = q + Point2{rng.normal(0, 3), rng.normal(0, 3)};
    std::map<int, double> support;
    for (const auto& [id, q] : p) support[id] = static_cast<double>(rng.below(20));
    const auto once = refine_labels_polar(p, topo, support, 1.0);
    const auto twice = refine_labels_polar(once, topo, support, 1.0);
    CHECK(max_gap(once, twice) < 1e-9);
    for (const auto& [id, q] : refine_labels_polar(p, topo, support, 0.5)) CHECK(is_finite(q));
  }
}

TEST_CASE("property: refinement lowers frame-to-frame displacement under label jitter") {
  const auto labels = label_set();
  const auto topo = build_topology(labels);
  CounterRng rng(8);
  double raw = 0, refined = 0;
  int pairs = 0;
  LabelPositions prev_raw, prev_ref;
  for (int f = 0; f < 200; ++f) {
    auto p = similar(labels, 1.0, 0.0, {-3.0 * f, 0.5 * f});
    const int victim = labels[rng.below(labels.size())].id;
    p[victim] = p[victim] + Point2{rng.normal(0, 4), rng.normal(0, 4)};
    const auto r = refine_labels_polar(p, topo, uniform_support(p), 0.5);
    if (f > 0) {
      for (const auto& [id, q] : p) {
        raw += distance(q, prev_raw.at(id));
        refined += distance(r.at(id), prev_ref.at(id));
        ++pairs;
      }
    }
    prev_raw = p;
    prev_ref = r;
  }
  MESSAGE("mean displacement raw " << raw / pairs << " refined " << refined / pairs);
  CHECK(refined < raw);
}

TEST_CASE("label support counts inliers within the radius") {
  const LabelPositions p{{1, {0, 0}}, {2, {100, 0}}};
  const std::vector<Point2> pts{{10, 0}, {49, 0}, {51, 0}, {100, 30}, {300, 300}};
  const auto s = label_support(p, pts, 50.0);
  CHECK(s.at(1) == 2.0);
  CHECK(s.at(2) == 2.0);
}
