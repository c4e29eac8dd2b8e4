#include "lacmatch/topology.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <vector>

#include "lacmatch/errors.hpp"

namespace lacmatch {

namespace {

double wrap_angle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  a = std::fmod(a, kTwoPi);
  if (a < 0) a += kTwoPi;
  if (a >= kTwoPi) a = 0.0;
  return a;
}

std::complex<double> as_complex(Point2 p) { return {p.x, p.y}; }

constexpr int kRefitIterations = 10;
constexpr double kCauchyScale = 2.385;
constexpr double kMinResidualScale = 0.01;  // px

}  // namespace

LabelTopology::LabelTopology(std::span<const Label> labels) {
  for (const auto& a : labels) {
    ids_.push_back(a.id);
    for (const auto& b : labels) {
      if (a.id == b.id) continue;
      const double dx = b.position.x - a.position.x;
      const double dy = b.position.y - a.position.y;
      relations_[{a.id, b.id}] = {std::hypot(dx, dy), wrap_angle(std::atan2(dy, dx))};
    }
  }
}

std::optional<PolarRelation> LabelTopology::relation(int from, int to) const {
  if (from == to) {
    for (int id : ids_)
      if (id == from) return PolarRelation{};
    return std::nullopt;
  }
  const auto it = relations_.find({from, to});
  if (it == relations_.end()) return std::nullopt;
  return it->second;
}

std::string LabelTopology::to_json() const {
  std::string out = "{\n  \"pairs\": [";
  bool first = true;
  char buf[160];
  for (const auto& [key, rel] : relations_) {
    std::snprintf(buf, sizeof buf,
                  "%s\n    {\"from\": %d, \"to\": %d, \"distance\": %.6f, \"angle\": %.6f}",
                  first ? "" : ",", key.first, key.second, rel.distance, rel.angle);
    out += buf;
    first = false;
  }
  out += first ? "]\n}\n" : "\n  ]\n}\n";
  return out;
}

LabelTopology build_topology(std::span<const Label> labels) { return LabelTopology(labels); }

LabelPositions refine_labels_polar(const LabelPositions& projected, const LabelTopology& topology,
                                   const std::map<int, double>& support, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InputError("polar blend lambda must be in [0, 1]");
  if (projected.size() < 2 || lambda == 0.0) return projected;

  // Similarity as one complex factor z = s * e^{i phi}: v_ij ~ z * u_ij,
  // fitted by iteratively reweighted least squares (Cauchy weights) so a
  // single displaced label does not bend the fit.
  std::vector<std::complex<double>> us, vs;
  for (auto a = projected.begin(); a != projected.end(); ++a) {
    for (auto b = std::next(a); b != projected.end(); ++b) {
      const auto rel = topology.relation(a->first, b->first);
      if (!rel || rel->distance <= 0.0) continue;
      us.push_back(std::polar(rel->distance, rel->angle));
      vs.push_back(as_complex(b->second) - as_complex(a->second));
    }
  }
  if (us.empty()) return projected;
  std::vector<double> w(us.size(), 1.0), residual(us.size());
  std::complex<double> z{1.0, 0.0};
  for (int iter = 0; iter < kRefitIterations; ++iter) {
    std::complex<double> num{0.0, 0.0};
    double den = 0.0;
    for (std::size_t i = 0; i < us.size(); ++i) {
      num += w[i] * std::conj(us[i]) * vs[i];
      den += w[i] * std::norm(us[i]);
    }
    if (den <= 0.0) break;
    z = num / den;
    for (std::size_t i = 0; i < us.size(); ++i) residual[i] = std::abs(vs[i] - z * us[i]);
    std::vector<double> sorted = residual;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const double c = std::max(kCauchyScale * 1.4826 * sorted[sorted.size() / 2], kMinResidualScale);
    for (std::size_t i = 0; i < us.size(); ++i) w[i] = 1.0 / (1.0 + (residual[i] / c) * (residual[i] / c));
  }

  int anchor = projected.begin()->first;
  double best = -1.0;
  for (const auto& [id, pos] : projected) {
    const auto it = support.find(id);
    const double s = it == support.end() ? 0.0 : it->second;
    if (s > best) {  // map order makes the first maximum the lowest id
      best = s;
      anchor = id;
    }
  }

  const Point2 anchor_pos = projected.at(anchor);
  LabelPositions out;
  for (const auto& [id, pos] : projected) {
    const auto rel = topology.relation(anchor, id);
    if (id == anchor || !rel) {
      out[id] = pos;
      continue;
    }
    const std::complex<double> pred = as_complex(anchor_pos) + z * std::polar(rel->distance, rel->angle);
    out[id] = {(1.0 - lambda) * pos.x + lambda * pred.real(),
               (1.0 - lambda) * pos.y + lambda * pred.imag()};
  }
  return out;
}

std::map<int, double> label_support(const LabelPositions& projected,
                                    std::span<const Point2> inlier_points, double radius) {
  std::map<int, double> support;
  const double r2 = radius * radius;
  for (const auto& [id, pos] : projected) {
    int count = 0;
    for (const auto& p : inlier_points) {
      const double dx = p.x - pos.x;
      const double dy = p.y - pos.y;
      count += dx * dx + dy * dy <= r2;
    }
    support[id] = count;
  }
  return support;
}

}  // namespace lacmatch
