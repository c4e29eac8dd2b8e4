#include "lacmatch/homography.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "lacmatch/errors.hpp"
#include "lacmatch/rng.hpp"

namespace lacmatch {

namespace {

Eigen::Matrix3d normalise(const Eigen::Matrix3d& m) {
  if (std::abs(m(2, 2)) > 1e-12) return m / m(2, 2);
  const double norm = m.norm();
  return norm > 0 ? Eigen::Matrix3d(m / norm) : m;
}

// Similarity moving the centroid to the origin with mean distance sqrt(2).
Eigen::Matrix3d hartley(std::span<const Point2> pts) {
  double cx = 0, cy = 0;
  for (const auto& p : pts) {
    cx += p.x;
    cy += p.y;
  }
  cx /= static_cast<double>(pts.size());
  cy /= static_cast<double>(pts.size());
  double mean = 0;
  for (const auto& p : pts) mean += std::hypot(p.x - cx, p.y - cy);
  mean /= static_cast<double>(pts.size());
  const double s = mean > 1e-15 ? std::sqrt(2.0) / mean : 1.0;
  Eigen::Matrix3d t;
  t << s, 0, -s * cx, 0, s, -s * cy, 0, 0, 1;
  return t;
}

bool sample_is_degenerate(std::span<const Correspondence> pairs, const std::array<std::size_t, 4>& idx) {
  constexpr double kMinArea = 1.0;
  static constexpr int kTriples[4][3] = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};
  for (const auto& t : kTriples) {
    const auto& a = pairs[idx[static_cast<std::size_t>(t[0])]];
    const auto& b = pairs[idx[static_cast<std::size_t>(t[1])]];
    const auto& c = pairs[idx[static_cast<std::size_t>(t[2])]];
    if (triangle_area(a.src, b.src, c.src) < kMinArea) return true;
    if (triangle_area(a.dst, b.dst, c.dst) < kMinArea) return true;
  }
  return false;
}

// Four distinct indices drawn from the stream for iteration `it`.
std::array<std::size_t, 4> draw_sample(std::uint64_t seed, int it, std::size_t n) {
  CounterRng rng(derive_seed(seed, static_cast<std::uint64_t>(it)));
  std::array<std::size_t, 4> idx{};
  for (int k = 0; k < 4; ++k) {
    bool fresh = false;
    while (!fresh) {
      idx[static_cast<std::size_t>(k)] = rng.below(n);
      fresh = true;
      for (int j = 0; j < k; ++j)
        if (idx[static_cast<std::size_t>(j)] == idx[static_cast<std::size_t>(k)]) fresh = false;
    }
  }
  return idx;
}

int count_inliers(const Homography& h, std::span<const Correspondence> pairs, double tol,
                  std::vector<bool>* mask) {
  const double tol2 = tol * tol;
  int count = 0;
  if (mask) mask->assign(pairs.size(), false);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (reprojection_error_sq(h, pairs[i]) < tol2) {
      ++count;
      if (mask) (*mask)[i] = true;
    }
  }
  return count;
}

std::vector<Correspondence> select(std::span<const Correspondence> pairs,
                                   const std::vector<bool>& mask) {
  std::vector<Correspondence> out;
  for (std::size_t i = 0; i < pairs.size(); ++i)
    if (mask[i]) out.push_back(pairs[i]);
  return out;
}

// Local optimisation: DLT re-fits on inliers at a shrinking tolerance.
// Returns the refined model and its inlier count at `tol`.
std::pair<Homography, int> local_optimise(const Homography& start,
                                          std::span<const Correspondence> pairs, double tol) {
  Homography h = start;
  std::vector<bool> mask;
  for (double factor : {2.0, 1.5, 1.0}) {
    if (count_inliers(h, pairs, tol * factor, &mask) < 4) break;
    const auto subset = select(pairs, mask);
    try {
      h = estimate_dlt(subset);
    } catch (const DegenerateError&) {
      break;
    }
  }
  return {h, count_inliers(h, pairs, tol, nullptr)};
}

enum class Flavor { kPlain, kDegenerateAware };

RobustEstimate robust_fit(std::span<const Correspondence> pairs, const RobustConfig& cfg,
                          Flavor flavor) {
  if (pairs.size() < 4) throw InputError("robust homography estimation needs >= 4 matches");
  const std::size_t n = pairs.size();
  RobustEstimate est;
  est.inlier_mask.assign(n, false);

  Homography best;
  int best_count = 0;
  int bound = cfg.max_iter;
  int it = 0;
  for (; it < cfg.max_iter && it < bound; ++it) {
    const auto idx = draw_sample(cfg.seed, it, n);
    if (flavor == Flavor::kDegenerateAware && sample_is_degenerate(pairs, idx)) continue;
    const std::array<Correspondence, 4> sample{pairs[idx[0]], pairs[idx[1]], pairs[idx[2]],
                                               pairs[idx[3]]};
    Homography h;
    try {
      h = estimate_dlt(sample);
    } catch (const DegenerateError&) {
      continue;
    }
    const int count = count_inliers(h, pairs, cfg.reproj_tol, nullptr);
    if (count <= best_count) continue;
    best = h;
    best_count = count;
    if (flavor == Flavor::kDegenerateAware && count >= 4) {
      auto [refined, refined_count] = local_optimise(h, pairs, cfg.reproj_tol);
      if (refined_count > best_count) {
        best = refined;
        best_count = refined_count;
      }
    }
    bound = adaptive_iterations(static_cast<double>(best_count) / static_cast<double>(n),
                                cfg.confidence, cfg.max_iter);
  }
  est.iterations_used = it;
  if (best_count < 4) return est;

  std::vector<bool> consensus;
  count_inliers(best, pairs, cfg.reproj_tol, &consensus);

  if (flavor == Flavor::kPlain) {
    Homography refit = best;
    try {
      refit = estimate_dlt(select(pairs, consensus));
    } catch (const DegenerateError&) {
    }
    std::vector<bool> after;
    count_inliers(refit, pairs, cfg.reproj_tol, &after);
    int kept = 0;
    for (std::size_t i = 0; i < n; ++i) {
      consensus[i] = consensus[i] && after[i];
      kept += consensus[i];
    }
    if (kept < 4) {
      // The re-fit lost the consensus; keep the sampled model.
      count_inliers(best, pairs, cfg.reproj_tol, &consensus);
      refit = best;
    }
    est.homography = refit;
    est.inlier_mask = std::move(consensus);
  } else {
    auto [refined, refined_count] = local_optimise(best, pairs, cfg.reproj_tol);
    if (refined_count >= best_count) best = refined;
    count_inliers(best, pairs, cfg.reproj_tol, &est.inlier_mask);
    est.homography = best;
  }
  est.success = est.inlier_count() >= 4;
  return est;
}

}  // namespace

Homography::Homography(const Eigen::Matrix3d& m) : m_(normalise(m)) {}

Homography Homography::translation(double tx, double ty) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m(0, 2) = tx;
  m(1, 2) = ty;
  return Homography(m);
}

Homography Homography::inverse() const {
  if (std::abs(m_.determinant()) < 1e-300) throw DegenerateError("singular homography");
  return Homography(Eigen::Matrix3d(m_.inverse()));
}

Point2 project_point(const Homography& h, Point2 p) {
  const auto& m = h.matrix();
  const double w = m(2, 0) * p.x + m(2, 1) * p.y + m(2, 2);
  if (std::abs(w) < 1e-12) throw PointAtInfinityError("point maps to infinity");
  return {(m(0, 0) * p.x + m(0, 1) * p.y + m(0, 2)) / w,
          (m(1, 0) * p.x + m(1, 1) * p.y + m(1, 2)) / w};
}

double reprojection_error_sq(const Homography& h, const Correspondence& c) {
  const auto& m = h.matrix();
  const double w = m(2, 0) * c.src.x + m(2, 1) * c.src.y + m(2, 2);
  if (std::abs(w) < 1e-12) return std::numeric_limits<double>::infinity();
  const double x = (m(0, 0) * c.src.x + m(0, 1) * c.src.y + m(0, 2)) / w;
  const double y = (m(1, 0) * c.src.x + m(1, 1) * c.src.y + m(1, 2)) / w;
  return (x - c.dst.x) * (x - c.dst.x) + (y - c.dst.y) * (y - c.dst.y);
}

Homography estimate_dlt(std::span<const Correspondence> pairs) {
  if (pairs.size() < 4) throw InputError("DLT needs at least 4 correspondences");
  const std::size_t n = pairs.size();
  std::vector<Point2> src(n), dst(n);
  for (std::size_t i = 0; i < n; ++i) {
    src[i] = pairs[i].src;
    dst[i] = pairs[i].dst;
  }
  const Eigen::Matrix3d ts = hartley(src);
  const Eigen::Matrix3d td = hartley(dst);

  Eigen::Matrix<double, Eigen::Dynamic, 9> a(static_cast<Eigen::Index>(2 * n), 9);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d s = ts * Eigen::Vector3d(src[i].x, src[i].y, 1.0);
    const Eigen::Vector3d d = td * Eigen::Vector3d(dst[i].x, dst[i].y, 1.0);
    const auto r = static_cast<Eigen::Index>(2 * i);
    a.row(r) << 0, 0, 0, -s.x(), -s.y(), -1, d.y() * s.x(), d.y() * s.y(), d.y();
    a.row(r + 1) << s.x(), s.y(), 1, 0, 0, 0, -d.x() * s.x(), -d.x() * s.y(), -d.x();
  }

  Eigen::Matrix<double, 9, 1> h;
  if (n == 4) {
    // Square up the 8x9 system so the SVD yields the full null space.
    Eigen::Matrix<double, 9, 9> sq = Eigen::Matrix<double, 9, 9>::Zero();
    sq.topRows<8>() = a;
    Eigen::JacobiSVD<Eigen::Matrix<double, 9, 9>> svd(sq, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (sv(7) <= 1e-10 * sv(0)) throw DegenerateError("degenerate point configuration");
    h = svd.matrixV().col(8);
  } else {
    Eigen::JacobiSVD<Eigen::Matrix<double, Eigen::Dynamic, 9>> svd(a, Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (sv(7) <= 1e-10 * sv(0)) throw DegenerateError("degenerate point configuration");
    h = svd.matrixV().col(8);
  }
  Eigen::Matrix3d hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  const Eigen::Matrix3d full = td.inverse() * hn * ts;
  const Homography out(full);
  if (std::abs(out.matrix().determinant()) < 1e-12)
    throw DegenerateError("estimated homography is singular");
  return out;
}

int RobustEstimate::inlier_count() const {
  return static_cast<int>(std::count(inlier_mask.begin(), inlier_mask.end(), true));
}

RobustEstimate ransac(std::span<const Correspondence> pairs, const RobustConfig& cfg) {
  return robust_fit(pairs, cfg, Flavor::kPlain);
}

RobustEstimate degensac(std::span<const Correspondence> pairs, const RobustConfig& cfg) {
  return robust_fit(pairs, cfg, Flavor::kDegenerateAware);
}

std::vector<Correspondence> correspondences(std::span<const MatchPair> matches,
                                            std::span<const Keypoint> frame_kps,
                                            std::span<const Keypoint> template_kps) {
  std::vector<Correspondence> out;
  out.reserve(matches.size());
  for (const auto& m : matches)
    out.push_back({template_kps[static_cast<std::size_t>(m.train_idx)].position,
                   frame_kps[static_cast<std::size_t>(m.query_idx)].position});
  return out;
}

RobustEstimate ransac(std::span<const MatchPair> matches, std::span<const Keypoint> frame_kps,
                      std::span<const Keypoint> template_kps, const RobustConfig& cfg) {
  const auto c = correspondences(matches, frame_kps, template_kps);
  return ransac(c, cfg);
}

RobustEstimate degensac(std::span<const MatchPair> matches, std::span<const Keypoint> frame_kps,
                        std::span<const Keypoint> template_kps, const RobustConfig& cfg) {
  const auto c = correspondences(matches, frame_kps, template_kps);
  return degensac(c, cfg);
}

double inlier_rate(const RobustEstimate& est) {
  if (est.inlier_mask.empty()) return 0.0;
  return static_cast<double>(est.inlier_count()) / static_cast<double>(est.inlier_mask.size());
}

int adaptive_iterations(double inlier_ratio, double confidence, int max_iter) {
  const double w4 = std::pow(std::clamp(inlier_ratio, 0.0, 1.0), 4);
  if (w4 >= 1.0 - 1e-15) return 1;
  if (w4 <= 0.0) return max_iter;
  const double num = std::log(1.0 - std::clamp(confidence, 0.0, 1.0 - 1e-15));
  const double den = std::log(1.0 - w4);
  const double n = std::ceil(num / den);
  return static_cast<int>(std::min<double>(n, max_iter));
}

double triangle_area(Point2 a, Point2 b, Point2 c) {
  return 0.5 * std::abs((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

}  // namespace lacmatch
