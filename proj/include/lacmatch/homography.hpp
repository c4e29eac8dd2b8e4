#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <vector>

#include "lacmatch/features.hpp"
#include "lacmatch/image.hpp"
#include "lacmatch/matching.hpp"

namespace lacmatch {

/// 3x3 projective transform (template -> frame by convention).
/// Stored normalised: h22 = 1 when non-zero, otherwise unit Frobenius norm.
class Homography {
 public:
  Homography() : m_(Eigen::Matrix3d::Identity()) {}
  explicit Homography(const Eigen::Matrix3d& m);

  static Homography identity() { return {}; }
  static Homography translation(double tx, double ty);

  const Eigen::Matrix3d& matrix() const { return m_; }
  double operator()(int r, int c) const { return m_(r, c); }

  Homography inverse() const;
  Homography operator*(const Homography& rhs) const { return Homography(m_ * rhs.m_); }

  friend bool operator==(const Homography&, const Homography&) = default;

 private:
  Eigen::Matrix3d m_;
};

/// Throws PointAtInfinityError when |w| < 1e-12.
Point2 project_point(const Homography& h, Point2 p);

struct Correspondence {
  Point2 src;  // template
  Point2 dst;  // frame
};

/// Hartley-normalised DLT. Throws InputError for fewer than 4 pairs and
/// DegenerateError when the design matrix has rank < 8.
Homography estimate_dlt(std::span<const Correspondence> pairs);

/// Squared reprojection error |H src - dst|^2 (infinity for points at infinity).
double reprojection_error_sq(const Homography& h, const Correspondence& c);

struct RobustConfig {
  double reproj_tol = 3.0;
  int max_iter = 2000;
  double confidence = 0.995;
  std::uint64_t seed = 0;
};

struct RobustEstimate {
  Homography homography;
  std::vector<bool> inlier_mask;
  int iterations_used = 0;
  bool success = false;

  int inlier_count() const;
};

/// Plain RANSAC: best minimal-sample consensus, then a DLT re-fit on its
/// inliers. The returned mask is that consensus restricted to matches still
/// within tolerance of the re-fitted model. Throws InputError for < 4 pairs.
RobustEstimate ransac(std::span<const Correspondence> pairs, const RobustConfig& cfg);

/// RANSAC with collinear-sample rejection (any 3 of the 4 points spanning
/// a triangle of area < 1 px^2 on either side) and a local optimisation
/// (iterated DLT on inliers at tol x {2, 1.5, 1}) whenever a new best
/// consensus appears. Same sample stream as ransac() for a given seed.
RobustEstimate degensac(std::span<const Correspondence> pairs, const RobustConfig& cfg);

std::vector<Correspondence> correspondences(std::span<const MatchPair> matches,
                                            std::span<const Keypoint> frame_kps,
                                            std::span<const Keypoint> template_kps);

RobustEstimate ransac(std::span<const MatchPair> matches, std::span<const Keypoint> frame_kps,
                      std::span<const Keypoint> template_kps, const RobustConfig& cfg);
RobustEstimate degensac(std::span<const MatchPair> matches, std::span<const Keypoint> frame_kps,
                        std::span<const Keypoint> template_kps, const RobustConfig& cfg);

/// popcount(mask) / len(mask); 0 for an empty mask.
double inlier_rate(const RobustEstimate& est);

/// Adaptive RANSAC bound log(1 - confidence) / log(1 - w^4).
int adaptive_iterations(double inlier_ratio, double confidence, int max_iter);

double triangle_area(Point2 a, Point2 b, Point2 c);

}  // namespace lacmatch
