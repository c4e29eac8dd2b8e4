#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "lacmatch/features.hpp"
#include "lacmatch/image.hpp"

namespace lacmatch {

/// Thresholded box-difference weak learner. Offsets are relative to the
/// patch centre, in pixels, before rotation by the keypoint angle.
struct BeblidWeakLearner {
  std::int16_t p1x = 0, p1y = 0;
  std::int16_t p2x = 0, p2y = 0;
  std::uint16_t box = 1;
  float threshold = 0.0f;
  float alpha = 1.0f;

  friend bool operator==(const BeblidWeakLearner&, const BeblidWeakLearner&) = default;
};

struct BeblidModel {
  int patch_side = 32;
  double gamma = 1.0;  // training-time only; not serialized
  std::vector<BeblidWeakLearner> learners;

  int bits() const { return static_cast<int>(learners.size()); }
};

/// Mean of box(p1) minus mean of box(p2); offsets rotated by kp.angle and
/// rounded to the pixel grid. Throws BoundaryError on out-of-image boxes.
double beblid_feature(const IntegralImage& ii, const Keypoint& kp, const BeblidWeakLearner& wl);

/// +1 iff f <= T, else -1.
inline int beblid_response(double f, double threshold) { return f <= threshold ? 1 : -1; }

/// Bit k is set iff learner k responds +1.
BinaryDescriptor compute_beblid(const IntegralImage& ii, const Keypoint& kp,
                                const BeblidModel& model);
DescriptorSet compute_beblid_all(const IntegralImage& ii, std::span<const Keypoint> kps,
                                 const BeblidModel& model);

struct PatchPairSample {
  GrayImage x;
  GrayImage y;
  int label = 1;  // +1 same structure, -1 different
};

/// Box-pair geometry from the candidate pool (no threshold yet).
struct BoxPairCandidate {
  std::int16_t p1x, p1y, p2x, p2y;
  std::uint16_t box;
};

/// All box pairs with centres on a stride grid such that both boxes lie
/// inside a patch of side `patch_side`, for each box size in `sizes`.
std::vector<BoxPairCandidate> beblid_candidate_grid(int patch_side = 32, int stride = 2,
                                                    std::span<const int> sizes = {});

struct BeblidTrainOptions {
  int rounds = 256;                 // K
  double gamma = 1.0;               // learning rate in the exponential loss
  int candidate_budget = 2000;  // seeded random subset of the pool to train on; 0 = whole pool
  int threshold_quantiles = 16;     // clamped to [1, 255]
  std::uint64_t seed = 0;
};

struct BeblidTrainReport {
  BeblidModel model;
  double initial_loss = 0.0;
  std::vector<double> loss_per_round;  // loss after each boosting round
  double common_alpha = 0.0;           // single shared weight fitted after boosting
  double common_alpha_loss = 0.0;
};

/// Greedy AdaBoost over the exponential similarity loss
///   L = sum_i exp(-gamma * l_i * sum_k alpha_k h_k(x_i) h_k(y_i))
/// with the per-pair normaliser fixed to 1. Throws InputError on empty or
/// single-class data, an empty pool, or rounds < 1.
BeblidTrainReport train_beblid(std::span<const PatchPairSample> samples,
                               std::span<const BoxPairCandidate> pool,
                               const BeblidTrainOptions& options);

/// Loss of `model` (per-learner alphas) on `samples`.
double beblid_loss(std::span<const PatchPairSample> samples, const BeblidModel& model,
                   double gamma);

/// "LACB" little-endian binary format, version 1.
void save_beblid_model(const std::filesystem::path& path, const BeblidModel& model);
BeblidModel load_beblid_model(const std::filesystem::path& path);

/// Descriptor of a canonical (already oriented) patch, centre at side/2.
BinaryDescriptor describe_patch(const GrayImage& patch, const BeblidModel& model);

}  // namespace lacmatch
