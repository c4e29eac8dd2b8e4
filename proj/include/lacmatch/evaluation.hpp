#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lacmatch/beblid.hpp"
#include "lacmatch/homography.hpp"
#include "lacmatch/lac.hpp"

namespace lacmatch {

// ---------------------------------------------------------------------------
// Synthetic scenes

/// Procedural "workshop" panorama: layered value noise, opaque textured
/// boxes, discs and bars. Pure function of (size, seed).
GrayImage synthetic_panorama(Size2 size, std::uint64_t seed);

/// Labels in `groups` Gaussian clusters (sigma px) around random centres,
/// kept `margin` px inside the panorama.
std::vector<Label> synthetic_labels(Size2 panorama, int count, int groups, double sigma,
                                    double margin, std::uint64_t seed);

/// Labels clustered around the cells of a cols x rows grid (centres
/// jittered by up to a tenth of a cell), `per_group` labels each.
std::vector<Label> grid_labels(Size2 panorama, int cols, int rows, int per_group, double sigma,
                               std::uint64_t seed);

/// Camera view: frame centre in panorama pixels, in-plane rotation,
/// panorama pixels per frame pixel and two perspective terms (1/px).
struct ViewPose {
  double cx = 0.0;
  double cy = 0.0;
  double angle = 0.0;
  double scale = 1.0;
  double tilt_x = 0.0;
  double tilt_y = 0.0;
};

/// Frame -> panorama mapping of a view.
Homography view_to_panorama(const ViewPose& pose, Size2 frame);

struct MotionSegment {
  ViewPose target;
  int transition_frames = 0;  // linear interpolation from the previous pose
  int dwell_frames = 0;       // frames held at the target
};

struct MotionScript {
  Size2 frame_size{640, 480};
  ViewPose start;
  int start_frames = 1;
  std::vector<MotionSegment> segments;
  double shake_sigma = 0.0;  // per-frame Gaussian jitter of the view centre, px

  /// Poses per frame (without shake).
  std::vector<ViewPose> poses() const;
};

struct NoiseConfig {
  double pixel_sigma = 0.0;          // additive Gaussian intensity noise
  double gain_jitter = 0.0;          // per-frame gain uniform in [1 - g, 1 + g]
  double retexture_fraction = 0.0;   // share of the frame covered by foreign texture
  int retexture_patch = 48;          // side of each re-textured square
};

struct SyntheticSequence {
  Size2 frame_size;
  std::vector<Homography> truth;  // panorama -> frame
  std::vector<GrayImage> frames;
  NoiseConfig noise;
  std::uint64_t seed = 0;
};

/// Inverse-warps the panorama with bilinear sampling and edge clamping.
GrayImage render_view(const GrayImage& panorama, const Homography& frame_to_panorama, Size2 frame);

/// Applies contamination in place: re-textured squares, gain, noise.
void apply_noise(GrayImage& frame, const NoiseConfig& noise, std::uint64_t seed);

/// Throws InputError naming the frame index if a view leaves the panorama.
SyntheticSequence generate_sequence(const GrayImage& panorama, const MotionScript& script,
                                    const NoiseConfig& noise, std::uint64_t seed);

// ---------------------------------------------------------------------------
// BEBLID training data

/// Matching pairs are the oriented patch around a panorama corner and the
/// patch at its image under a random mild warp (with noise); non-matching
/// pairs combine patches of different corners, or of the same corner
/// displaced by 3-6 px. Balanced labels. Patches carry the extractor's
/// BEBLID pre-smoothing.
std::vector<PatchPairSample> generate_patch_pairs(const GrayImage& image, int count,
                                                  std::uint64_t seed, int patch_side = 32);

/// Patch pairs from a fresh, lightly smoothed synthetic panorama; both
/// derive from `seed`.
std::vector<PatchPairSample> synthetic_patch_pairs(int count, std::uint64_t seed);
/// Default model: trained on synthetic_patch_pairs(pairs, options.seed)
/// over the full candidate grid.
BeblidTrainReport train_synthetic_beblid(int pairs, const BeblidTrainOptions& options);
/// Oriented, bilinearly resampled patch of side `side` centred at `center`.
GrayImage extract_patch(const GrayImage& img, Point2 center, double angle, int side);

/// ROC AUC of similarity = -Hamming distance for separating labels.
double patch_verification_auc(std::span<const PatchPairSample> samples, const BeblidModel& model);
/// Same statistic for uniformly random descriptors of `bits` bits.
double random_bit_auc(std::span<const PatchPairSample> samples, int bits, std::uint64_t seed);
double roc_auc(std::span<const double> scores, std::span<const int> labels);

// ---------------------------------------------------------------------------
// Match quality against ground truth

/// Fraction of matches whose template keypoint lands within `tol` px of the
/// frame keypoint under `truth` (template -> frame).
double match_precision(std::span<const MatchPair> matches, std::span<const Keypoint> frame_kps,
                       std::span<const Keypoint> template_kps, const Homography& truth,
                       double tol = 3.0);
std::vector<bool> match_correctness(std::span<const MatchPair> matches,
                                    std::span<const Keypoint> frame_kps,
                                    std::span<const Keypoint> template_kps,
                                    const Homography& truth, double tol = 3.0);

// ---------------------------------------------------------------------------
// Inlier-rate benchmark

enum class Variant { kBriefRansac, kBriefGmsRansac, kBeblidGmsRansac, kBeblidGmsDegensac };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);
std::vector<Variant> all_variants();

/// A reference image (the template) and frames with ground truth.
struct BenchmarkScene {
  GrayImage reference;
  std::vector<GrayImage> frames;
  std::vector<Homography> truth;  // reference -> frame
};

struct BenchmarkConfig {
  FeatureConfig features;  // descriptor field is overridden per variant
  MatchConfig matching;
  RobustConfig homography;
  std::shared_ptr<const BeblidModel> beblid;
  int reps = 10;
  bool record_timing = true;
};

struct FrameStats {
  double inlier_rate = 0.0;
  double ms = 0.0;
  bool failed = false;
  int raw_matches = 0;
  int kept_matches = 0;
  double raw_precision = 0.0;
  double kept_precision = 0.0;  // GMS variants only
};

struct BenchRow {
  Variant variant{};
  int rep = 0;
  double mean_inlier_rate = 0.0;
  double ms_per_frame = 0.0;
  int failed_frames = 0;
  bool failed = false;  // every frame failed
  std::vector<FrameStats> frames;
};

struct BenchSummary {
  Variant variant{};
  double mean_inlier_rate = 0.0;
  double mean_ms = 0.0;
  double median_ms = 0.0;
  int failed_reps = 0;
};

/// Runs each variant over `reps` scenes (scene_for_rep(r)); the estimator
/// seed of rep r is derived from cfg.homography.seed and r.
std::vector<BenchRow> benchmark_inlier_rates(const std::function<BenchmarkScene(int)>& scene_for_rep,
                                             std::span<const Variant> variants,
                                             const BenchmarkConfig& cfg);

std::vector<BenchSummary> summarize(std::span<const BenchRow> rows);

/// variant,rep,mean_inlier_rate,ms_per_frame (6 decimals).
std::string rates_csv(std::span<const BenchRow> rows);
/// Aligned text table with mean inlier rate, mean and median ms.
std::string rates_table(std::span<const BenchSummary> summary);

// ---------------------------------------------------------------------------
// Drift

struct DisplacementSample {
  int frame = 0;
  int label_id = 0;
  double euclidean_px = 0.0;
};

struct DriftReport {
  int frame_count = 0;
  std::vector<int> label_ids;
  /// Per label, one entry per frame: label_x / frame_width * 100 when the
  /// label is reported inside the frame, nullopt otherwise.
  std::map<int, std::vector<std::optional<double>>> relative_x;
  std::map<int, double> variance;  // over non-stale entries
  std::vector<DisplacementSample> displacements;
  double total_variance = 0.0;
  double mean_displacement = 0.0;
};

/// Throws InputError with fewer than two ok frames.
DriftReport drift_metrics(std::span<const FrameResult> results, Size2 frame_dims);

/// Paired LAC-on / LAC-off measurement.
struct DriftComparison {
  DriftReport on;
  DriftReport off;
  std::vector<int> shared_labels;

  double variance_delta() const { return on.total_variance - off.total_variance; }
  double displacement_delta() const { return on.mean_displacement - off.mean_displacement; }
};

/// Restricts both runs to the (frame, label) entries that each reports
/// non-stale and inside the frame, then measures both. The runs must cover
/// the same frames.
DriftComparison compare_drift(std::span<const FrameResult> on, std::span<const FrameResult> off,
                              Size2 frame_dims);

/// frame,label_id,rel_x_times_100,x,y,stale for labels inside the frame.
std::string trace_csv(std::span<const FrameResult> results, Size2 frame_dims);
/// frame,label_id,euclidean_px
std::string displacement_csv(const DriftReport& report);

// ---------------------------------------------------------------------------
// Standard fixtures

/// Reference + frames for the inlier-rate benchmark: partial-overlap views
/// with mild perspective, 30% of the area re-textured, sigma 5 noise, +-10% gain.
BenchmarkScene contaminated_scene(std::uint64_t seed, Size2 frame = {960, 540}, int frames = 4);

struct TrackingFixture {
  GrayImage panorama;
  std::vector<Label> labels;
  MotionScript script;
  NoiseConfig noise;
  std::uint64_t seed = 0;
};

/// Slow pan across labelled regions with dwells, sensor noise, gain flicker
/// and per-frame shake.
TrackingFixture jittered_pan_fixture(std::uint64_t seed);
/// Camera visits label-dense regions and dwells there.
TrackingFixture dwell_fixture(std::uint64_t seed);
/// Camera does not move.
TrackingFixture stationary_fixture(std::uint64_t seed);

}  // namespace lacmatch
