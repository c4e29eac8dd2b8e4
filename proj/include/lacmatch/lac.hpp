#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include "lacmatch/extractor.hpp"
#include "lacmatch/homography.hpp"
#include "lacmatch/labels.hpp"
#include "lacmatch/matching.hpp"
#include "lacmatch/topology.hpp"

namespace lacmatch {

// ---------------------------------------------------------------------------
// Clustering

struct KMeansResult {
  std::vector<Point2> centers;
  std::vector<int> assignment;
  /// Within-cluster sum of squares after every assignment step.
  std::vector<double> objective_history;
  int iterations = 0;

  double objective() const { return objective_history.empty() ? 0.0 : objective_history.back(); }
};

/// Lloyd iterations from k-means++ seeding. Empty clusters are re-seeded
/// with the point farthest from its own centre. Throws InputError when
/// k < 1 or k exceeds the number of distinct points.
KMeansResult kmeans(std::span<const Point2> points, int k, int max_iter, std::uint64_t seed);

/// Best objective over `restarts` runs; run 0 uses `seed`, run r uses
/// derive_seed(seed, r).
KMeansResult kmeans_restarts(std::span<const Point2> points, int k, int max_iter, int restarts,
                             std::uint64_t seed);

double kmeans_objective(std::span<const Point2> points, std::span<const Point2> centers,
                        std::span<const int> assignment);

/// Final objective for k = 1 .. min(k_max, distinct points).
std::vector<double> elbow_scan(std::span<const Point2> points, int k_max, int max_iter,
                               std::uint64_t seed);

// ---------------------------------------------------------------------------
// Templates

struct Template {
  int index = 0;
  Rect rect;
  Point2 center;               // cluster centroid, panorama pixels
  std::vector<int> label_ids;  // members
  FeatureSet features;         // coordinates relative to rect origin
};

/// Templates, the labels they carry and the label topology.
struct TemplateSet {
  Size2 panorama_size;
  std::vector<Label> labels;
  std::vector<Template> templates;
  LabelTopology topology;

  const Label& label(int id) const;
};

int default_cluster_count(std::size_t label_count);
/// panorama / ceil(sqrt(k)) per axis, at least 256 (capped by the panorama).
Size2 default_template_size(Size2 panorama, int k);

/// Rect of `size` centred on `center`, clamped to the panorama, then shifted
/// the least amount needed to contain every member. Throws InfeasibleError
/// (with `cluster_id`) when the members do not fit in `size`.
Rect place_template(Point2 center, Size2 size, Size2 panorama, std::span<const Point2> members,
                    int cluster_id);

struct SegmentConfig {
  int k = 0;                // 0 -> default_cluster_count
  Size2 template_size{};    // 0 -> default_template_size
  int max_iter = 100;
  int restarts = 8;
  std::uint64_t seed = 0;
};

std::vector<Template> segment_templates(const GrayImage& panorama, std::span<const Label> labels,
                                        const SegmentConfig& cfg, const FeatureConfig& features);

/// Clustered template set with topology.
TemplateSet prepare_templates(const GrayImage& panorama, std::span<const Label> labels,
                              const SegmentConfig& cfg, const FeatureConfig& features);

/// Single template covering the whole panorama (the non-clustered baseline).
TemplateSet whole_panorama_templates(const GrayImage& panorama, std::span<const Label> labels,
                                     const FeatureConfig& features);

// ---------------------------------------------------------------------------
// Local area and voting

/// Template indices chosen for the most recent frames, most recent last.
class LocalArea {
 public:
  explicit LocalArea(int capacity = 3) : capacity_(capacity < 1 ? 1 : capacity) {}

  void push(int template_index);
  const std::deque<int>& history() const { return history_; }
  int capacity() const { return capacity_; }
  bool empty() const { return history_.empty(); }
  int frequency(int template_index) const;
  /// Position of the latest use counted from the newest entry (0 = newest);
  /// -1 if absent.
  int recency(int template_index) const;

 private:
  int capacity_;
  std::deque<int> history_;
};

/// Cold start: every template. Otherwise the distinct history entries
/// (by frequency, then recency) followed by their spatial neighbours
/// (overlapping rects or nearest centre).
std::vector<int> candidate_set(const LocalArea& area, std::span<const Template> templates);

struct VoteOutcome {
  int winner = -1;  // -1: no candidate has any match
  std::vector<int> candidates;
  std::vector<int> counts;
  std::vector<double> scores;
};

/// score = count * (1 + beta * frequency / capacity); argmax, ties to the
/// most recently used candidate, then the lowest index.
VoteOutcome soft_vote_rule(std::span<const int> candidates, std::span<const int> counts,
                           const LocalArea& area, double beta);

struct MatchConfig {
  bool cross_check = false;
  GmsConfig gms;
};

/// GMS-filtered matches of the frame against one template.
GmsResult match_template(const FeatureSet& frame, const Template& tpl, const MatchConfig& cfg);

/// Scores every candidate and applies soft_vote_rule. Per-candidate GMS
/// results are returned through `details` when non-null (same order).
VoteOutcome soft_vote(const FeatureSet& frame, std::span<const int> candidates,
                      std::span<const Template> templates, const LocalArea& area,
                      const MatchConfig& cfg, double beta,
                      std::vector<GmsResult>* details = nullptr);

// ---------------------------------------------------------------------------
// Per-frame pipeline

enum class Estimator { kRansac, kDegensac };
enum class FrameStatus { kOk, kNoMatch };

struct PipelineConfig {
  FeatureConfig features;
  MatchConfig matching;
  RobustConfig homography;
  Estimator estimator = Estimator::kDegensac;
  int history = 3;
  double beta = 0.2;
  double lambda = 0.5;
  double support_radius = 50.0;
  int min_inliers = 10;
  bool use_local_area = true;
  bool polar_refinement = true;
  bool fallback_full_search = true;
};

struct FrameResult {
  int frame_idx = 0;
  int chosen_template = -1;
  Homography homography;  // template -> frame
  LabelPositions label_positions;
  int match_count = 0;  // GMS-kept pairs against the chosen template
  int inlier_count = 0;
  FrameStatus status = FrameStatus::kNoMatch;
  bool stale = false;
  int candidates_scored = 0;
};

/// One frame: features, candidates, soft vote, robust homography, label
/// projection and optional polar refinement. On success the winner is
/// pushed to `area`; on failure the result is kNoMatch and `area` is
/// untouched.
FrameResult match_frame(const GrayImage& frame, LocalArea& area, const TemplateSet& set,
                        const PipelineConfig& cfg, int frame_idx = 0);
FrameResult match_frame(const FeatureSet& frame, LocalArea& area, const TemplateSet& set,
                        const PipelineConfig& cfg, int frame_idx = 0);

/// Sequential driver. No-match frames repeat the last good label
/// positions flagged stale.
class Tracker {
 public:
  Tracker(const TemplateSet& set, PipelineConfig cfg);

  FrameResult process(const GrayImage& frame);
  const LocalArea& local_area() const { return area_; }

 private:
  const TemplateSet* set_;
  PipelineConfig cfg_;
  LocalArea area_;
  LabelPositions last_positions_;
  int next_frame_ = 0;
};

}  // namespace lacmatch
