#include "lacmatch/lac.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>

#include "lacmatch/errors.hpp"
#include "lacmatch/rng.hpp"

namespace lacmatch {

namespace {

double sq_dist(Point2 a, Point2 b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

std::size_t distinct_count(std::span<const Point2> points) {
  std::set<std::pair<double, double>> s;
  for (const auto& p : points) s.insert({p.x, p.y});
  return s.size();
}

int nearest_center(Point2 p, std::span<const Point2> centers) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const double d = sq_dist(p, centers[c]);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

}  // namespace

// ---------------------------------------------------------------------------
// Clustering

double kmeans_objective(std::span<const Point2> points, std::span<const Point2> centers,
                        std::span<const int> assignment) {
  double j = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i)
    j += sq_dist(points[i], centers[static_cast<std::size_t>(assignment[i])]);
  return j;
}

KMeansResult kmeans(std::span<const Point2> points, int k, int max_iter, std::uint64_t seed) {
  if (k < 1) throw InputError("k must be >= 1");
  const std::size_t n = points.size();
  if (static_cast<std::size_t>(k) > distinct_count(points))
    throw InputError("k = " + std::to_string(k) + " exceeds the number of distinct points (" +
                     std::to_string(distinct_count(points)) + ")");

  // k-means++ seeding.
  CounterRng rng(seed);
  KMeansResult r;
  r.centers.push_back(points[rng.below(n)]);
  std::vector<double> d2(n);
  while (r.centers.size() < static_cast<std::size_t>(k)) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::numeric_limits<double>::infinity();
      for (const auto& c : r.centers) d2[i] = std::min(d2[i], sq_dist(points[i], c));
      total += d2[i];
    }
    double target = rng.uniform() * total;
    std::size_t pick = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (d2[i] <= 0.0) continue;
      pick = i;
      target -= d2[i];
      if (target < 0.0) break;
    }
    r.centers.push_back(points[pick]);
  }

  r.assignment.assign(n, -1);
  std::vector<int> next(n);
  for (int it = 0; it < std::max(1, max_iter); ++it) {
    for (std::size_t i = 0; i < n; ++i) next[i] = nearest_center(points[i], r.centers);
    const bool changed = next != r.assignment;
    r.assignment = next;
    r.objective_history.push_back(kmeans_objective(points, r.centers, r.assignment));
    r.iterations = it + 1;
    if (!changed) break;

    // Centroid update.
    std::vector<Point2> sum(static_cast<std::size_t>(k));
    std::vector<int> size(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(r.assignment[i]);
      sum[c] = sum[c] + points[i];
      ++size[c];
    }
    for (std::size_t c = 0; c < sum.size(); ++c)
      if (size[c] > 0) r.centers[c] = (1.0 / size[c]) * sum[c];

    // Re-seed empty clusters with the point farthest from its centre.
    for (std::size_t c = 0; c < sum.size(); ++c) {
      if (size[c] > 0) continue;
      std::size_t far = n;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        const auto own = static_cast<std::size_t>(r.assignment[i]);
        if (size[own] < 2) continue;
        const double d = sq_dist(points[i], r.centers[own]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far == n) continue;
      const auto own = static_cast<std::size_t>(r.assignment[far]);
      --size[own];
      ++size[c];
      r.assignment[far] = static_cast<int>(c);
      r.centers[c] = points[far];
      Point2 s{};
      for (std::size_t i = 0; i < n; ++i)
        if (r.assignment[i] == static_cast<int>(own)) s = s + points[i];
      r.centers[own] = (1.0 / size[own]) * s;
    }
  }
  return r;
}

std::vector<double> elbow_scan(std::span<const Point2> points, int k_max, int max_iter,
                               std::uint64_t seed) {
  std::vector<double> out;
  const int limit = std::min<int>(k_max, static_cast<int>(distinct_count(points)));
  for (int k = 1; k <= limit; ++k) out.push_back(kmeans(points, k, max_iter, seed).objective());
  return out;
}

KMeansResult kmeans_restarts(std::span<const Point2> points, int k, int max_iter, int restarts,
                             std::uint64_t seed) {
  KMeansResult best = kmeans(points, k, max_iter, seed);
  for (int r = 1; r < restarts; ++r) {
    auto km = kmeans(points, k, max_iter, derive_seed(seed, static_cast<std::uint64_t>(r)));
    if (km.objective() < best.objective()) best = std::move(km);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Templates

const Label& TemplateSet::label(int id) const {
  for (const auto& l : labels)
    if (l.id == id) return l;
  throw InputError("unknown label id " + std::to_string(id));
}

int default_cluster_count(std::size_t label_count) {
  return std::max(1, static_cast<int>((label_count + 3) / 4));
}

Size2 default_template_size(Size2 panorama, int k) {
  const int div = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(std::max(1, k)))));
  return {std::min(panorama.width, std::max(256, panorama.width / div)),
          std::min(panorama.height, std::max(256, panorama.height / div))};
}

Rect place_template(Point2 center, Size2 size, Size2 panorama, std::span<const Point2> members,
                    int cluster_id) {
  if (size.width < 1 || size.height < 1 || size.width > panorama.width ||
      size.height > panorama.height)
    throw InputError("template size must be positive and fit inside the panorama");
  auto place_axis = [&](double c, int len, int limit, auto coord) {
    int origin = static_cast<int>(std::floor(c - len / 2.0 + 0.5));
    origin = std::clamp(origin, 0, limit - len);
    if (members.empty()) return origin;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& m : members) {
      lo = std::min(lo, coord(m));
      hi = std::max(hi, coord(m));
    }
    const int first = static_cast<int>(std::floor(lo));
    const int last = static_cast<int>(std::floor(hi));
    if (last - first + 1 > len)
      throw InfeasibleError("labels of cluster " + std::to_string(cluster_id) +
                                " span more than the template size; raise the template size or k",
                            cluster_id);
    if (first < origin) origin = first;
    if (last >= origin + len) origin = last - len + 1;
    return std::clamp(origin, 0, limit - len);
  };
  Rect r;
  r.w = size.width;
  r.h = size.height;
  r.x = place_axis(center.x, size.width, panorama.width, [](Point2 p) { return p.x; });
  r.y = place_axis(center.y, size.height, panorama.height, [](Point2 p) { return p.y; });
  return r;
}

std::vector<Template> segment_templates(const GrayImage& panorama, std::span<const Label> labels,
                                        const SegmentConfig& cfg, const FeatureConfig& features) {
  if (labels.empty()) throw InputError("at least one label is required");
  validate_labels(labels, panorama.size());
  const int k = cfg.k > 0 ? cfg.k : default_cluster_count(labels.size());
  if (static_cast<std::size_t>(k) > labels.size())
    throw InfeasibleError("k = " + std::to_string(k) + " exceeds the label count (" +
                              std::to_string(labels.size()) + ")",
                          -1);
  const Size2 size = cfg.template_size.width > 0 && cfg.template_size.height > 0
                         ? cfg.template_size
                         : default_template_size(panorama.size(), k);

  std::vector<Point2> points;
  for (const auto& l : labels) points.push_back(l.position);
  const auto km = kmeans_restarts(points, k, cfg.max_iter, cfg.restarts, cfg.seed);

  std::vector<Template> out;
  for (int c = 0; c < k; ++c) {
    Template t;
    t.index = c;
    t.center = km.centers[static_cast<std::size_t>(c)];
    std::vector<Point2> members;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (km.assignment[i] == c) {
        t.label_ids.push_back(labels[i].id);
        members.push_back(labels[i].position);
      }
    t.rect = place_template(t.center, size, panorama.size(), members, c);
    t.features = extract_features(panorama.crop(t.rect), features);
    out.push_back(std::move(t));
  }
  return out;
}

TemplateSet prepare_templates(const GrayImage& panorama, std::span<const Label> labels,
                              const SegmentConfig& cfg, const FeatureConfig& features) {
  TemplateSet set;
  set.panorama_size = panorama.size();
  set.labels.assign(labels.begin(), labels.end());
  set.templates = segment_templates(panorama, labels, cfg, features);
  set.topology = build_topology(labels);
  return set;
}

TemplateSet whole_panorama_templates(const GrayImage& panorama, std::span<const Label> labels,
                                     const FeatureConfig& features) {
  validate_labels(labels, panorama.size());
  TemplateSet set;
  set.panorama_size = panorama.size();
  set.labels.assign(labels.begin(), labels.end());
  Template t;
  t.index = 0;
  t.rect = {0, 0, panorama.width(), panorama.height()};
  t.center = {panorama.width() / 2.0, panorama.height() / 2.0};
  for (const auto& l : labels) t.label_ids.push_back(l.id);
  t.features = extract_features(panorama, features);
  set.templates.push_back(std::move(t));
  set.topology = build_topology(labels);
  return set;
}

// ---------------------------------------------------------------------------
// Local area and voting

void LocalArea::push(int template_index) {
  history_.push_back(template_index);
  while (static_cast<int>(history_.size()) > capacity_) history_.pop_front();
}

int LocalArea::frequency(int template_index) const {
  return static_cast<int>(std::count(history_.begin(), history_.end(), template_index));
}

int LocalArea::recency(int template_index) const {
  for (int i = static_cast<int>(history_.size()) - 1; i >= 0; --i)
    if (history_[static_cast<std::size_t>(i)] == template_index)
      return static_cast<int>(history_.size()) - 1 - i;
  return -1;
}

std::vector<int> candidate_set(const LocalArea& area, std::span<const Template> templates) {
  std::vector<int> out;
  if (area.empty()) {
    for (std::size_t i = 0; i < templates.size(); ++i) out.push_back(static_cast<int>(i));
    return out;
  }
  std::vector<int> seen;
  for (int t : area.history())
    if (t >= 0 && static_cast<std::size_t>(t) < templates.size() &&
        std::find(seen.begin(), seen.end(), t) == seen.end())
      seen.push_back(t);
  std::stable_sort(seen.begin(), seen.end(), [&](int a, int b) {
    const int fa = area.frequency(a), fb = area.frequency(b);
    if (fa != fb) return fa > fb;
    return area.recency(a) < area.recency(b);
  });
  out = seen;

  for (int h : seen) {
    const auto& base = templates[static_cast<std::size_t>(h)];
    int nearest = -1;
    double nearest_d = std::numeric_limits<double>::infinity();
    std::vector<std::pair<double, int>> neighbours;
    for (std::size_t i = 0; i < templates.size(); ++i) {
      if (static_cast<int>(i) == h) continue;
      const double d = sq_dist(base.center, templates[i].center);
      if (d < nearest_d) {
        nearest_d = d;
        nearest = static_cast<int>(i);
      }
      if (base.rect.overlaps(templates[i].rect)) neighbours.emplace_back(d, static_cast<int>(i));
    }
    if (nearest >= 0 &&
        std::none_of(neighbours.begin(), neighbours.end(),
                     [&](const auto& p) { return p.second == nearest; }))
      neighbours.emplace_back(nearest_d, nearest);
    std::sort(neighbours.begin(), neighbours.end());
    for (const auto& [d, i] : neighbours)
      if (std::find(out.begin(), out.end(), i) == out.end()) out.push_back(i);
  }
  return out;
}

VoteOutcome soft_vote_rule(std::span<const int> candidates, std::span<const int> counts,
                           const LocalArea& area, double beta) {
  if (candidates.size() != counts.size())
    throw InputError("soft vote needs one count per candidate");
  VoteOutcome v;
  v.candidates.assign(candidates.begin(), candidates.end());
  v.counts.assign(counts.begin(), counts.end());
  double best = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double s = counts[i] * (1.0 + beta * area.frequency(candidates[i]) / area.capacity());
    v.scores.push_back(s);
    if (counts[i] <= 0) continue;
    bool take = v.winner < 0 || s > best;
    if (!take && s == best) {
      const int ra = area.recency(candidates[i]);
      const int rb = area.recency(v.winner);
      const bool a_used = ra >= 0, b_used = rb >= 0;
      if (a_used != b_used)
        take = a_used;
      else if (a_used && ra != rb)
        take = ra < rb;
      else
        take = candidates[i] < v.winner;
    }
    if (take) {
      best = s;
      v.winner = candidates[i];
    }
  }
  return v;
}

GmsResult match_template(const FeatureSet& frame, const Template& tpl, const MatchConfig& cfg) {
  const auto raw = brute_force_match(frame.descriptors, tpl.features.descriptors, cfg.cross_check);
  return gms_filter(raw, frame.keypoints, tpl.features.keypoints, frame.image_size,
                    tpl.features.image_size, cfg.gms);
}

VoteOutcome soft_vote(const FeatureSet& frame, std::span<const int> candidates,
                      std::span<const Template> templates, const LocalArea& area,
                      const MatchConfig& cfg, double beta, std::vector<GmsResult>* details) {
  if (candidates.empty()) throw InputError("soft vote needs at least one candidate");
  std::vector<int> counts;
  if (details) details->clear();
  for (int c : candidates) {
    auto res = match_template(frame, templates[static_cast<std::size_t>(c)], cfg);
    counts.push_back(static_cast<int>(res.kept.size()));
    if (details) details->push_back(std::move(res));
  }
  return soft_vote_rule(candidates, counts, area, beta);
}

// ---------------------------------------------------------------------------
// Per-frame pipeline

FrameResult match_frame(const GrayImage& frame, LocalArea& area, const TemplateSet& set,
                        const PipelineConfig& cfg, int frame_idx) {
  return match_frame(extract_features(frame, cfg.features), area, set, cfg, frame_idx);
}

FrameResult match_frame(const FeatureSet& frame, LocalArea& area, const TemplateSet& set,
                        const PipelineConfig& cfg, int frame_idx) {
  FrameResult result;
  result.frame_idx = frame_idx;
  if (set.templates.empty()) return result;

  std::vector<int> candidates;
  if (cfg.use_local_area) {
    candidates = candidate_set(area, set.templates);
  } else {
    for (std::size_t i = 0; i < set.templates.size(); ++i) candidates.push_back(static_cast<int>(i));
  }

  std::vector<GmsResult> details;
  VoteOutcome vote = soft_vote(frame, candidates, set.templates, area, cfg.matching, cfg.beta, &details);
  result.candidates_scored = static_cast<int>(candidates.size());

  auto estimate = [&](const VoteOutcome& v, const std::vector<GmsResult>& det) -> bool {
    if (v.winner < 0) return false;
    const auto pos = static_cast<std::size_t>(
        std::find(v.candidates.begin(), v.candidates.end(), v.winner) - v.candidates.begin());
    const auto& kept = det[pos].kept;
    if (kept.size() < 4) return false;
    const Template& tpl = set.templates[static_cast<std::size_t>(v.winner)];
    RobustConfig rc = cfg.homography;
    rc.seed = derive_seed(cfg.homography.seed, static_cast<std::uint64_t>(frame_idx));
    const auto pairs = correspondences(kept, frame.keypoints, tpl.features.keypoints);
    const RobustEstimate est =
        cfg.estimator == Estimator::kDegensac ? degensac(pairs, rc) : ransac(pairs, rc);
    if (!est.success || est.inlier_count() < std::max(4, cfg.min_inliers)) return false;

    LabelPositions projected;
    try {
      for (int id : tpl.label_ids) {
        const Point2 local = set.label(id).position - tpl.rect.origin();
        const Point2 p = project_point(est.homography, local);
        if (!is_finite(p)) return false;
        projected[id] = p;
      }
    } catch (const PointAtInfinityError&) {
      return false;
    }
    if (cfg.polar_refinement && projected.size() > 1) {
      std::vector<Point2> inlier_points;
      for (std::size_t i = 0; i < pairs.size(); ++i)
        if (est.inlier_mask[i]) inlier_points.push_back(pairs[i].dst);
      const auto support = label_support(projected, inlier_points, cfg.support_radius);
      projected = refine_labels_polar(projected, set.topology, support, cfg.lambda);
    }
    result.chosen_template = v.winner;
    result.homography = est.homography;
    result.label_positions = std::move(projected);
    result.match_count = static_cast<int>(kept.size());
    result.inlier_count = est.inlier_count();
    result.status = FrameStatus::kOk;
    return true;
  };

  bool ok = estimate(vote, details);
  if (!ok && cfg.fallback_full_search && candidates.size() < set.templates.size()) {
    // The local area missed; score the remaining templates as well.
    std::vector<int> rest;
    for (std::size_t i = 0; i < set.templates.size(); ++i)
      if (std::find(candidates.begin(), candidates.end(), static_cast<int>(i)) == candidates.end())
        rest.push_back(static_cast<int>(i));
    std::vector<GmsResult> more;
    VoteOutcome extra = soft_vote(frame, rest, set.templates, area, cfg.matching, cfg.beta, &more);
    std::vector<int> all_candidates = candidates;
    all_candidates.insert(all_candidates.end(), rest.begin(), rest.end());
    std::vector<int> all_counts = vote.counts;
    for (std::size_t i = 0; i < candidates.size(); ++i)
      if (candidates[i] == vote.winner) all_counts[i] = 0;  // already failed
    all_counts.insert(all_counts.end(), extra.counts.begin(), extra.counts.end());
    for (auto& d : more) details.push_back(std::move(d));
    result.candidates_scored = static_cast<int>(all_candidates.size());
    ok = estimate(soft_vote_rule(all_candidates, all_counts, area, cfg.beta), details);
  }
  if (ok) area.push(result.chosen_template);
  return result;
}

Tracker::Tracker(const TemplateSet& set, PipelineConfig cfg)
    : set_(&set), cfg_(std::move(cfg)), area_(cfg_.history) {}

FrameResult Tracker::process(const GrayImage& frame) {
  FrameResult r = match_frame(frame, area_, *set_, cfg_, next_frame_++);
  if (r.status == FrameStatus::kOk) {
    last_positions_ = r.label_positions;
  } else {
    r.label_positions = last_positions_;
    r.stale = true;
  }
  return r;
}

}  // namespace lacmatch
