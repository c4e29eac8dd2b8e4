#include "lacmatch/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <numbers>
#include <set>

#include "lacmatch/errors.hpp"
#include "lacmatch/rng.hpp"

namespace lacmatch {

// ---------------------------------------------------------------------------
// AUC

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw InputError("scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Mann-Whitney U with mid-ranks for ties.
  double rank_sum = 0.0;
  std::size_t pos = 0, neg = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double mid = (static_cast<double>(i) + static_cast<double>(j - 1)) / 2.0 + 1.0;
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]] > 0) {
        rank_sum += mid;
        ++pos;
      } else {
        ++neg;
      }
    }
    i = j;
  }
  if (pos == 0 || neg == 0) throw InputError("AUC needs both classes");
  const double p = static_cast<double>(pos);
  return (rank_sum - p * (p + 1) / 2.0) / (p * static_cast<double>(neg));
}

double patch_verification_auc(std::span<const PatchPairSample> samples, const BeblidModel& model) {
  std::vector<double> scores;
  std::vector<int> labels;
  for (const auto& s : samples) {
    scores.push_back(-static_cast<double>(hamming(describe_patch(s.x, model), describe_patch(s.y, model))));
    labels.push_back(s.label);
  }
  return roc_auc(scores, labels);
}

double random_bit_auc(std::span<const PatchPairSample> samples, int bits, std::uint64_t seed) {
  CounterRng rng(seed);
  auto draw = [&] {
    BinaryDescriptor d(bits);
    for (int k = 0; k < bits; ++k) d.set(k, rng.uniform() < 0.5);
    return d;
  };
  std::vector<double> scores;
  std::vector<int> labels;
  for (const auto& s : samples) {
    scores.push_back(-static_cast<double>(hamming(draw(), draw())));
    labels.push_back(s.label);
  }
  return roc_auc(scores, labels);
}

// ---------------------------------------------------------------------------
// Match quality

std::vector<bool> match_correctness(std::span<const MatchPair> matches,
                                    std::span<const Keypoint> frame_kps,
                                    std::span<const Keypoint> template_kps,
                                    const Homography& truth, double tol) {
  std::vector<bool> out;
  out.reserve(matches.size());
  for (const auto& m : matches) {
    const Point2 t = template_kps[static_cast<std::size_t>(m.train_idx)].position;
    const Point2 f = frame_kps[static_cast<std::size_t>(m.query_idx)].position;
    bool ok = false;
    try {
      ok = distance(project_point(truth, t), f) <= tol;
    } catch (const PointAtInfinityError&) {
    }
    out.push_back(ok);
  }
  return out;
}

double match_precision(std::span<const MatchPair> matches, std::span<const Keypoint> frame_kps,
                       std::span<const Keypoint> template_kps, const Homography& truth, double tol) {
  if (matches.empty()) return 0.0;
  const auto ok = match_correctness(matches, frame_kps, template_kps, truth, tol);
  return static_cast<double>(std::count(ok.begin(), ok.end(), true)) / static_cast<double>(ok.size());
}

// ---------------------------------------------------------------------------
// Benchmark

std::string to_string(Variant v) {
  switch (v) {
    case Variant::kBriefRansac: return "orb_ransac";
    case Variant::kBriefGmsRansac: return "orb_gms_ransac";
    case Variant::kBeblidGmsRansac: return "beblid_gms_ransac";
    case Variant::kBeblidGmsDegensac: return "beblid_gms_degensac";
  }
  return "unknown";
}

Variant variant_from_string(const std::string& s) {
  for (Variant v : all_variants())
    if (to_string(v) == s) return v;
  throw InputError("unknown variant: " + s);
}

std::vector<Variant> all_variants() {
  return {Variant::kBriefRansac, Variant::kBriefGmsRansac, Variant::kBeblidGmsRansac,
          Variant::kBeblidGmsDegensac};
}

namespace {

bool uses_beblid(Variant v) { return v == Variant::kBeblidGmsRansac || v == Variant::kBeblidGmsDegensac; }
bool uses_gms(Variant v) { return v != Variant::kBriefRansac; }

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::vector<BenchRow> benchmark_inlier_rates(const std::function<BenchmarkScene(int)>& scene_for_rep,
                                             std::span<const Variant> variants,
                                             const BenchmarkConfig& cfg) {
  if (cfg.reps < 1) throw InputError("reps must be at least 1");
  const bool need_beblid = std::any_of(variants.begin(), variants.end(), uses_beblid);
  if (need_beblid && !cfg.beblid) throw InputError("BEBLID variants need a trained model");

  std::vector<BenchRow> rows;
  for (int rep = 0; rep < cfg.reps; ++rep) {
    const BenchmarkScene scene = scene_for_rep(rep);
    if (scene.frames.size() != scene.truth.size()) throw InputError("scene frames and truth differ in count");
    FeatureConfig brief_cfg = cfg.features;
    brief_cfg.descriptor = DescriptorKind::kBrief;
    FeatureConfig beblid_cfg = cfg.features;
    beblid_cfg.descriptor = DescriptorKind::kBeblid;
    beblid_cfg.beblid = cfg.beblid;
    const FeatureSet ref_brief = extract_features(scene.reference, brief_cfg);
    FeatureSet ref_beblid;
    if (need_beblid) ref_beblid = extract_features(scene.reference, beblid_cfg);

    for (Variant v : variants) {
      BenchRow row;
      row.variant = v;
      row.rep = rep;
      const FeatureConfig& fcfg = uses_beblid(v) ? beblid_cfg : brief_cfg;
      const FeatureSet& ref = uses_beblid(v) ? ref_beblid : ref_brief;
      double total_ms = 0.0;
      for (std::size_t f = 0; f < scene.frames.size(); ++f) {
        FrameStats st;
        RobustConfig rc = cfg.homography;
        rc.seed = derive_seed(derive_seed(cfg.homography.seed, static_cast<std::uint64_t>(rep)), f);

        const auto t0 = std::chrono::steady_clock::now();
        const FeatureSet feats = extract_features(scene.frames[f], fcfg);
        const auto raw = brute_force_match(feats.descriptors, ref.descriptors, cfg.matching.cross_check);
        std::vector<MatchPair> input;
        if (uses_gms(v))
          input = gms_filter(raw, feats.keypoints, ref.keypoints, feats.image_size, ref.image_size,
                             cfg.matching.gms)
                      .kept;
        else
          input = raw;
        RobustEstimate est;
        if (input.size() >= 4) {
          est = v == Variant::kBeblidGmsDegensac ? degensac(input, feats.keypoints, ref.keypoints, rc)
                                                 : ransac(input, feats.keypoints, ref.keypoints, rc);
        }
        const auto t1 = std::chrono::steady_clock::now();

        st.failed = !est.success;
        st.inlier_rate = est.success ? inlier_rate(est) : 0.0;
        st.ms = cfg.record_timing ? std::chrono::duration<double, std::milli>(t1 - t0).count() : 0.0;
        st.raw_matches = static_cast<int>(raw.size());
        st.kept_matches = static_cast<int>(input.size());
        st.raw_precision = match_precision(raw, feats.keypoints, ref.keypoints, scene.truth[f]);
        if (uses_gms(v)) st.kept_precision = match_precision(input, feats.keypoints, ref.keypoints, scene.truth[f]);
        total_ms += st.ms;
        row.mean_inlier_rate += st.inlier_rate;
        if (st.failed) ++row.failed_frames;
        row.frames.push_back(st);
      }
      const double n = static_cast<double>(std::max<std::size_t>(1, scene.frames.size()));
      row.mean_inlier_rate /= n;
      row.ms_per_frame = total_ms / n;
      row.failed = row.failed_frames == static_cast<int>(scene.frames.size());
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<BenchSummary> summarize(std::span<const BenchRow> rows) {
  std::vector<BenchSummary> out;
  for (Variant v : all_variants()) {
    std::vector<double> rates, ms;
    BenchSummary s;
    s.variant = v;
    for (const auto& r : rows) {
      if (r.variant != v) continue;
      rates.push_back(r.mean_inlier_rate);
      ms.push_back(r.ms_per_frame);
      if (r.failed) ++s.failed_reps;
    }
    if (rates.empty()) continue;
    s.mean_inlier_rate = std::accumulate(rates.begin(), rates.end(), 0.0) / static_cast<double>(rates.size());
    s.mean_ms = std::accumulate(ms.begin(), ms.end(), 0.0) / static_cast<double>(ms.size());
    s.median_ms = median(ms);
    out.push_back(s);
  }
  return out;
}

std::string rates_csv(std::span<const BenchRow> rows) {
  std::string out = "variant,rep,mean_inlier_rate,ms_per_frame\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%d,%.6f,%.6f\n", to_string(r.variant).c_str(), r.rep,
                  r.mean_inlier_rate, r.ms_per_frame);
    out += buf;
  }
  return out;
}

std::string rates_table(std::span<const BenchSummary> summary) {
  std::string out;
  char buf[200];
  std::snprintf(buf, sizeof buf, "%-22s %12s %10s %10s %8s\n", "variant", "inlier_rate", "mean_ms",
                "median_ms", "failed");
  out += buf;
  for (const auto& s : summary) {
    std::snprintf(buf, sizeof buf, "%-22s %11.2f%% %10.1f %10.1f %8d\n", to_string(s.variant).c_str(),
                  100.0 * s.mean_inlier_rate, s.mean_ms, s.median_ms, s.failed_reps);
    out += buf;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Drift

namespace {

bool in_frame(Point2 p, Size2 dims) {
  return p.x >= 0.0 && p.y >= 0.0 && p.x <= dims.width - 1.0 && p.y <= dims.height - 1.0;
}

double variance(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return acc / static_cast<double>(v.size());
}

}  // namespace

DriftReport drift_metrics(std::span<const FrameResult> results, Size2 frame_dims) {
  if (frame_dims.width < 1 || frame_dims.height < 1) throw InputError("frame size must be positive");
  const auto ok_frames = std::count_if(results.begin(), results.end(),
                                       [](const FrameResult& r) { return r.status == FrameStatus::kOk; });
  if (ok_frames < 2) throw InputError("drift needs at least two matched frames");

  DriftReport rep;
  rep.frame_count = static_cast<int>(results.size());
  std::map<int, std::vector<double>> series;
  for (std::size_t f = 0; f < results.size(); ++f) {
    const auto& r = results[f];
    for (const auto& [id, p] : r.label_positions) {
      auto& col = rep.relative_x[id];
      if (col.empty()) col.resize(results.size());
      if (r.stale || !in_frame(p, frame_dims)) continue;
      col[f] = p.x / frame_dims.width * 100.0;
      series[id].push_back(*col[f]);
    }
  }
  for (const auto& [id, col] : rep.relative_x) {
    rep.label_ids.push_back(id);
    const double v = variance(series[id]);
    rep.variance[id] = v;
    rep.total_variance += v;
  }

  const FrameResult* prev = nullptr;
  double sum = 0.0;
  for (const auto& r : results) {
    if (r.status != FrameStatus::kOk) continue;
    if (prev) {
      for (const auto& [id, p] : r.label_positions) {
        const auto it = prev->label_positions.find(id);
        if (it == prev->label_positions.end()) continue;
        if (!in_frame(p, frame_dims) || !in_frame(it->second, frame_dims)) continue;
        DisplacementSample d{r.frame_idx, id, distance(p, it->second)};
        sum += d.euclidean_px;
        rep.displacements.push_back(d);
      }
    }
    prev = &r;
  }
  if (!rep.displacements.empty()) rep.mean_displacement = sum / static_cast<double>(rep.displacements.size());
  return rep;
}

DriftComparison compare_drift(std::span<const FrameResult> on, std::span<const FrameResult> off,
                              Size2 frame_dims) {
  if (on.size() != off.size()) throw InputError("paired drift runs differ in frame count");
  std::vector<FrameResult> a(on.begin(), on.end());
  std::vector<FrameResult> b(off.begin(), off.end());
  std::set<int> shared;
  for (std::size_t f = 0; f < a.size(); ++f) {
    const bool usable = !a[f].stale && !b[f].stale && a[f].status == FrameStatus::kOk &&
                        b[f].status == FrameStatus::kOk;
    LabelPositions pa, pb;
    if (usable) {
      for (const auto& [id, p] : a[f].label_positions) {
        const auto it = b[f].label_positions.find(id);
        if (it == b[f].label_positions.end() || !in_frame(p, frame_dims) || !in_frame(it->second, frame_dims))
          continue;
        pa[id] = p;
        pb[id] = it->second;
        shared.insert(id);
      }
    }
    a[f].label_positions = std::move(pa);
    b[f].label_positions = std::move(pb);
    if (!usable) a[f].status = b[f].status = FrameStatus::kNoMatch;
  }
  DriftComparison out;
  out.on = drift_metrics(a, frame_dims);
  out.off = drift_metrics(b, frame_dims);
  out.shared_labels.assign(shared.begin(), shared.end());
  return out;
}

std::string trace_csv(std::span<const FrameResult> results, Size2 frame_dims) {
  std::string out = "frame,label_id,rel_x_times_100,x,y,stale\n";
  char buf[200];
  for (const auto& r : results) {
    for (const auto& [id, p] : r.label_positions) {
      if (!in_frame(p, frame_dims)) continue;
      std::snprintf(buf, sizeof buf, "%d,%d,%.6f,%.6f,%.6f,%d\n", r.frame_idx, id,
                    p.x / frame_dims.width * 100.0, p.x, p.y, r.stale ? 1 : 0);
      out += buf;
    }
  }
  return out;
}

std::string displacement_csv(const DriftReport& report) {
  std::string out = "frame,label_id,euclidean_px\n";
  char buf[120];
  for (const auto& d : report.displacements) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.6f\n", d.frame, d.label_id, d.euclidean_px);
    out += buf;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fixtures

BenchmarkScene contaminated_scene(std::uint64_t seed, Size2 frame, int frames) {
  const Size2 pano_size{frame.width * 2, frame.height * 2};
  const GrayImage pano = synthetic_panorama(pano_size, derive_seed(seed, 1));
  const Rect ref_rect{frame.width / 2, frame.height / 2, frame.width, frame.height};
  BenchmarkScene scene;
  scene.reference = pano.crop(ref_rect);
  NoiseConfig noise;
  noise.pixel_sigma = 5.0;
  noise.gain_jitter = 0.1;
  noise.retexture_fraction = 0.3;
  CounterRng rng(derive_seed(seed, 2));
  Homography ref_to_pano = Homography::translation(ref_rect.x, ref_rect.y);
  for (int f = 0; f < frames; ++f) {
    ViewPose p;
    p.cx = pano_size.width / 2.0 + rng.uniform(-0.3, 0.3) * frame.width;
    p.cy = pano_size.height / 2.0 + rng.uniform(-0.3, 0.3) * frame.height;
    p.angle = rng.uniform(-0.17, 0.17);
    p.scale = rng.uniform(0.95, 1.05);
    p.tilt_x = rng.uniform(-5e-5, 5e-5);
    p.tilt_y = rng.uniform(-5e-5, 5e-5);
    const Homography to_pano = view_to_panorama(p, frame);
    GrayImage img = render_view(pano, to_pano, frame);
    apply_noise(img, noise, derive_seed(seed, 100 + static_cast<std::uint64_t>(f)));
    scene.frames.push_back(std::move(img));
    scene.truth.push_back(to_pano.inverse() * ref_to_pano);
  }
  return scene;
}

namespace {

ViewPose pose_at(Point2 c) {
  ViewPose p;
  p.cx = c.x;
  p.cy = c.y;
  return p;
}

// View centred on `c`, pulled inside the panorama.
ViewPose framed(Point2 c, Size2 frame, Size2 pano) {
  const double hw = frame.width / 2.0 + 8.0, hh = frame.height / 2.0 + 8.0;
  return pose_at({std::clamp(c.x, hw, pano.width - hw), std::clamp(c.y, hh, pano.height - hh)});
}

Point2 group_centre(std::span<const Label> labels, int group, int per_group) {
  Point2 c{0, 0};
  for (int i = 0; i < per_group; ++i) c = c + labels[static_cast<std::size_t>(group * per_group + i)].position;
  return (1.0 / per_group) * c;
}

TrackingFixture grid_fixture(std::uint64_t seed, Size2 pano, int cols, int rows, int per_group) {
  TrackingFixture fx;
  fx.seed = seed;
  fx.panorama = synthetic_panorama(pano, derive_seed(seed, 1));
  fx.labels = grid_labels(pano, cols, rows, per_group, 30.0, derive_seed(seed, 2));
  fx.noise.pixel_sigma = 3.0;
  fx.noise.gain_jitter = 0.05;
  fx.script.frame_size = {640, 360};
  return fx;
}

}  // namespace

TrackingFixture jittered_pan_fixture(std::uint64_t seed) {
  const Size2 pano{2400, 900};
  TrackingFixture fx = grid_fixture(seed, pano, 3, 2, 4);
  const Size2 fs = fx.script.frame_size;
  // Slow sideways sway over one label group with hand shake.
  const ViewPose centre = framed(group_centre(fx.labels, 1, 4), fs, pano);
  ViewPose left = centre, right = centre;
  left.cx -= 15.0;
  right.cx += 15.0;
  fx.script.start = centre;
  fx.script.start_frames = 4;
  fx.script.shake_sigma = 2.0;
  fx.script.segments = {{right, 10, 2}, {left, 20, 2}, {right, 20, 2}, {centre, 10, 4}};
  return fx;
}

TrackingFixture dwell_fixture(std::uint64_t seed) {
  const Size2 pano{3200, 900};
  TrackingFixture fx = grid_fixture(seed, pano, 4, 2, 4);
  const Size2 fs = fx.script.frame_size;
  const int order[] = {0, 1, 5, 6, 2, 3, 7, 4};
  fx.script.start = framed(group_centre(fx.labels, order[0], 4), fs, pano);
  fx.script.start_frames = 6;
  for (std::size_t i = 1; i < std::size(order); ++i)
    fx.script.segments.push_back({framed(group_centre(fx.labels, order[i], 4), fs, pano), 3, 6});
  return fx;
}

TrackingFixture stationary_fixture(std::uint64_t seed) {
  const Size2 pano{1280, 720};
  TrackingFixture fx = grid_fixture(seed, pano, 2, 2, 3);
  fx.script.start = framed(group_centre(fx.labels, 0, 3), fx.script.frame_size, pano);
  fx.script.start_frames = 8;
  return fx;
}

}  // namespace lacmatch
