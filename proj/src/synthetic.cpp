#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "lacmatch/errors.hpp"
#include "lacmatch/evaluation.hpp"
#include "lacmatch/rng.hpp"

namespace lacmatch {

namespace {

double lattice(std::int64_t ix, std::int64_t iy, std::uint64_t seed) {
  const std::uint64_t h = CounterRng::mix(seed ^ CounterRng::mix(static_cast<std::uint64_t>(ix) * 0x9e3779b97f4a7c15ULL ^
                                                                  CounterRng::mix(static_cast<std::uint64_t>(iy))));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double smooth(double t) { return t * t * (3.0 - 2.0 * t); }

double value_noise(double x, double y, double scale, std::uint64_t seed) {
  x /= scale;
  y /= scale;
  const double fx0 = std::floor(x);
  const double fy0 = std::floor(y);
  const auto ix = static_cast<std::int64_t>(fx0);
  const auto iy = static_cast<std::int64_t>(fy0);
  const double tx = smooth(x - fx0);
  const double ty = smooth(y - fy0);
  const double a = lattice(ix, iy, seed), b = lattice(ix + 1, iy, seed);
  const double c = lattice(ix, iy + 1, seed), d = lattice(ix + 1, iy + 1, seed);
  return (a * (1 - tx) + b * tx) * (1 - ty) + (c * (1 - tx) + d * tx) * ty;
}

// Adds amplitude * (noise - 0.5) over the whole canvas using a lattice grid.
void add_octave(std::vector<float>& canvas, Size2 size, double scale, double amplitude,
                std::uint64_t seed) {
  const int gw = static_cast<int>(size.width / scale) + 2;
  const int gh = static_cast<int>(size.height / scale) + 2;
  std::vector<float> grid(static_cast<std::size_t>(gw) * gh);
  for (int y = 0; y < gh; ++y)
    for (int x = 0; x < gw; ++x)
      grid[static_cast<std::size_t>(y) * gw + x] = static_cast<float>(lattice(x, y, seed));
  for (int y = 0; y < size.height; ++y) {
    const double gy = y / scale;
    const int iy = static_cast<int>(gy);
    const double ty = smooth(gy - iy);
    for (int x = 0; x < size.width; ++x) {
      const double gx = x / scale;
      const int ix = static_cast<int>(gx);
      const double tx = smooth(gx - ix);
      const float* r0 = &grid[static_cast<std::size_t>(iy) * gw + ix];
      const float* r1 = r0 + gw;
      const double v = (r0[0] * (1 - tx) + r0[1] * tx) * (1 - ty) + (r1[0] * (1 - tx) + r1[1] * tx) * ty;
      canvas[static_cast<std::size_t>(y) * size.width + x] += static_cast<float>(amplitude * (v - 0.5));
    }
  }
}

}  // namespace

GrayImage synthetic_panorama(Size2 size, std::uint64_t seed) {
  if (size.width < 1 || size.height < 1) throw InputError("panorama size must be positive");
  std::vector<float> canvas(static_cast<std::size_t>(size.width) * size.height, 110.0f);
  add_octave(canvas, size, 300.0, 90.0, derive_seed(seed, 1));
  add_octave(canvas, size, 60.0, 50.0, derive_seed(seed, 2));
  add_octave(canvas, size, 12.0, 24.0, derive_seed(seed, 3));
  add_octave(canvas, size, 3.0, 14.0, derive_seed(seed, 4));

  CounterRng rng(derive_seed(seed, 5));
  auto paint = [&](int x, int y, float value) {
    if (x < 0 || y < 0 || x >= size.width || y >= size.height) return;
    canvas[static_cast<std::size_t>(y) * size.width + x] = value;
  };

  const double area = static_cast<double>(size.width) * size.height;
  const int shapes = static_cast<int>(area / 2500.0);
  for (int s = 0; s < shapes; ++s) {
    const double kind = rng.uniform();
    const double base = rng.uniform(15.0, 240.0);
    const double tex_amp = rng.uniform(8.0, 35.0);
    const double tex_scale = rng.uniform(2.0, 7.0);
    const std::uint64_t tex_seed = rng.next_u64();
    const double cx = rng.uniform(0.0, size.width);
    const double cy = rng.uniform(0.0, size.height);
    auto shade = [&](int x, int y) {
      return static_cast<float>(base + tex_amp * (value_noise(x, y, tex_scale, tex_seed) - 0.5));
    };
    if (kind < 0.5) {
      const int w = static_cast<int>(rng.uniform(10.0, 90.0));
      const int h = static_cast<int>(rng.uniform(10.0, 90.0));
      const int x0 = static_cast<int>(cx) - w / 2, y0 = static_cast<int>(cy) - h / 2;
      for (int y = y0; y < y0 + h; ++y)
        for (int x = x0; x < x0 + w; ++x) paint(x, y, shade(x, y));
    } else if (kind < 0.8) {
      const double rx = rng.uniform(6.0, 45.0), ry = rng.uniform(6.0, 45.0);
      for (int y = static_cast<int>(cy - ry); y <= static_cast<int>(cy + ry); ++y)
        for (int x = static_cast<int>(cx - rx); x <= static_cast<int>(cx + rx); ++x) {
          const double u = (x - cx) / rx, v = (y - cy) / ry;
          if (u * u + v * v <= 1.0) paint(x, y, shade(x, y));
        }
    } else {
      const double len = rng.uniform(60.0, 300.0);
      const double thick = rng.uniform(3.0, 8.0);
      const double ang = rng.uniform(0.0, std::numbers::pi);
      const double dx = std::cos(ang), dy = std::sin(ang);
      const int reach = static_cast<int>(len / 2 + thick);
      for (int y = static_cast<int>(cy) - reach; y <= static_cast<int>(cy) + reach; ++y)
        for (int x = static_cast<int>(cx) - reach; x <= static_cast<int>(cx) + reach; ++x) {
          const double px = x - cx, py = y - cy;
          const double along = px * dx + py * dy;
          const double across = -px * dy + py * dx;
          if (std::abs(along) <= len / 2 && std::abs(across) <= thick / 2) paint(x, y, shade(x, y));
        }
    }
  }
  const int studs = static_cast<int>(area / 900.0);
  for (int s = 0; s < studs; ++s) {
    const int side = static_cast<int>(rng.uniform(3.0, 8.0));
    const int x0 = static_cast<int>(rng.uniform(0.0, size.width));
    const int y0 = static_cast<int>(rng.uniform(0.0, size.height));
    const float v = static_cast<float>(rng.uniform() < 0.5 ? rng.uniform(0.0, 60.0) : rng.uniform(190.0, 255.0));
    for (int y = y0; y < y0 + side; ++y)
      for (int x = x0; x < x0 + side; ++x) paint(x, y, v);
  }

  GrayImage img(size.width, size.height);
  auto px = img.pixels();
  for (std::size_t i = 0; i < px.size(); ++i)
    px[i] = static_cast<std::uint8_t>(std::clamp(std::lround(canvas[i]), 0L, 255L));
  return img;
}

std::vector<Label> synthetic_labels(Size2 panorama, int count, int groups, double sigma,
                                    double margin, std::uint64_t seed) {
  if (count < 1 || groups < 1) throw InputError("need at least one label and one group");
  CounterRng rng(seed);
  std::vector<Point2> centres;
  for (int g = 0; g < groups; ++g)
    centres.push_back({rng.uniform(margin + sigma, panorama.width - margin - sigma),
                       rng.uniform(margin + sigma, panorama.height - margin - sigma)});
  std::vector<Label> labels;
  for (int i = 0; i < count; ++i) {
    const Point2 c = centres[static_cast<std::size_t>(i % groups)];
    Label l;
    l.id = i + 1;
    l.name = "L" + std::to_string(i + 1);
    l.position = {std::clamp(rng.normal(c.x, sigma), margin, panorama.width - 1 - margin),
                  std::clamp(rng.normal(c.y, sigma), margin, panorama.height - 1 - margin)};
    labels.push_back(l);
  }
  return labels;
}

std::vector<Label> grid_labels(Size2 panorama, int cols, int rows, int per_group, double sigma,
                               std::uint64_t seed) {
  if (cols < 1 || rows < 1 || per_group < 1) throw InputError("label grid must be non-empty");
  CounterRng rng(seed);
  const double cw = static_cast<double>(panorama.width) / cols;
  const double ch = static_cast<double>(panorama.height) / rows;
  std::vector<Label> labels;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const Point2 centre{(c + 0.5 + rng.uniform(-0.1, 0.1)) * cw, (r + 0.5 + rng.uniform(-0.1, 0.1)) * ch};
      for (int i = 0; i < per_group; ++i) {
        Label l;
        l.id = static_cast<int>(labels.size()) + 1;
        l.name = "L" + std::to_string(l.id);
        l.position = {std::clamp(rng.normal(centre.x, sigma), 0.0, panorama.width - 1.0),
                      std::clamp(rng.normal(centre.y, sigma), 0.0, panorama.height - 1.0)};
        labels.push_back(l);
      }
    }
  return labels;
}

Homography view_to_panorama(const ViewPose& pose, Size2 frame) {
  Eigen::Matrix3d centre = Eigen::Matrix3d::Identity();
  centre(0, 2) = -frame.width / 2.0;
  centre(1, 2) = -frame.height / 2.0;
  Eigen::Matrix3d persp = Eigen::Matrix3d::Identity();
  persp(2, 0) = pose.tilt_x;
  persp(2, 1) = pose.tilt_y;
  const double c = std::cos(pose.angle) * pose.scale;
  const double s = std::sin(pose.angle) * pose.scale;
  Eigen::Matrix3d rs;
  rs << c, -s, 0, s, c, 0, 0, 0, 1;
  Eigen::Matrix3d place = Eigen::Matrix3d::Identity();
  place(0, 2) = pose.cx;
  place(1, 2) = pose.cy;
  return Homography(Eigen::Matrix3d(place * rs * persp * centre));
}

std::vector<ViewPose> MotionScript::poses() const {
  std::vector<ViewPose> out(static_cast<std::size_t>(std::max(0, start_frames)), start);
  ViewPose prev = start;
  for (const auto& seg : segments) {
    for (int f = 1; f <= seg.transition_frames; ++f) {
      const double t = static_cast<double>(f) / seg.transition_frames;
      ViewPose p;
      p.cx = prev.cx + t * (seg.target.cx - prev.cx);
      p.cy = prev.cy + t * (seg.target.cy - prev.cy);
      p.angle = prev.angle + t * (seg.target.angle - prev.angle);
      p.scale = prev.scale + t * (seg.target.scale - prev.scale);
      p.tilt_x = prev.tilt_x + t * (seg.target.tilt_x - prev.tilt_x);
      p.tilt_y = prev.tilt_y + t * (seg.target.tilt_y - prev.tilt_y);
      out.push_back(p);
    }
    for (int f = 0; f < seg.dwell_frames; ++f) out.push_back(seg.target);
    prev = seg.target;
  }
  return out;
}

GrayImage render_view(const GrayImage& panorama, const Homography& frame_to_panorama, Size2 frame) {
  GrayImage out(frame.width, frame.height);
  const auto& m = frame_to_panorama.matrix();
  for (int v = 0; v < frame.height; ++v) {
    for (int u = 0; u < frame.width; ++u) {
      const double w = m(2, 0) * u + m(2, 1) * v + m(2, 2);
      const double x = (m(0, 0) * u + m(0, 1) * v + m(0, 2)) / w;
      const double y = (m(1, 0) * u + m(1, 1) * v + m(1, 2)) / w;
      out(u, v) = static_cast<std::uint8_t>(std::lround(sample_bilinear(panorama, x, y)));
    }
  }
  return out;
}

void apply_noise(GrayImage& frame, const NoiseConfig& noise, std::uint64_t seed) {
  CounterRng rng(seed);
  if (noise.retexture_fraction > 0.0) {
    // Random occluder squares with foreign texture until roughly the
    // requested share of the frame is covered.
    const int side = std::max(1, noise.retexture_patch);
    const double area = static_cast<double>(frame.width()) * frame.height();
    const int count = static_cast<int>(std::ceil(noise.retexture_fraction * area / (side * side)));
    for (int i = 0; i < count; ++i) {
      const int x0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(frame.width()))) - side / 2;
      const int y0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(frame.height()))) - side / 2;
      const double base = rng.uniform(30.0, 220.0);
      const double scale = rng.uniform(2.0, 6.0);
      const std::uint64_t s = rng.next_u64();
      for (int y = y0; y < y0 + side; ++y)
        for (int x = x0; x < x0 + side; ++x)
          if (frame.inside(x, y))
            frame(x, y) = static_cast<std::uint8_t>(
                std::clamp(base + 120.0 * (value_noise(x, y, scale, s) - 0.5), 0.0, 255.0));
    }
  }
  const double gain = 1.0 + rng.uniform(-noise.gain_jitter, noise.gain_jitter);
  if (noise.gain_jitter == 0.0 && noise.pixel_sigma == 0.0) return;
  for (auto& p : frame.pixels()) {
    double v = gain * p;
    if (noise.pixel_sigma > 0.0) v += rng.normal(0.0, noise.pixel_sigma);
    p = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
  }
}

SyntheticSequence generate_sequence(const GrayImage& panorama, const MotionScript& script,
                                    const NoiseConfig& noise, std::uint64_t seed) {
  SyntheticSequence seq;
  seq.frame_size = script.frame_size;
  seq.noise = noise;
  seq.seed = seed;
  const auto poses = script.poses();
  CounterRng shake(derive_seed(seed, 0x5a4e));
  const Size2 fs = script.frame_size;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    ViewPose p = poses[i];
    if (script.shake_sigma > 0.0) {
      p.cx += shake.normal(0.0, script.shake_sigma);
      p.cy += shake.normal(0.0, script.shake_sigma);
    }
    const Homography to_pano = view_to_panorama(p, fs);
    for (Point2 corner : {Point2{0, 0}, Point2{fs.width - 1.0, 0}, Point2{0, fs.height - 1.0},
                          Point2{fs.width - 1.0, fs.height - 1.0}}) {
      const Point2 q = project_point(to_pano, corner);
      if (q.x < 0 || q.y < 0 || q.x > panorama.width() - 1 || q.y > panorama.height() - 1)
        throw InputError("motion script leaves the panorama at frame " + std::to_string(i));
    }
    GrayImage frame = render_view(panorama, to_pano, fs);
    apply_noise(frame, noise, derive_seed(seed, i));
    seq.truth.push_back(to_pano.inverse());
    seq.frames.push_back(std::move(frame));
  }
  return seq;
}

GrayImage extract_patch(const GrayImage& img, Point2 center, double angle, int side) {
  GrayImage out(side, side);
  const double c = std::cos(angle), s = std::sin(angle);
  const double half = side / 2;
  for (int v = 0; v < side; ++v)
    for (int u = 0; u < side; ++u) {
      const double ox = u - half, oy = v - half;
      out(u, v) = static_cast<std::uint8_t>(std::lround(
          sample_bilinear(img, center.x + c * ox - s * oy, center.y + s * ox + c * oy)));
    }
  return out;
}

std::vector<PatchPairSample> generate_patch_pairs(const GrayImage& image, int count,
                                                  std::uint64_t seed, int patch_side) {
  const auto kps = detect_keypoints(image, 20, 4000);
  if (kps.size() < 2) throw InputError("image has too few corners for patch pairs");
  CounterRng rng(seed);
  constexpr int kWindow = 72;
  const GrayImage smoothed = gaussian_blur(image, kBeblidSmoothingSigma);
  constexpr double kCentre = kWindow / 2.0;

  // Patch around kp (offset by `shift` in image pixels) seen through a
  // random local similarity plus noise.
  auto warped_patch = [&](const Keypoint& kp, Point2 shift) {
    const double ang = rng.uniform(-std::numbers::pi, std::numbers::pi);
    const double scale = rng.uniform(0.92, 1.08);
    const double jx = rng.normal(0.0, 0.5) + shift.x, jy = rng.normal(0.0, 0.5) + shift.y;
    const double c = std::cos(ang) / scale, s = std::sin(ang) / scale;
    GrayImage window(kWindow, kWindow);
    for (int v = 0; v < kWindow; ++v)
      for (int u = 0; u < kWindow; ++u) {
        const double ox = u - kCentre, oy = v - kCentre;
        window(u, v) = static_cast<std::uint8_t>(std::lround(sample_bilinear(
            image, kp.position.x + jx + c * ox - s * oy, kp.position.y + jy + s * ox + c * oy)));
      }
    NoiseConfig n;
    n.pixel_sigma = rng.uniform(1.0, 5.0);
    n.gain_jitter = 0.1;
    apply_noise(window, n, rng.next_u64());
    window = gaussian_blur(window, kBeblidSmoothingSigma);
    Keypoint local;
    local.position = {kCentre, kCentre};
    const double theta = compute_orientation(window, local);
    return extract_patch(window, local.position, theta, patch_side);
  };

  std::vector<PatchPairSample> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const auto& a = kps[rng.below(kps.size())];
    PatchPairSample s;
    s.x = extract_patch(smoothed, a.position, a.angle, patch_side);
    if (i % 2 == 0) {
      s.y = warped_patch(a, {});
      s.label = 1;
    } else if (i % 4 == 1) {
      const Keypoint* b = &kps[rng.below(kps.size())];
      while (distance(b->position, a.position) < 8.0) b = &kps[rng.below(kps.size())];
      s.y = warped_patch(*b, {});
      s.label = -1;
    } else {
      // Same structure, mislocated: teaches the descriptor to reject
      // correspondences that would fail a few-pixel reprojection test.
      const double r = rng.uniform(3.0, 6.0);
      const double t = rng.uniform(0.0, 2.0 * std::numbers::pi);
      s.y = warped_patch(a, {r * std::cos(t), r * std::sin(t)});
      s.label = -1;
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<PatchPairSample> synthetic_patch_pairs(int count, std::uint64_t seed) {
  // Softened like a resampled camera view.
  const GrayImage img = gaussian_blur(synthetic_panorama({1200, 800}, derive_seed(seed, 0xbeb1)),
                                      kBeblidSmoothingSigma);
  return generate_patch_pairs(img, count, derive_seed(seed, 0xbeb2));
}

BeblidTrainReport train_synthetic_beblid(int pairs, const BeblidTrainOptions& options) {
  const auto samples = synthetic_patch_pairs(pairs, options.seed);
  return train_beblid(samples, beblid_candidate_grid(), options);
}

}  // namespace lacmatch
