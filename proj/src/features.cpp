#include "lacmatch/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lacmatch/errors.hpp"

namespace lacmatch {

namespace {

constexpr std::array<std::array<int, 2>, 16> kCircle{{{0, -3}, {1, -3}, {2, -2}, {3, -1},
                                                      {3, 0},  {3, 1},  {2, 2},  {1, 3},
                                                      {0, 3},  {-1, 3}, {-2, 2}, {-3, 1},
                                                      {-3, 0}, {-3, -1}, {-2, -2}, {-1, -3}}};
constexpr int kArc = 9;

constexpr BriefPair kBriefPattern[] = {
#include "brief_pattern.inc"
};

int round_to_int(double v) { return static_cast<int>(std::floor(v + 0.5)); }

// Best sum of |d| over a contiguous (circular) run of >= kArc flagged entries.
int best_arc(const std::array<int, 16>& d, const std::array<bool, 16>& flag) {
  int start = -1;
  for (int i = 0; i < 16; ++i)
    if (!flag[i]) {
      start = i;
      break;
    }
  if (start < 0) {
    int s = 0;
    for (int v : d) s += std::abs(v);
    return s;
  }
  int best = 0;
  int run = 0;
  int sum = 0;
  for (int k = 1; k <= 16; ++k) {
    const int i = (start + k) % 16;
    if (flag[i]) {
      ++run;
      sum += std::abs(d[i]);
    } else {
      if (run >= kArc) best = std::max(best, sum);
      run = 0;
      sum = 0;
    }
  }
  return best;
}

}  // namespace

BinaryDescriptor::BinaryDescriptor(int bits)
    : bits_(bits), words_(static_cast<std::size_t>(DescriptorSet::words_for(bits)), 0) {}

void BinaryDescriptor::set(int k, bool v) {
  const std::uint64_t mask = std::uint64_t{1} << (k & 63);
  if (v)
    words_[k >> 6] |= mask;
  else
    words_[k >> 6] &= ~mask;
}

void DescriptorSet::push_back(const BinaryDescriptor& d) {
  if (words_per_ == 0 && data_.empty()) {
    bits_ = d.bits();
    words_per_ = words_for(bits_);
  }
  if (d.bits() != bits_) throw InputError("descriptor length mismatch in DescriptorSet");
  data_.insert(data_.end(), d.words().begin(), d.words().end());
}

BinaryDescriptor DescriptorSet::at(std::size_t i) const {
  BinaryDescriptor d(bits_);
  const auto v = view(i);
  for (int k = 0; k < bits_; ++k) d.set(k, v.bit(k));
  return d;
}

int fast_score(const GrayImage& img, int x, int y, int threshold) {
  const int p = img(x, y);
  const int hi = p + threshold;
  const int lo = p - threshold;

  // Any 9-arc contains at least two of the four compass pixels.
  int nb = 0;
  int nd = 0;
  for (int i = 0; i < 16; i += 4) {
    const int v = img(x + kCircle[i][0], y + kCircle[i][1]);
    nb += v > hi;
    nd += v < lo;
  }
  if (nb < 2 && nd < 2) return 0;

  std::array<int, 16> d{};
  std::array<bool, 16> bright{};
  std::array<bool, 16> dark{};
  for (int i = 0; i < 16; ++i) {
    const int v = img(x + kCircle[i][0], y + kCircle[i][1]);
    d[i] = v - p;
    bright[i] = v > hi;
    dark[i] = v < lo;
  }
  return std::max(nb >= 2 ? best_arc(d, bright) : 0, nd >= 2 ? best_arc(d, dark) : 0);
}

std::vector<Keypoint> detect_keypoints(const GrayImage& img, int fast_threshold, int max_count,
                                       int border) {
  border = std::max(border, 3);
  const int w = img.width();
  const int h = img.height();
  std::vector<Keypoint> out;
  if (w <= 2 * border || h <= 2 * border || max_count <= 0) return out;

  std::vector<int> score(static_cast<std::size_t>(w) * h, 0);
  for (int y = border; y < h - border; ++y)
    for (int x = border; x < w - border; ++x)
      score[static_cast<std::size_t>(y) * w + x] = fast_score(img, x, y, fast_threshold);

  struct Candidate {
    int score, x, y;
  };
  std::vector<Candidate> cands;
  for (int y = border; y < h - border; ++y) {
    for (int x = border; x < w - border; ++x) {
      const int s = score[static_cast<std::size_t>(y) * w + x];
      if (s <= 0) continue;
      bool keep = true;
      for (int dy = -1; dy <= 1 && keep; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int q = score[static_cast<std::size_t>(y + dy) * w + (x + dx)];
          // Plateaus keep their first pixel in raster order.
          const bool earlier = dy < 0 || (dy == 0 && dx < 0);
          if (q > s || (q == s && earlier)) {
            keep = false;
            break;
          }
        }
      }
      if (keep) cands.push_back({s, x, y});
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.y != b.y) return a.y < b.y;
    return a.x < b.x;
  });
  if (static_cast<int>(cands.size()) > max_count) cands.resize(static_cast<std::size_t>(max_count));

  out.reserve(cands.size());
  for (const auto& c : cands) {
    Keypoint kp;
    kp.position = {static_cast<double>(c.x), static_cast<double>(c.y)};
    kp.response = static_cast<float>(c.score);
    kp.angle = static_cast<float>(compute_orientation(img, kp));
    out.push_back(kp);
  }
  return out;
}

double compute_orientation(const GrayImage& img, const Keypoint& kp, int radius) {
  const int cx = round_to_int(kp.position.x);
  const int cy = round_to_int(kp.position.y);
  if (cx - radius < 0 || cy - radius < 0 || cx + radius >= img.width() ||
      cy + radius >= img.height())
    throw BoundaryError("orientation patch leaves the image");
  std::int64_t m10 = 0;
  std::int64_t m01 = 0;
  const int r2 = radius * radius;
  for (int dy = -radius; dy <= radius; ++dy) {
    const std::uint8_t* row = img.row(cy + dy);
    for (int dx = -radius; dx <= radius; ++dx) {
      if (dx * dx + dy * dy > r2) continue;
      const int v = row[cx + dx];
      m10 += static_cast<std::int64_t>(dx) * v;
      m01 += static_cast<std::int64_t>(dy) * v;
    }
  }
  if (m10 == 0 && m01 == 0) return 0.0;
  double a = std::atan2(static_cast<double>(m01), static_cast<double>(m10));
  if (a < 0) a += 2.0 * std::numbers::pi;
  if (a >= 2.0 * std::numbers::pi) a = 0.0;
  return a;
}

std::span<const BriefPair> default_brief_pattern() { return kBriefPattern; }

BinaryDescriptor compute_brief(const GrayImage& img, const Keypoint& kp,
                               std::span<const BriefPair> pattern) {
  const double c = std::cos(kp.angle);
  const double s = std::sin(kp.angle);
  const int cx = round_to_int(kp.position.x);
  const int cy = round_to_int(kp.position.y);
  BinaryDescriptor d(static_cast<int>(pattern.size()));
  for (std::size_t k = 0; k < pattern.size(); ++k) {
    const auto& p = pattern[k];
    const int ax = cx + round_to_int(c * p.ax - s * p.ay);
    const int ay = cy + round_to_int(s * p.ax + c * p.ay);
    const int bx = cx + round_to_int(c * p.bx - s * p.by);
    const int by = cy + round_to_int(s * p.bx + c * p.by);
    if (!img.inside(ax, ay) || !img.inside(bx, by))
      throw BoundaryError("BRIEF pattern leaves the image");
    if (img(ax, ay) < img(bx, by)) d.set(static_cast<int>(k), true);
  }
  return d;
}

DescriptorSet compute_brief_all(const GrayImage& img, std::span<const Keypoint> kps) {
  DescriptorSet set(static_cast<int>(default_brief_pattern().size()));
  for (const auto& kp : kps) set.push_back(compute_brief(img, kp));
  return set;
}

}  // namespace lacmatch
