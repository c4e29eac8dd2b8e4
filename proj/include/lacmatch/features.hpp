#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "lacmatch/image.hpp"

namespace lacmatch {

/// Minimum keypoint distance from every border. Covers the rotated 31x31
/// BRIEF pattern and the rotated 32x32 BEBLID patch with its largest box.
inline constexpr int kFeatureBorder = 28;
inline constexpr int kOrientationRadius = 15;
/// Gaussian pre-smoothing applied before BRIEF tests in the extractor.
constexpr double kBriefSmoothingSigma = 2.0;
/// Lighter smoothing before BEBLID box sums; training patches see the same filter.
constexpr double kBeblidSmoothingSigma = 1.0;

struct Keypoint {
  Point2 position;
  float response = 0.0f;
  float angle = 0.0f;  // radians in [0, 2pi)
};

/// Read-only view of one descriptor inside some storage.
struct DescriptorView {
  std::span<const std::uint64_t> words;
  int bits = 0;

  bool bit(int k) const { return (words[k >> 6] >> (k & 63)) & 1u; }
};

/// Owning fixed-length bitstring.
class BinaryDescriptor {
 public:
  BinaryDescriptor() = default;
  explicit BinaryDescriptor(int bits);

  int bits() const { return bits_; }
  bool bit(int k) const { return (words_[k >> 6] >> (k & 63)) & 1u; }
  void set(int k, bool v);
  std::span<const std::uint64_t> words() const { return words_; }
  DescriptorView view() const { return {words_, bits_}; }

  friend bool operator==(const BinaryDescriptor&, const BinaryDescriptor&) = default;

 private:
  int bits_ = 0;
  std::vector<std::uint64_t> words_;
};

/// Contiguous storage for descriptors of one family (equal length).
class DescriptorSet {
 public:
  DescriptorSet() = default;
  explicit DescriptorSet(int bits) : bits_(bits), words_per_(words_for(bits)) {}

  static int words_for(int bits) { return (bits + 63) / 64; }

  int bits() const { return bits_; }
  int words_per_descriptor() const { return words_per_; }
  std::size_t size() const { return words_per_ ? data_.size() / words_per_ : 0; }
  bool empty() const { return size() == 0; }

  void push_back(const BinaryDescriptor& d);
  DescriptorView view(std::size_t i) const {
    return {std::span<const std::uint64_t>(data_).subspan(i * words_per_, words_per_), bits_};
  }
  const std::uint64_t* row(std::size_t i) const { return data_.data() + i * words_per_; }
  BinaryDescriptor at(std::size_t i) const;
  std::span<const std::uint64_t> raw() const { return data_; }

 private:
  int bits_ = 0;
  int words_per_ = 0;
  std::vector<std::uint64_t> data_;
};

/// FAST-9 on the 16-pixel Bresenham circle of radius 3, 3x3 non-max
/// suppression, intensity-centroid orientation. Sorted by descending
/// response (ties by row, then column); at most `max_count` returned; every
/// keypoint lies at least `border` pixels inside the image.
std::vector<Keypoint> detect_keypoints(const GrayImage& img, int fast_threshold, int max_count,
                                       int border = kFeatureBorder);

/// FAST-9 segment test at one pixel. Returns the corner response (sum of
/// absolute differences over the best contiguous arc) or 0 if not a corner.
int fast_score(const GrayImage& img, int x, int y, int threshold);

/// Intensity-centroid angle atan2(m01, m10) over the disc of `radius`,
/// mapped to [0, 2pi). Zero moments give 0.
double compute_orientation(const GrayImage& img, const Keypoint& kp,
                           int radius = kOrientationRadius);

struct BriefPair {
  std::int8_t ax, ay, bx, by;
};

/// The fixed 256-pair sampling pattern (31x31 patch).
std::span<const BriefPair> default_brief_pattern();

/// Rotated BRIEF: bit k = 1 iff I(a_k) < I(b_k) after rotating the pattern
/// by kp.angle. Throws BoundaryError if a sample leaves the image.
BinaryDescriptor compute_brief(const GrayImage& img, const Keypoint& kp,
                               std::span<const BriefPair> pattern = default_brief_pattern());

/// Convenience: BRIEF for every keypoint.
DescriptorSet compute_brief_all(const GrayImage& img, std::span<const Keypoint> kps);

}  // namespace lacmatch
