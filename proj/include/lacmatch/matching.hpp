#pragma once

#include <span>
#include <vector>

#include "lacmatch/features.hpp"
#include "lacmatch/image.hpp"

namespace lacmatch {

struct MatchPair {
  int query_idx = 0;  // frame keypoint
  int train_idx = 0;  // template keypoint
  int distance = 0;   // Hamming distance in bits

  friend bool operator==(const MatchPair&, const MatchPair&) = default;
};

/// Number of differing bits. Throws InputError on length mismatch.
int hamming(DescriptorView a, DescriptorView b);
inline int hamming(const BinaryDescriptor& a, const BinaryDescriptor& b) {
  return hamming(a.view(), b.view());
}

/// Nearest train descriptor for every query (ties -> lowest train index).
/// With cross_check, a pair survives only if it is also the query's
/// nearest from the train side (ties -> lowest query index).
/// Sorted by query_idx; empty input gives empty output.
std::vector<MatchPair> brute_force_match(const DescriptorSet& query, const DescriptorSet& train,
                                         bool cross_check);

struct GmsConfig {
  int grid_rows = 20;
  int grid_cols = 20;
  double alpha = 6.0;
  bool with_rotation = false;
};

struct GmsResult {
  std::vector<MatchPair> kept;      // sorted by query_idx
  std::vector<MatchPair> rejected;  // sorted by query_idx
  std::vector<bool> mask;           // aligned with the input matches
  std::vector<double> scores;       // neighbourhood support per input match (best offset)
};

/// Grid-based motion statistics. The frame is split into grid_rows x
/// grid_cols cells; the template side uses cells of the same pixel size.
/// For each frame cell the template cell receiving most of its matches is
/// scored over the 3x3 neighbourhoods; the cell pair is accepted when the
/// score exceeds alpha * sqrt(mean matches per non-empty frame cell).
/// Four half-cell grid offsets; a match is kept if any offset accepts it.
GmsResult gms_filter(std::span<const MatchPair> matches, std::span<const Keypoint> frame_kps,
                     std::span<const Keypoint> template_kps, Size2 frame_dims,
                     Size2 template_dims, const GmsConfig& cfg = {});

}  // namespace lacmatch
