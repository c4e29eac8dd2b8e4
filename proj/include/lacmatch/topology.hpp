#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lacmatch/labels.hpp"

namespace lacmatch {

struct PolarRelation {
  double distance = 0.0;
  double angle = 0.0;  // atan2(dy, dx) in [0, 2pi)
};

/// Distance and bearing for every ordered pair of labels.
class LabelTopology {
 public:
  LabelTopology() = default;
  explicit LabelTopology(std::span<const Label> labels);

  /// Relation from label `from` to label `to`; nullopt for unknown ids.
  /// relation(i, i) is {0, 0}.
  std::optional<PolarRelation> relation(int from, int to) const;
  const std::vector<int>& ids() const { return ids_; }
  /// Number of stored ordered pairs (i != j).
  std::size_t pair_count() const { return relations_.size(); }

  /// {"pairs": [{"from", "to", "distance", "angle"}]} with 6 decimals.
  std::string to_json() const;

 private:
  std::vector<int> ids_;
  std::map<std::pair<int, int>, PolarRelation> relations_;
};

LabelTopology build_topology(std::span<const Label> labels);

/// Polar refinement of projected label positions.
///  anchor  = label with the highest support (ties -> lowest id)
///  (s, phi) = least-squares similarity over all projected pairs vs topology
///  pred_j  = anchor + s * d_aj * (cos(theta_aj + phi), sin(theta_aj + phi))
///  out_j   = (1 - lambda) * projected_j + lambda * pred_j; anchor unchanged.
/// Fewer than two labels are returned unchanged. Throws InputError for
/// lambda outside [0, 1].
LabelPositions refine_labels_polar(const LabelPositions& projected, const LabelTopology& topology,
                                   const std::map<int, double>& support, double lambda);

/// Support per label: number of `inlier_points` within `radius` px.
std::map<int, double> label_support(const LabelPositions& projected,
                                    std::span<const Point2> inlier_points, double radius = 50.0);

}  // namespace lacmatch
