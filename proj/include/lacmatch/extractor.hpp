#pragma once

#include <memory>
#include <string>
#include <vector>

#include "lacmatch/beblid.hpp"
#include "lacmatch/features.hpp"

namespace lacmatch {

enum class DescriptorKind { kBrief, kBeblid };

std::string to_string(DescriptorKind kind);
DescriptorKind descriptor_kind_from_string(const std::string& s);

struct FeatureConfig {
  int fast_threshold = 20;
  int max_keypoints = 2500;
  DescriptorKind descriptor = DescriptorKind::kBrief;
  std::shared_ptr<const BeblidModel> beblid;  // required for kBeblid
};

/// Keypoints with their descriptors, computed once per image.
struct FeatureSet {
  Size2 image_size;
  std::vector<Keypoint> keypoints;
  DescriptorSet descriptors;
};

FeatureSet extract_features(const GrayImage& img, const FeatureConfig& cfg);

}  // namespace lacmatch
