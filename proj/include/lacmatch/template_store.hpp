#pragma once

#include <filesystem>
#include <string>

#include "lacmatch/lac.hpp"

namespace lacmatch {

/// What a cache was built with; match runs must describe frames the same way.
struct CacheInfo {
  std::string panorama;  // source path as given to prepare
  int k = 0;
  Size2 template_size;
  std::uint64_t seed = 0;
  int fast_threshold = 20;
  int max_keypoints = 2500;
  DescriptorKind descriptor = DescriptorKind::kBrief;
  bool has_beblid = false;  // beblid.lacb stored next to the manifest
};

/// Writes manifest.json, labels.json, topology.json, one template_NNN.lacf
/// per template and, for BEBLID caches, beblid.lacb.
void save_template_cache(const std::filesystem::path& dir, const TemplateSet& set,
                         const CacheInfo& info, const BeblidModel* beblid);

struct LoadedCache {
  TemplateSet set;
  CacheInfo info;
  FeatureConfig features;  // ready for describing frames
};

/// Throws MissingCacheError when the directory or a listed file is absent
/// and InputError when a file is malformed.
LoadedCache load_template_cache(const std::filesystem::path& dir);

/// Binary feature blob: "LACF", u16 version, u16 bits, u32 count,
/// u32 width, u32 height, then per keypoint f64 x, f64 y, f32 response,
/// f32 angle and the descriptor bytes, bit k in byte k / 8 at position
/// k % 8 (little-endian throughout).
void save_feature_set(const std::filesystem::path& path, const FeatureSet& fs);
FeatureSet load_feature_set(const std::filesystem::path& path);

}  // namespace lacmatch
