#include "lacmatch/extractor.hpp"

#include "lacmatch/errors.hpp"

namespace lacmatch {

std::string to_string(DescriptorKind kind) {
  return kind == DescriptorKind::kBeblid ? "beblid" : "brief";
}

DescriptorKind descriptor_kind_from_string(const std::string& s) {
  if (s == "brief") return DescriptorKind::kBrief;
  if (s == "beblid") return DescriptorKind::kBeblid;
  throw InputError("unknown descriptor '" + s + "' (expected brief or beblid)");
}

FeatureSet extract_features(const GrayImage& img, const FeatureConfig& cfg) {
  FeatureSet out;
  out.image_size = img.size();
  out.keypoints = detect_keypoints(img, cfg.fast_threshold, cfg.max_keypoints);
  if (cfg.descriptor == DescriptorKind::kBeblid) {
    if (!cfg.beblid) throw InputError("BEBLID descriptor requested without a model");
    const IntegralImage ii(gaussian_blur(img, kBeblidSmoothingSigma));
    out.descriptors = compute_beblid_all(ii, out.keypoints, *cfg.beblid);
  } else {
    // Intensity tests on the smoothed image, as in ORB.
    out.descriptors = compute_brief_all(gaussian_blur(img, kBriefSmoothingSigma), out.keypoints);
  }
  return out;
}

}  // namespace lacmatch
