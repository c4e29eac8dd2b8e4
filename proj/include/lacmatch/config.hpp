#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "lacmatch/evaluation.hpp"
#include "lacmatch/lac.hpp"

namespace lacmatch {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr std::uint64_t kDefaultSeed = 20240531;

/// Every tunable of a command-line run. Keys are "section.name".
struct RunConfig {
  // [paths]
  std::string panorama;
  std::string labels;
  std::string frames;
  std::string cache = "cache";
  std::string out = "out";
  std::string beblid_model;
  std::string patches;

  // [features]
  int fast_threshold = 20;
  int max_keypoints = 2500;
  std::string descriptor = "brief";

  // [gms]
  GmsConfig gms;
  bool cross_check = false;

  // [homography]
  double reproj_tol = 3.0;
  int max_iter = 2000;
  double confidence = 0.995;
  std::string estimator = "degensac";

  // [lac]
  int k = 0;
  int template_width = 0;
  int template_height = 0;
  int history = 3;
  double beta = 0.2;
  double lambda = 0.5;
  double support_radius = 50.0;
  int min_inliers = 10;
  bool use_local_area = true;
  bool polar_refinement = true;
  bool fallback_full_search = true;
  int kmeans_max_iter = 100;
  int kmeans_restarts = 8;

  // [bench]
  int reps = 10;
  std::string variants = "all";
  int bench_frames = 4;
  int bench_width = 960;
  int bench_height = 540;
  bool record_timing = true;

  // [drift]
  std::string fixture = "jittered_pan";
  bool lac_off_only = false;

  // [train]
  int rounds = 256;
  double gamma = 1.0;
  int candidate_budget = 2000;
  int quantiles = 16;
  int synthetic_pairs = 4000;

  // [run]
  std::uint64_t seed = kDefaultSeed;
  bool overlay = false;
};

/// Sets one key from its text form. Throws InputError for unknown keys or
/// unparsable values.
void set_value(RunConfig& cfg, const std::string& key, const std::string& value);

/// All keys with their text values, in a fixed order.
std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& cfg);

/// Applies a key = value file with [section] headers (TOML subset:
/// comments, quoted or bare strings, numbers, booleans), or the "config"
/// object of a run manifest when the file ends in .json.
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);

/// Key = value text that apply_config_file reads back unchanged.
std::string to_config_text(const RunConfig& cfg);

/// Range checks (max_keypoints >= 100, positive sizes, known enums...).
void validate(const RunConfig& cfg);

/// Run manifest: resolved config, seeds, versions and produced artifacts.
std::string run_manifest_json(const RunConfig& cfg, const std::string& command,
                              const std::vector<std::string>& artifacts);

FeatureConfig feature_config(const RunConfig& cfg);  // loads the BEBLID model if needed
SegmentConfig segment_config(const RunConfig& cfg);
PipelineConfig pipeline_config(const RunConfig& cfg, const FeatureConfig& features);
RobustConfig robust_config(const RunConfig& cfg);
MatchConfig match_config(const RunConfig& cfg);
Estimator estimator_from_string(const std::string& s);
std::vector<Variant> selected_variants(const RunConfig& cfg);

}  // namespace lacmatch
