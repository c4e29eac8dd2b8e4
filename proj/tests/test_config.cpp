#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <json.hpp>

#include "lacmatch/config.hpp"
#include "lacmatch/errors.hpp"
#include "lacmatch/labels.hpp"
#include "lacmatch/template_store.hpp"
#include "support.hpp"

using namespace lacmatch;

namespace {

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

RunConfig parsed(const std::string& text) {
  testing::TempDir dir("cfg");
  write_text(dir / "run.toml", text);
  RunConfig cfg;
  apply_config_file(cfg, dir / "run.toml");
  return cfg;
}

}  // namespace

TEST_CASE("defaults validate and carry the standard settings") {
  const RunConfig cfg;
  CHECK_NOTHROW(validate(cfg));
  CHECK(cfg.max_keypoints == 2500);
  CHECK(cfg.seed == kDefaultSeed);
  CHECK(cfg.reps == 10);
  CHECK(selected_variants(cfg).size() == 4);
}

TEST_CASE("max_keypoints below 100 is rejected") {
  RunConfig cfg;
  cfg.max_keypoints = 99;
  CHECK_THROWS_AS(validate(cfg), InputError);
  cfg.max_keypoints = 100;
  CHECK_NOTHROW(validate(cfg));
}

TEST_CASE("range checks") {
  auto rejects = [](const char* key, const char* value) {
    RunConfig cfg;
    set_value(cfg, key, value);
    return [cfg] { validate(cfg); };
  };
  CHECK_THROWS_AS(rejects("features.descriptor", "sift")(), InputError);
  CHECK_THROWS_AS(rejects("homography.estimator", "lmeds")(), InputError);
  CHECK_THROWS_AS(rejects("homography.confidence", "1.0")(), InputError);
  CHECK_THROWS_AS(rejects("lac.lambda", "1.5")(), InputError);
  CHECK_THROWS_AS(rejects("bench.variants", "orb_gms_ransac,bogus")(), InputError);
  CHECK_THROWS_AS(rejects("train.quantiles", "300")(), InputError);
}

TEST_CASE("set_value parses types and rejects bad input") {
  RunConfig cfg;
  set_value(cfg, "lac.k", "5");
  set_value(cfg, "lac.beta", "0.25");
  set_value(cfg, "lac.use_local_area", "false");
  set_value(cfg, "paths.out", "results");
  set_value(cfg, "run.seed", "18446744073709551615");
  CHECK(cfg.k == 5);
  CHECK(cfg.beta == 0.25);
  CHECK_FALSE(cfg.use_local_area);
  CHECK(cfg.out == "results");
  CHECK(cfg.seed == 18446744073709551615ULL);
  CHECK_THROWS_AS(set_value(cfg, "lac.k", "five"), InputError);
  CHECK_THROWS_AS(set_value(cfg, "lac.k", "5x"), InputError);
  CHECK_THROWS_AS(set_value(cfg, "lac.use_local_area", "maybe"), InputError);
  CHECK_THROWS_AS(set_value(cfg, "lac.colour", "red"), InputError);
}

TEST_CASE("config file with sections, comments and quoted strings") {
  const RunConfig cfg = parsed(
      "# run settings\n"
      "[features]\n"
      "max_keypoints = 1200  # fewer\n"
      "descriptor = \"brief\"\n"
      "\n"
      "[lac]\n"
      "k = 4\n"
      "polar_refinement = false\n"
      "[paths]\n"
      "out = 'out dir # not a comment'\n");
  CHECK(cfg.max_keypoints == 1200);
  CHECK(cfg.k == 4);
  CHECK_FALSE(cfg.polar_refinement);
  CHECK(cfg.out == "out dir # not a comment");
}

TEST_CASE("config file errors name the problem") {
  CHECK_THROWS_AS(parsed("[lac]\nunknown_key = 1\n"), InputError);
  CHECK_THROWS_AS(parsed("k = 4\n"), InputError);
  CHECK_THROWS_AS(parsed("[lac]\nk 4\n"), InputError);
  RunConfig cfg;
  CHECK_THROWS_AS(apply_config_file(cfg, "/nonexistent/run.toml"), InputError);
}

TEST_CASE("config text round trips") {
  RunConfig a;
  a.k = 7;
  a.beta = 0.125;
  a.out = "some dir";
  a.variants = "orb_ransac,beblid_gms_degensac";
  a.seed = 99;
  RunConfig b = parsed(to_config_text(a));
  CHECK(config_entries(a) == config_entries(b));
}

TEST_CASE("a run manifest works as a config file") {
  RunConfig a;
  a.k = 3;
  a.lambda = 0.3;
  a.frames = "/data/frames";
  a.seed = 123456789012345ULL;
  const std::string manifest = run_manifest_json(a, "match", {"trace.csv"});
  const auto j = nlohmann::json::parse(manifest);
  CHECK(j["command"] == "match");
  CHECK(j["version"] == kVersion);
  CHECK(j["seeds"]["run"] == 123456789012345ULL);
  CHECK(j["config"]["lac"]["k"] == 3);
  CHECK(j["artifacts"][0] == "trace.csv");

  testing::TempDir dir("manifest");
  write_text(dir / "run_manifest.json", manifest);
  RunConfig b;
  apply_config_file(b, dir / "run_manifest.json");
  CHECK(config_entries(a) == config_entries(b));
}

TEST_CASE("BEBLID descriptor needs a model path") {
  RunConfig cfg;
  cfg.descriptor = "beblid";
  CHECK_THROWS_AS(feature_config(cfg), InputError);
  cfg.beblid_model = "/nonexistent/model.lacb";
  CHECK_THROWS_AS(feature_config(cfg), InputError);
}

TEST_CASE("labels file round trip and validation") {
  testing::TempDir dir("labels");
  const std::vector<Label> labels{{1, "pump", {10.5, 20}}, {2, "valve \"A\"", {30, 40.25}}};
  write_labels_file(dir / "labels.json", "pano.png", labels);
  const auto back = read_labels_file(dir / "labels.json");
  CHECK(back.panorama == dir / "pano.png");
  REQUIRE(back.labels.size() == 2);
  CHECK(back.labels[1].name == "valve \"A\"");
  CHECK(back.labels[1].position.y == 40.25);

  write_text(dir / "dup.json", R"({"panorama": "p.png", "labels": [{"id": 1, "name": "a", "x": 1, "y": 1},
                                   {"id": 1, "name": "b", "x": 2, "y": 2}]})");
  CHECK_THROWS_AS(read_labels_file(dir / "dup.json"), InputError);
  write_text(dir / "bad.json", "{\"labels\": 3}");
  CHECK_THROWS_AS(read_labels_file(dir / "bad.json"), InputError);
  CHECK_THROWS_AS(validate_labels(labels, {20, 50}), InputError);
  CHECK_NOTHROW(validate_labels(labels, {100, 100}));
}

TEST_CASE("template cache round trip") {
  const GrayImage pano = synthetic_panorama({900, 600}, 31);
  const auto labels = synthetic_labels(pano.size(), 8, 2, 20.0, 120.0, 32);
  SegmentConfig seg;
  seg.k = 2;
  seg.seed = 5;
  const TemplateSet set = prepare_templates(pano, labels, seg, FeatureConfig{});
  CacheInfo info;
  info.panorama = "pano.png";
  info.k = 2;
  info.template_size = {set.templates[0].rect.w, set.templates[0].rect.h};
  info.seed = 5;

  testing::TempDir dir("cache");
  save_template_cache(dir.path(), set, info, nullptr);
  const auto loaded = load_template_cache(dir.path());
  CHECK(loaded.info.k == 2);
  CHECK(loaded.info.seed == 5);
  CHECK(loaded.info.panorama == "pano.png");
  CHECK(loaded.features.descriptor == DescriptorKind::kBrief);
  CHECK(loaded.set.panorama_size == set.panorama_size);
  REQUIRE(loaded.set.templates.size() == set.templates.size());
  for (std::size_t t = 0; t < set.templates.size(); ++t) {
    const auto& a = set.templates[t];
    const auto& b = loaded.set.templates[t];
    CHECK((a.rect.x == b.rect.x && a.rect.y == b.rect.y && a.rect.w == b.rect.w && a.rect.h == b.rect.h));
    CHECK(a.label_ids == b.label_ids);
    REQUIRE(a.features.keypoints.size() == b.features.keypoints.size());
    CHECK(std::ranges::equal(a.features.descriptors.raw(), b.features.descriptors.raw()));
    for (std::size_t i = 0; i < a.features.keypoints.size(); ++i) {
      CHECK(a.features.keypoints[i].position.x == b.features.keypoints[i].position.x);
      CHECK(a.features.keypoints[i].angle == b.features.keypoints[i].angle);
    }
  }
  REQUIRE(loaded.set.labels.size() == labels.size());
  CHECK(loaded.set.topology.to_json() == set.topology.to_json());
}

TEST_CASE("missing or damaged cache") {
  testing::TempDir dir("nocache");
  CHECK_THROWS_AS(load_template_cache(dir / "absent"), MissingCacheError);
  CHECK_THROWS_AS(load_template_cache(dir.path()), MissingCacheError);

  const GrayImage pano = synthetic_panorama({600, 400}, 3);
  const std::vector<Label> labels{{1, "a", {200, 200}}, {2, "b", {260, 210}}};
  SegmentConfig seg;
  seg.k = 1;
  const TemplateSet set = prepare_templates(pano, labels, seg, FeatureConfig{});
  save_template_cache(dir / "c", set, CacheInfo{}, nullptr);
  std::filesystem::path blob;
  for (const auto& e : std::filesystem::directory_iterator(dir / "c"))
    if (e.path().extension() == ".lacf") blob = e.path();
  REQUIRE_FALSE(blob.empty());
  write_text(blob, "LACF garbage");
  CHECK_THROWS_AS(load_template_cache(dir / "c"), InputError);
  std::filesystem::remove(blob);
  CHECK_THROWS_AS(load_template_cache(dir / "c"), MissingCacheError);
}

TEST_CASE("feature blob round trip keeps the exact bits") {
  const GrayImage img = synthetic_panorama({400, 300}, 8);
  const FeatureSet fs = extract_features(img, FeatureConfig{});
  testing::TempDir dir("blob");
  save_feature_set(dir / "f.lacf", fs);
  const FeatureSet back = load_feature_set(dir / "f.lacf");
  CHECK(back.image_size == fs.image_size);
  REQUIRE(back.keypoints.size() == fs.keypoints.size());
  CHECK(std::ranges::equal(back.descriptors.raw(), fs.descriptors.raw()));
  for (std::size_t i = 0; i < fs.keypoints.size(); ++i) {
    CHECK(back.keypoints[i].position.y == fs.keypoints[i].position.y);
    CHECK(back.keypoints[i].response == fs.keypoints[i].response);
  }
}
