#include <doctest.h>

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "cli.hpp"
#include "lacmatch/config.hpp"
#include "lacmatch/evaluation.hpp"
#include "lacmatch/image_io.hpp"
#include "lacmatch/labels.hpp"
#include "lacmatch/template_store.hpp"
#include "support.hpp"

using namespace lacmatch;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

Outcome lacmatch_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  Outcome o;
  o.code = cli::run(args, out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

// Panorama with nine labels in three groups, written as PNG + labels.json.
void write_scene(const testing::TempDir& dir) {
  const GrayImage pano = synthetic_panorama({1200, 800}, 41);
  write_png(dir / "pano.png", pano);
  write_labels_file(dir / "labels.json", "pano.png", synthetic_labels(pano.size(), 9, 3, 25.0, 150.0, 42));
}

}  // namespace

TEST_CASE("help, version and parse errors") {
  CHECK(lacmatch_cli({"--help"}).code == 0);
  const auto v = lacmatch_cli({"--version"});
  CHECK(v.code == 0);
  CHECK(v.out.find('.') != std::string::npos);
  CHECK(lacmatch_cli({}).code == 2);
  CHECK(lacmatch_cli({"fly"}).code == 2);
  CHECK(lacmatch_cli({"prepare", "--bogus", "1"}).code == 2);
  CHECK(lacmatch_cli({"--set", "lac.colour=red", "prepare"}).code == 2);
  CHECK(lacmatch_cli({"--set", "features.max_keypoints=50", "prepare"}).code == 2);
}

TEST_CASE("prepare with k = 3 writes three templates and a manifest") {
  testing::TempDir dir("prep");
  write_scene(dir);
  const auto r = lacmatch_cli({"prepare", "--labels", (dir / "labels.json").string(), "--cache",
                               (dir / "cache").string(), "--k", "3"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(r.out.find("prepared 3 templates") != std::string::npos);
  const auto loaded = load_template_cache(dir / "cache");
  CHECK(loaded.set.templates.size() == 3);
  const auto manifest = nlohmann::json::parse(slurp(dir / "cache" / "run_manifest.json"));
  CHECK(manifest["command"] == "prepare");
  CHECK(manifest["config"]["lac"]["k"] == 3);
  CHECK(manifest["seeds"]["run"].get<std::uint64_t>() == kDefaultSeed);
}

TEST_CASE("prepare input errors") {
  testing::TempDir dir("prep_err");
  write_scene(dir);
  const auto missing = lacmatch_cli({"prepare", "--labels", (dir / "nope.json").string(), "--cache",
                                     (dir / "cache").string()});
  CHECK(missing.code == 2);
  CHECK(missing.err.find("nope.json") != std::string::npos);

  const auto infeasible = lacmatch_cli({"prepare", "--labels", (dir / "labels.json").string(), "--cache",
                                        (dir / "cache").string(), "--k", "12"});
  CHECK(infeasible.code == 3);
  CHECK(infeasible.err.find("infeasible") != std::string::npos);
}

TEST_CASE("match input errors") {
  testing::TempDir dir("match_err");
  write_scene(dir);
  fs::create_directories(dir / "empty");
  REQUIRE(lacmatch_cli({"prepare", "--labels", (dir / "labels.json").string(), "--cache",
                        (dir / "cache").string(), "--k", "3"})
              .code == 0);
  const auto empty = lacmatch_cli({"--out", (dir / "o").string(), "match", "--cache", (dir / "cache").string(),
                                   "--frames", (dir / "empty").string()});
  CHECK(empty.code == 2);
  fs::create_directories(dir / "frames");
  write_png(dir / "frames" / "frame_000001.png", synthetic_panorama({320, 240}, 1));
  const auto nocache = lacmatch_cli({"--out", (dir / "o").string(), "match", "--cache",
                                     (dir / "absent").string(), "--frames", (dir / "frames").string()});
  CHECK(nocache.code == 4);
  CHECK(nocache.err.find("prepare") != std::string::npos);
}

TEST_CASE("identity frames put every label at its template position") {
  testing::TempDir dir("identity");
  const GrayImage pano = synthetic_panorama({640, 480}, 43);
  write_png(dir / "pano.png", pano);
  const std::vector<Label> labels{{1, "pump", {200, 180}}, {2, "valve", {420, 300}}, {3, "gauge", {300, 120}}};
  write_labels_file(dir / "labels.json", "pano.png", labels);
  fs::create_directories(dir / "frames");
  for (int i = 1; i <= 3; ++i) write_png(dir / "frames" / ("frame_00000" + std::to_string(i) + ".png"), pano);

  REQUIRE(lacmatch_cli({"prepare", "--labels", (dir / "labels.json").string(), "--cache",
                        (dir / "cache").string(), "--k", "1"})
              .code == 0);
  const Rect rect = load_template_cache(dir / "cache").set.templates.at(0).rect;
  const auto r = lacmatch_cli({"--out", (dir / "out").string(), "--overlay", "match", "--cache",
                               (dir / "cache").string(), "--frames", (dir / "frames").string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(r.out.find("ok 3, no_match 0") != std::string::npos);
  CHECK(fs::exists(dir / "out" / "overlay" / "frame_000001.png"));

  const auto rows = lines(slurp(dir / "out" / "trace.csv"));
  REQUIRE(rows.size() == 1 + 3 * labels.size());
  for (std::size_t i = 1; i < rows.size(); ++i) {
    int frame = 0, id = 0, stale = 0;
    double rel = 0, x = 0, y = 0;
    REQUIRE(std::sscanf(rows[i].c_str(), "%d,%d,%lf,%lf,%lf,%d", &frame, &id, &rel, &x, &y, &stale) == 6);
    const Point2 want = labels[static_cast<std::size_t>(id - 1)].position - Point2{double(rect.x), double(rect.y)};
    CAPTURE(rows[i]);
    CHECK(std::abs(x - want.x) < 0.5);
    CHECK(std::abs(y - want.y) < 0.5);
    CHECK(stale == 0);
  }
}

TEST_CASE("match is reproducible, also when rerun from its manifest") {
  testing::TempDir dir("rerun");
  REQUIRE(lacmatch_cli({"--out", (dir / "fx").string(), "synth", "--fixture", "stationary"}).code == 0);
  REQUIRE(lacmatch_cli({"prepare", "--labels", (dir / "fx" / "labels.json").string(), "--cache",
                        (dir / "cache").string(), "--k", "4"})
              .code == 0);
  const std::vector<std::string> args{"--out", (dir / "a").string(), "match", "--cache", (dir / "cache").string(),
                                      "--frames", (dir / "fx" / "frames").string()};
  REQUIRE(lacmatch_cli(args).code == 0);
  auto again = args;
  again[1] = (dir / "b").string();
  REQUIRE(lacmatch_cli(again).code == 0);
  const auto c = lacmatch_cli({"--config", (dir / "a" / "run_manifest.json").string(), "--out",
                               (dir / "c").string(), "match"});
  REQUIRE_MESSAGE(c.code == 0, c.err);
  const std::string trace = slurp(dir / "a" / "trace.csv");
  CHECK(trace.size() > 100);
  CHECK(trace == slurp(dir / "b" / "trace.csv"));
  CHECK(trace == slurp(dir / "c" / "trace.csv"));
}

TEST_CASE("bench: single variant and single rep") {
  testing::TempDir dir("bench");
  const std::vector<std::string> small{"--set", "bench.width=320", "--set", "bench.height=240",
                                       "--set", "bench.frames=1"};
  auto args = small;
  args.insert(args.end(), {"--out", (dir / "one").string(), "--reps", "1", "bench", "--variant", "orb_ransac",
                           "--no-timing"});
  const auto r = lacmatch_cli(args);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto rows = lines(slurp(dir / "one" / "rates.csv"));
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].rfind("orb_ransac,0,", 0) == 0);
  CHECK(rows[1].substr(rows[1].size() - 9) == ",0.000000");
  CHECK(fs::exists(dir / "one" / "rates.txt"));
  CHECK(fs::exists(dir / "one" / "run_manifest.json"));

  args = small;
  args.insert(args.end(), {"--out", (dir / "two").string(), "--reps", "2", "bench", "--variant", "orb_ransac",
                           "--variant", "orb_gms_ransac"});
  REQUIRE(lacmatch_cli(args).code == 0);
  const auto rows2 = lines(slurp(dir / "two" / "rates.csv"));
  REQUIRE(rows2.size() == 5);
  CHECK(rows2[3].rfind("orb_ransac,1,", 0) == 0);
}

TEST_CASE("bench on frames with a truth sidecar") {
  testing::TempDir dir("bench_frames");
  REQUIRE(lacmatch_cli({"--set", "bench.width=320", "--set", "bench.height=240", "--set", "bench.frames=2",
                        "--out", (dir / "fx").string(), "synth", "--fixture", "contaminated"})
              .code == 0);
  CHECK(fs::exists(dir / "fx" / "frames" / "truth.json"));
  const auto r = lacmatch_cli({"--out", (dir / "b").string(), "--reps", "1", "bench", "--frames",
                               (dir / "fx" / "frames").string(), "--variant", "orb_gms_ransac"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(lines(slurp(dir / "b" / "rates.csv")).size() == 2);
  const auto missing = lacmatch_cli({"--out", (dir / "b").string(), "bench", "--frames",
                                     (dir / "nowhere").string(), "--variant", "orb_ransac"});
  CHECK(missing.code == 2);
}

TEST_CASE("drift on the stationary fixture") {
  testing::TempDir dir("drift");
  const auto off = lacmatch_cli({"--out", (dir / "off").string(), "drift", "--fixture", "stationary",
                                 "--lac-off-only"});
  REQUIRE_MESSAGE(off.code == 0, off.err);
  CHECK(fs::exists(dir / "off" / "off" / "trace.csv"));
  CHECK(fs::exists(dir / "off" / "off" / "displacement.csv"));
  CHECK_FALSE(fs::exists(dir / "off" / "on"));

  const auto both = lacmatch_cli({"--out", (dir / "both").string(), "drift", "--fixture", "stationary"});
  REQUIRE_MESSAGE(both.code == 0, both.err);
  CHECK(fs::exists(dir / "both" / "on" / "trace.csv"));
  const auto rows = lines(slurp(dir / "both" / "drift_summary.csv"));
  REQUIRE(rows.size() > 2);
  CHECK(rows[0] == "label_id,variance_on,variance_off,delta");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto comma = rows[i].find(',');
    std::istringstream vals(rows[i].substr(comma + 1));
    // Sensor noise still moves labels by a fraction of a pixel.
    const double bound = rows[i].rfind("mean_displacement", 0) == 0 ? 1.0 : 0.05;
    std::string field;
    while (std::getline(vals, field, ',')) {
      CAPTURE(rows[i]);
      CHECK(std::abs(std::stod(field)) < bound);
    }
  }
}

TEST_CASE("train-beblid on a patch directory") {
  testing::TempDir dir("train");
  const auto samples = generate_patch_pairs(synthetic_panorama({600, 400}, 51), 120, 52);
  fs::create_directories(dir / "patches");
  std::ofstream list(dir / "patches" / "pairs.txt");
  list << "# x y label\n";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const std::string x = "x" + std::to_string(i) + ".png", y = "y" + std::to_string(i) + ".png";
    write_png(dir / "patches" / x, samples[i].x);
    write_png(dir / "patches" / y, samples[i].y);
    list << x << ' ' << y << ' ' << samples[i].label << '\n';
  }
  list.close();
  const auto r = lacmatch_cli({"--out", (dir / "model").string(), "train-beblid", "--patches",
                               (dir / "patches").string(), "--rounds", "8"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(load_beblid_model(dir / "model" / "beblid.lacb").bits() == 8);
  const auto loss = lines(slurp(dir / "model" / "train_loss.csv"));
  REQUIRE(loss.size() == 10);
  CHECK(loss[0] == "round,loss");

  std::ofstream(dir / "patches" / "pairs.txt") << "x0.png y0.png\n";
  CHECK(lacmatch_cli({"--out", (dir / "model2").string(), "train-beblid", "--patches",
                      (dir / "patches").string()})
            .code == 2);
}
