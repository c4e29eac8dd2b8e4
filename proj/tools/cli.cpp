#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <sstream>

#include "lacmatch/config.hpp"
#include "lacmatch/errors.hpp"
#include "lacmatch/evaluation.hpp"
#include "lacmatch/image_io.hpp"
#include "lacmatch/rng.hpp"
#include "lacmatch/template_store.hpp"
#include "overlay.hpp"

namespace lacmatch::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Context {
  RunConfig cfg;
  std::ostream& out;
  std::ostream& err;
};

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write " + path.string());
  f << text;
}

void require_file(const std::string& path, const std::string& what) {
  if (path.empty()) throw InputError(what + " path is required");
  if (!fs::is_regular_file(path)) throw InputError(what + " not found: " + path);
}

void require_dir(const std::string& path, const std::string& what) {
  if (path.empty()) throw InputError(what + " path is required");
  if (!fs::is_directory(path)) throw InputError(what + " not found: " + path);
}

std::vector<fs::path> list_frames(const std::string& dir) {
  require_dir(dir, "frames directory");
  std::vector<fs::path> frames;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto ext = e.path().extension().string();
    if (ext == ".png" || ext == ".pgm") frames.push_back(e.path());
  }
  std::sort(frames.begin(), frames.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
  if (frames.empty()) throw InputError("no .png or .pgm frames in " + dir);
  return frames;
}

std::string frame_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%06zu.png", index + 1);
  return buf;
}

std::string absolute_or_empty(const std::string& p) {
  return p.empty() ? p : fs::absolute(p).lexically_normal().string();
}

void write_manifest(const RunConfig& cfg, const fs::path& dir, const std::string& command,
                    const std::vector<std::string>& artifacts) {
  RunConfig resolved = cfg;
  for (std::string* p : {&resolved.panorama, &resolved.labels, &resolved.frames, &resolved.cache, &resolved.out,
                         &resolved.beblid_model, &resolved.patches})
    *p = absolute_or_empty(*p);
  write_file(dir / "run_manifest.json", run_manifest_json(resolved, command, artifacts));
}

FeatureConfig base_features(const RunConfig& cfg) {
  FeatureConfig f;
  f.fast_threshold = cfg.fast_threshold;
  f.max_keypoints = cfg.max_keypoints;
  return f;
}

BeblidTrainOptions train_options(const RunConfig& cfg) {
  BeblidTrainOptions opt;
  opt.rounds = cfg.rounds;
  opt.gamma = cfg.gamma;
  opt.candidate_budget = cfg.candidate_budget;
  opt.threshold_quantiles = cfg.quantiles;
  opt.seed = cfg.seed;
  return opt;
}

// frames/truth.json: {"reference": path, "frames": [{"file", "homography": [9]}]}
BenchmarkScene load_truth_sidecar(const std::string& frames_dir) {
  const fs::path dir(frames_dir);
  require_file((dir / "truth.json").string(), "ground-truth sidecar");
  json j;
  try {
    std::ifstream in(dir / "truth.json");
    j = json::parse(in);
    BenchmarkScene scene;
    const fs::path ref = dir / j.at("reference").get<std::string>();
    require_file(ref.string(), "reference image");
    scene.reference = read_image(ref);
    for (const auto& f : j.at("frames")) {
      const auto h = f.at("homography").get<std::vector<double>>();
      if (h.size() != 9) throw InputError("homography must have 9 entries");
      Eigen::Matrix3d m;
      m << h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8];
      const fs::path p = dir / f.at("file").get<std::string>();
      require_file(p.string(), "frame");
      scene.frames.push_back(read_image(p));
      scene.truth.emplace_back(m);
    }
    if (scene.frames.empty()) throw InputError("truth sidecar lists no frames");
    return scene;
  } catch (const json::exception& e) {
    throw InputError("malformed truth.json: " + std::string(e.what()));
  }
}

void write_truth_sidecar(const fs::path& dir, const std::string& reference,
                         const std::vector<Homography>& truth) {
  json frames = json::array();
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto& m = truth[i].matrix();
    std::vector<double> h;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) h.push_back(m(r, c));
    frames.push_back({{"file", frame_name(i)}, {"homography", h}});
  }
  write_file(dir / "truth.json", json{{"reference", reference}, {"frames", frames}}.dump(2) + "\n");
}

TrackingFixture fixture_by_name(const std::string& name, std::uint64_t seed) {
  if (name == "jittered_pan") return jittered_pan_fixture(seed);
  if (name == "dwell") return dwell_fixture(seed);
  if (name == "stationary") return stationary_fixture(seed);
  throw InputError("unknown fixture '" + name + "' (jittered_pan, dwell, stationary)");
}

std::vector<FrameResult> track(const TemplateSet& set, const PipelineConfig& pc, std::span<const GrayImage> frames) {
  Tracker tracker(set, pc);
  std::vector<FrameResult> results;
  for (const auto& f : frames) results.push_back(tracker.process(f));
  return results;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---------------------------------------------------------------------------

int cmd_prepare(Context& c) {
  const RunConfig& cfg = c.cfg;
  require_file(cfg.labels, "labels file");
  const LabelsFile lf = read_labels_file(cfg.labels);
  const std::string panorama = cfg.panorama.empty() ? lf.panorama.string() : cfg.panorama;
  require_file(panorama, "panorama");
  const FeatureConfig fc = feature_config(cfg);

  const GrayImage pano = read_image(panorama);
  const TemplateSet set = prepare_templates(pano, lf.labels, segment_config(cfg), fc);

  CacheInfo info;
  info.panorama = fs::absolute(panorama).lexically_normal().string();
  info.k = static_cast<int>(set.templates.size());
  info.template_size = {set.templates.front().rect.w, set.templates.front().rect.h};
  info.seed = cfg.seed;
  info.fast_threshold = fc.fast_threshold;
  info.max_keypoints = fc.max_keypoints;
  info.descriptor = fc.descriptor;
  info.has_beblid = static_cast<bool>(fc.beblid);
  save_template_cache(cfg.cache, set, info, fc.beblid.get());
  write_manifest(cfg, cfg.cache, "prepare", {"manifest.json", "labels.json", "topology.json"});

  c.out << "prepared " << set.templates.size() << " templates (k = " << info.k << ", seed " << cfg.seed
        << ") in " << cfg.cache << "\n";
  for (const auto& t : set.templates)
    c.out << "  template " << t.index << ": rect " << t.rect.x << "," << t.rect.y << " " << t.rect.w << "x"
          << t.rect.h << ", " << t.label_ids.size() << " labels, " << t.features.keypoints.size()
          << " keypoints\n";
  return kOk;
}

int cmd_match(Context& c) {
  const RunConfig& cfg = c.cfg;
  const auto frame_paths = list_frames(cfg.frames);
  const LoadedCache cache = load_template_cache(cfg.cache);
  const PipelineConfig pc = pipeline_config(cfg, cache.features);
  const fs::path out(cfg.out);
  fs::create_directories(out);

  if (cfg.overlay) fs::create_directories(out / "overlay");
  Tracker tracker(cache.set, pc);
  std::vector<FrameResult> results;
  Size2 dims{};
  for (const auto& p : frame_paths) {
    const GrayImage frame = read_image(p);
    if (results.empty()) dims = frame.size();
    if (frame.size() != dims) throw InputError("frame " + p.string() + " differs in size from the first frame");
    results.push_back(tracker.process(frame));
    if (cfg.overlay)
      write_png(out / "overlay" / (p.stem().string() + ".png"), render_overlay(frame, results.back(), cache.set));
  }
  write_file(out / "trace.csv", trace_csv(results, dims));
  std::vector<std::string> artifacts{"trace.csv"};
  if (cfg.overlay) artifacts.push_back("overlay/");
  write_manifest(cfg, out, "match", artifacts);

  const auto ok = std::count_if(results.begin(), results.end(),
                                [](const FrameResult& r) { return r.status == FrameStatus::kOk; });
  c.out << "matched " << results.size() << " frames: ok " << ok << ", no_match " << results.size() - ok << "\n";
  if (ok != static_cast<long>(results.size()))
    c.out << "warning: " << results.size() - ok << " frame(s) had no match; their labels repeat the last good positions\n";
  return kOk;
}

int cmd_bench(Context& c) {
  const RunConfig& cfg = c.cfg;
  const auto variants = selected_variants(cfg);
  std::optional<BenchmarkScene> sidecar;
  if (!cfg.frames.empty()) sidecar = load_truth_sidecar(cfg.frames);
  if (!cfg.beblid_model.empty()) require_file(cfg.beblid_model, "BEBLID model");
  const fs::path out(cfg.out);
  fs::create_directories(out);

  BenchmarkConfig bc;
  bc.features = base_features(cfg);
  bc.matching = match_config(cfg);
  bc.homography = robust_config(cfg);
  bc.reps = cfg.reps;
  bc.record_timing = cfg.record_timing;
  std::vector<std::string> artifacts{"rates.csv", "rates.txt"};
  const bool need_beblid = std::any_of(variants.begin(), variants.end(), [](Variant v) {
    return v == Variant::kBeblidGmsRansac || v == Variant::kBeblidGmsDegensac;
  });
  if (need_beblid) {
    if (!cfg.beblid_model.empty()) {
      bc.beblid = std::make_shared<BeblidModel>(load_beblid_model(cfg.beblid_model));
    } else {
      c.out << "training a BEBLID model on " << cfg.synthetic_pairs << " synthetic patch pairs\n";
      bc.beblid = std::make_shared<BeblidModel>(train_synthetic_beblid(cfg.synthetic_pairs, train_options(cfg)).model);
      save_beblid_model(out / "beblid.lacb", *bc.beblid);
      artifacts.push_back("beblid.lacb");
    }
  }

  const Size2 frame{cfg.bench_width, cfg.bench_height};
  auto scene_for_rep = [&](int rep) {
    if (sidecar) return *sidecar;
    return contaminated_scene(derive_seed(cfg.seed, static_cast<std::uint64_t>(rep)), frame, cfg.bench_frames);
  };
  const auto rows = benchmark_inlier_rates(scene_for_rep, variants, bc);
  const auto summary = summarize(rows);
  write_file(out / "rates.csv", rates_csv(rows));
  write_file(out / "rates.txt", rates_table(summary));
  write_manifest(cfg, out, "bench", artifacts);
  c.out << rates_table(summary);
  for (const auto& s : summary)
    if (s.failed_reps > 0) c.out << "note: " << to_string(s.variant) << " failed on " << s.failed_reps << " rep(s)\n";
  return kOk;
}

int cmd_drift(Context& c) {
  const RunConfig& cfg = c.cfg;
  GrayImage panorama;
  std::vector<Label> labels;
  std::vector<GrayImage> frames;
  if (!cfg.frames.empty()) {
    require_file(cfg.labels, "labels file");
    const auto frame_paths = list_frames(cfg.frames);
    const LabelsFile lf = read_labels_file(cfg.labels);
    const std::string pano_path = cfg.panorama.empty() ? lf.panorama.string() : cfg.panorama;
    require_file(pano_path, "panorama");
    panorama = read_image(pano_path);
    labels = lf.labels;
    for (const auto& p : frame_paths) frames.push_back(read_image(p));
  } else {
    TrackingFixture fx = fixture_by_name(cfg.fixture, cfg.seed);
    auto seq = generate_sequence(fx.panorama, fx.script, fx.noise, fx.seed);
    panorama = std::move(fx.panorama);
    labels = std::move(fx.labels);
    frames = std::move(seq.frames);
  }
  const Size2 dims = frames.front().size();
  const FeatureConfig fc = feature_config(cfg);
  const fs::path out(cfg.out);
  std::vector<std::string> artifacts;

  auto emit = [&](const std::string& name, const std::vector<FrameResult>& results) {
    const DriftReport rep = drift_metrics(results, dims);
    write_file(out / name / "trace.csv", trace_csv(results, dims));
    write_file(out / name / "displacement.csv", displacement_csv(rep));
    artifacts.push_back(name + "/trace.csv");
    artifacts.push_back(name + "/displacement.csv");
    c.out << name << ": total variance " << fmt("%.6f", rep.total_variance) << ", mean displacement "
          << fmt("%.6f", rep.mean_displacement) << " px\n";
  };

  PipelineConfig off_cfg = pipeline_config(cfg, fc);
  off_cfg.use_local_area = false;
  off_cfg.polar_refinement = false;
  const TemplateSet whole = whole_panorama_templates(panorama, labels, fc);
  const auto off = track(whole, off_cfg, frames);
  emit("off", off);

  if (!cfg.lac_off_only) {
    const TemplateSet set = prepare_templates(panorama, labels, segment_config(cfg), fc);
    const auto on = track(set, pipeline_config(cfg, fc), frames);
    emit("on", on);

    const DriftComparison cmp = compare_drift(on, off, dims);
    std::string csv = "label_id,variance_on,variance_off,delta\n";
    for (int id : cmp.shared_labels) {
      const double a = cmp.on.variance.at(id), b = cmp.off.variance.at(id);
      char buf[160];
      std::snprintf(buf, sizeof buf, "%d,%.6f,%.6f,%.6f\n", id, a, b, a - b);
      csv += buf;
    }
    char buf[200];
    std::snprintf(buf, sizeof buf, "total,%.6f,%.6f,%.6f\n", cmp.on.total_variance, cmp.off.total_variance,
                  cmp.variance_delta());
    csv += buf;
    std::snprintf(buf, sizeof buf, "mean_displacement,%.6f,%.6f,%.6f\n", cmp.on.mean_displacement,
                  cmp.off.mean_displacement, cmp.displacement_delta());
    csv += buf;
    write_file(out / "drift_summary.csv", csv);
    artifacts.push_back("drift_summary.csv");
    c.out << "paired over " << cmp.shared_labels.size() << " labels: variance delta (on - off) "
          << fmt("%.6f", cmp.variance_delta()) << ", displacement delta " << fmt("%.6f", cmp.displacement_delta())
          << " px\n";
  }
  write_manifest(cfg, out, "drift", artifacts);
  return kOk;
}

std::vector<PatchPairSample> read_patch_dir(const std::string& dir) {
  require_dir(dir, "patch directory");
  const fs::path list = fs::path(dir) / "pairs.txt";
  require_file(list.string(), "patch pair list");
  std::ifstream in(list);
  std::vector<PatchPairSample> samples;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string x, y;
    int label = 0;
    if (!(ss >> x >> y >> label))
      throw InputError(list.string() + ":" + std::to_string(lineno) + ": expected '<x> <y> <label>'");
    PatchPairSample s;
    // Same filter the extractor applies to frames.
    s.x = gaussian_blur(read_image(fs::path(dir) / x), kBeblidSmoothingSigma);
    s.y = gaussian_blur(read_image(fs::path(dir) / y), kBeblidSmoothingSigma);
    s.label = label;
    samples.push_back(std::move(s));
  }
  if (samples.empty()) throw InputError("no patch pairs listed in " + list.string());
  return samples;
}

int cmd_train(Context& c) {
  const RunConfig& cfg = c.cfg;
  std::vector<PatchPairSample> samples;
  std::vector<PatchPairSample> held_out;
  if (!cfg.patches.empty()) {
    samples = read_patch_dir(cfg.patches);
  } else {
    samples = synthetic_patch_pairs(cfg.synthetic_pairs, cfg.seed);
    held_out = synthetic_patch_pairs(std::max(2, cfg.synthetic_pairs / 2), derive_seed(cfg.seed, 0x4e1d));
  }
  const BeblidTrainOptions opt = train_options(cfg);
  const auto pool = beblid_candidate_grid(samples.front().x.width());
  const auto report = train_beblid(samples, pool, opt);

  const fs::path out(cfg.out);
  fs::create_directories(out);
  save_beblid_model(out / "beblid.lacb", report.model);
  std::string csv = "round,loss\n";
  csv += "0," + fmt("%.6f", report.initial_loss) + "\n";
  for (std::size_t r = 0; r < report.loss_per_round.size(); ++r)
    csv += std::to_string(r + 1) + "," + fmt("%.6f", report.loss_per_round[r]) + "\n";
  write_file(out / "train_loss.csv", csv);
  write_manifest(cfg, out, "train-beblid", {"beblid.lacb", "train_loss.csv"});

  c.out << "trained " << report.model.bits() << " weak learners on " << samples.size() << " pairs; loss "
        << fmt("%.3f", report.initial_loss) << " -> " << fmt("%.3f", report.loss_per_round.back())
        << ", common alpha " << fmt("%.6f", report.common_alpha) << "\n";
  if (!held_out.empty())
    c.out << "held-out AUC " << fmt("%.4f", patch_verification_auc(held_out, report.model)) << " (random bits "
          << fmt("%.4f", random_bit_auc(held_out, report.model.bits(), cfg.seed)) << ")\n";
  return kOk;
}

int cmd_synth(Context& c) {
  const RunConfig& cfg = c.cfg;
  const fs::path out(cfg.out);
  const fs::path frames_dir = out / "frames";
  fs::create_directories(frames_dir);
  if (cfg.fixture == "contaminated") {
    const BenchmarkScene scene =
        contaminated_scene(cfg.seed, {cfg.bench_width, cfg.bench_height}, cfg.bench_frames);
    write_png(out / "reference.png", scene.reference);
    for (std::size_t i = 0; i < scene.frames.size(); ++i) write_png(frames_dir / frame_name(i), scene.frames[i]);
    write_truth_sidecar(frames_dir, "../reference.png", scene.truth);
  } else {
    const TrackingFixture fx = fixture_by_name(cfg.fixture, cfg.seed);
    const auto seq = generate_sequence(fx.panorama, fx.script, fx.noise, fx.seed);
    write_png(out / "panorama.png", fx.panorama);
    write_labels_file(out / "labels.json", "panorama.png", fx.labels);
    for (std::size_t i = 0; i < seq.frames.size(); ++i) write_png(frames_dir / frame_name(i), seq.frames[i]);
    write_truth_sidecar(frames_dir, "../panorama.png", seq.truth);
  }
  write_manifest(cfg, out, "synth", {"frames/"});
  c.out << "wrote fixture '" << cfg.fixture << "' to " << cfg.out << "\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Panorama label matching with local adaptive clustering", "lacmatch"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kVersion);

  std::vector<std::pair<std::string, std::string>> overrides;
  auto set_key = [&](const std::string& key) {
    return [&overrides, key](const std::string& v) { overrides.emplace_back(key, v); };
  };
  auto flag_key = [&](const std::string& key, const char* value) {
    return [&overrides, key, value](std::int64_t) { overrides.emplace_back(key, value); };
  };

  std::string config_path;
  app.add_option("--config", config_path, "Config file (key = value sections) or a run manifest (.json)");
  app.add_option_function<std::string>("--seed", set_key("run.seed"), "Master seed");
  app.add_option_function<std::string>("--out", set_key("paths.out"), "Output directory");
  app.add_flag_function("--overlay", flag_key("run.overlay", "true"), "Write annotated frames (match)");
  app.add_option_function<std::string>("--reps", set_key("bench.reps"), "Benchmark repetitions");
  std::vector<std::string> sets;
  app.add_option("--set", sets, "Override any config key")->type_name("SECTION.KEY=VALUE");

  auto opt = [&](CLI::App* sub, const std::string& flag, const std::string& key, const std::string& help) {
    sub->add_option_function<std::string>(flag, set_key(key), help);
  };

  auto* prepare = app.add_subcommand("prepare", "Cluster labels, cut templates and cache their features");
  opt(prepare, "--panorama", "paths.panorama", "Panorama image (defaults to the one named in the labels file)");
  opt(prepare, "--labels", "paths.labels", "Labels JSON");
  opt(prepare, "--cache", "paths.cache", "Template cache directory");
  opt(prepare, "--k", "lac.k", "Number of clusters (0: one per four labels)");
  opt(prepare, "--descriptor", "features.descriptor", "brief or beblid");
  opt(prepare, "--beblid-model", "paths.beblid_model", "Trained BEBLID model");

  auto* match = app.add_subcommand("match", "Project labels into every frame of a directory");
  opt(match, "--cache", "paths.cache", "Template cache directory");
  opt(match, "--frames", "paths.frames", "Directory of frame images");
  opt(match, "--estimator", "homography.estimator", "ransac or degensac");

  auto* bench = app.add_subcommand("bench", "Inlier-rate and timing table over the four pipeline variants");
  bench->add_option_function<std::vector<std::string>>(
      "--variant",
      [&](const std::vector<std::string>& v) {
        std::string joined;
        for (const auto& s : v) joined += (joined.empty() ? "" : ",") + s;
        overrides.emplace_back("bench.variants", joined);
      },
      "orb_ransac, orb_gms_ransac, beblid_gms_ransac, beblid_gms_degensac (repeatable)");
  opt(bench, "--frames", "paths.frames", "Frames directory with a truth.json sidecar");
  opt(bench, "--beblid-model", "paths.beblid_model", "Trained BEBLID model");
  bench->add_flag_function("--no-timing", flag_key("bench.record_timing", "false"),
                           "Write 0 for timings so rates.csv is byte-stable");

  auto* drift = app.add_subcommand("drift", "Label drift with and without local adaptive clustering");
  opt(drift, "--fixture", "drift.fixture", "jittered_pan, dwell or stationary");
  opt(drift, "--frames", "paths.frames", "Frames directory (instead of a fixture)");
  opt(drift, "--panorama", "paths.panorama", "Panorama image");
  opt(drift, "--labels", "paths.labels", "Labels JSON");
  drift->add_flag_function("--lac-off-only", flag_key("drift.lac_off_only", "true"), "Only run the baseline");

  auto* train = app.add_subcommand("train-beblid", "Train a BEBLID descriptor");
  opt(train, "--patches", "paths.patches", "Directory with pairs.txt (<x> <y> <label> per line)");
  opt(train, "--rounds", "train.rounds", "Number of weak learners");

  auto* synth = app.add_subcommand("synth", "Write a synthetic fixture (panorama, labels, frames, truth)");
  opt(synth, "--fixture", "drift.fixture", "jittered_pan, dwell, stationary or contaminated");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }

  try {
    Context ctx{RunConfig{}, out, err};
    if (!config_path.empty()) apply_config_file(ctx.cfg, config_path);
    for (const auto& [k, v] : overrides) set_value(ctx.cfg, k, v);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw InputError("--set expects SECTION.KEY=VALUE, got '" + s + "'");
      set_value(ctx.cfg, s.substr(0, eq), s.substr(eq + 1));
    }
    validate(ctx.cfg);

    if (prepare->parsed()) return cmd_prepare(ctx);
    if (match->parsed()) return cmd_match(ctx);
    if (bench->parsed()) return cmd_bench(ctx);
    if (drift->parsed()) return cmd_drift(ctx);
    if (train->parsed()) return cmd_train(ctx);
    if (synth->parsed()) return cmd_synth(ctx);
    err << "error: no subcommand\n";
    return kInputError;
  } catch (const MissingCacheError& e) {
    err << "error: " << e.what() << "\n";
    return kMissingCache;
  } catch (const InfeasibleError& e) {
    err << "error: infeasible configuration (cluster " << e.cluster_id() << "): " << e.what() << "\n";
    return kInfeasible;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const BoundaryError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternal;
  }
}

}  // namespace lacmatch::cli
