#include "lacmatch/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <cstdio>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <sstream>

#include "lacmatch/errors.hpp"

namespace lacmatch {

namespace {

using nlohmann::json;

enum class Kind { kString, kInt, kUint, kDouble, kBool };

struct Field {
  const char* key;
  Kind kind;
  std::function<void*(RunConfig&)> ref;
};

template <typename T>
std::function<void*(RunConfig&)> member(T RunConfig::*m) {
  return [m](RunConfig& c) -> void* { return &(c.*m); };
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"paths.panorama", Kind::kString, member(&RunConfig::panorama)},
      {"paths.labels", Kind::kString, member(&RunConfig::labels)},
      {"paths.frames", Kind::kString, member(&RunConfig::frames)},
      {"paths.cache", Kind::kString, member(&RunConfig::cache)},
      {"paths.out", Kind::kString, member(&RunConfig::out)},
      {"paths.beblid_model", Kind::kString, member(&RunConfig::beblid_model)},
      {"paths.patches", Kind::kString, member(&RunConfig::patches)},
      {"features.fast_threshold", Kind::kInt, member(&RunConfig::fast_threshold)},
      {"features.max_keypoints", Kind::kInt, member(&RunConfig::max_keypoints)},
      {"features.descriptor", Kind::kString, member(&RunConfig::descriptor)},
      {"gms.grid_rows", Kind::kInt, [](RunConfig& c) -> void* { return &c.gms.grid_rows; }},
      {"gms.grid_cols", Kind::kInt, [](RunConfig& c) -> void* { return &c.gms.grid_cols; }},
      {"gms.alpha", Kind::kDouble, [](RunConfig& c) -> void* { return &c.gms.alpha; }},
      {"gms.with_rotation", Kind::kBool, [](RunConfig& c) -> void* { return &c.gms.with_rotation; }},
      {"gms.cross_check", Kind::kBool, member(&RunConfig::cross_check)},
      {"homography.reproj_tol", Kind::kDouble, member(&RunConfig::reproj_tol)},
      {"homography.max_iter", Kind::kInt, member(&RunConfig::max_iter)},
      {"homography.confidence", Kind::kDouble, member(&RunConfig::confidence)},
      {"homography.estimator", Kind::kString, member(&RunConfig::estimator)},
      {"lac.k", Kind::kInt, member(&RunConfig::k)},
      {"lac.template_width", Kind::kInt, member(&RunConfig::template_width)},
      {"lac.template_height", Kind::kInt, member(&RunConfig::template_height)},
      {"lac.history", Kind::kInt, member(&RunConfig::history)},
      {"lac.beta", Kind::kDouble, member(&RunConfig::beta)},
      {"lac.lambda", Kind::kDouble, member(&RunConfig::lambda)},
      {"lac.support_radius", Kind::kDouble, member(&RunConfig::support_radius)},
      {"lac.min_inliers", Kind::kInt, member(&RunConfig::min_inliers)},
      {"lac.use_local_area", Kind::kBool, member(&RunConfig::use_local_area)},
      {"lac.polar_refinement", Kind::kBool, member(&RunConfig::polar_refinement)},
      {"lac.fallback_full_search", Kind::kBool, member(&RunConfig::fallback_full_search)},
      {"lac.kmeans_max_iter", Kind::kInt, member(&RunConfig::kmeans_max_iter)},
      {"lac.kmeans_restarts", Kind::kInt, member(&RunConfig::kmeans_restarts)},
      {"bench.reps", Kind::kInt, member(&RunConfig::reps)},
      {"bench.variants", Kind::kString, member(&RunConfig::variants)},
      {"bench.frames", Kind::kInt, member(&RunConfig::bench_frames)},
      {"bench.width", Kind::kInt, member(&RunConfig::bench_width)},
      {"bench.height", Kind::kInt, member(&RunConfig::bench_height)},
      {"bench.record_timing", Kind::kBool, member(&RunConfig::record_timing)},
      {"drift.fixture", Kind::kString, member(&RunConfig::fixture)},
      {"drift.lac_off_only", Kind::kBool, member(&RunConfig::lac_off_only)},
      {"train.rounds", Kind::kInt, member(&RunConfig::rounds)},
      {"train.gamma", Kind::kDouble, member(&RunConfig::gamma)},
      {"train.candidate_budget", Kind::kInt, member(&RunConfig::candidate_budget)},
      {"train.quantiles", Kind::kInt, member(&RunConfig::quantiles)},
      {"train.synthetic_pairs", Kind::kInt, member(&RunConfig::synthetic_pairs)},
      {"run.seed", Kind::kUint, member(&RunConfig::seed)},
      {"run.overlay", Kind::kBool, member(&RunConfig::overlay)},
  };
  return table;
}

const Field& find_field(const std::string& key) {
  for (const auto& f : fields())
    if (key == f.key) return f;
  throw InputError("unknown configuration key '" + key + "'");
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw InputError("bad value '" + text + "' for " + key);
  return v;
}

std::string format_double(double v) {
  // Shortest text that reads back to the same double.
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

std::string text_of(RunConfig& cfg, const Field& f) {
  void* p = f.ref(cfg);
  switch (f.kind) {
    case Kind::kString: return *static_cast<std::string*>(p);
    case Kind::kInt: return std::to_string(*static_cast<int*>(p));
    case Kind::kUint: return std::to_string(*static_cast<std::uint64_t*>(p));
    case Kind::kDouble: return format_double(*static_cast<double*>(p));
    case Kind::kBool: return *static_cast<bool*>(p) ? "true" : "false";
  }
  return {};
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& v, const std::string& where) {
  if (v.size() >= 2 && v.front() == '"') {
    if (v.back() != '"') throw InputError("unterminated string at " + where);
    std::string out;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
      if (v[i] == '\\' && i + 2 < v.size()) {
        const char c = v[++i];
        out += c == 'n' ? '\n' : c == 't' ? '\t' : c;
      } else {
        out += v[i];
      }
    }
    return out;
  }
  if (!v.empty() && v.front() == '\'') {
    // Literal string: no escapes.
    if (v.size() < 2 || v.back() != '\'') throw InputError("unterminated string at " + where);
    return v.substr(1, v.size() - 2);
  }
  return v;
}

// Drops a '#' comment that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
  char quote = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quote == '"' && c == '\\') {
      ++i;
    } else if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '#') {
      return line.substr(0, i);
    }
  }
  return line;
}

}  // namespace

void set_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  const Field& f = find_field(key);
  void* p = f.ref(cfg);
  switch (f.kind) {
    case Kind::kString: *static_cast<std::string*>(p) = value; break;
    case Kind::kInt: *static_cast<int*>(p) = parse_number<int>(key, value); break;
    case Kind::kUint: *static_cast<std::uint64_t*>(p) = parse_number<std::uint64_t>(key, value); break;
    case Kind::kDouble: *static_cast<double*>(p) = parse_number<double>(key, value); break;
    case Kind::kBool:
      if (value == "true" || value == "1")
        *static_cast<bool*>(p) = true;
      else if (value == "false" || value == "0")
        *static_cast<bool*>(p) = false;
      else
        throw InputError("bad boolean '" + value + "' for " + key);
      break;
  }
}

std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& cfg) {
  RunConfig copy = cfg;
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : fields()) out.emplace_back(f.key, text_of(copy, f));
  return out;
}

void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read config file " + path.string());
  if (path.extension() == ".json") {
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw InputError("malformed manifest " + path.string() + ": " + e.what());
    }
    if (!j.contains("config") || !j["config"].is_object())
      throw InputError("manifest " + path.string() + " has no config object");
    for (const auto& [section, body] : j["config"].items()) {
      if (!body.is_object()) throw InputError("config section '" + section + "' must be an object");
      for (const auto& [name, v] : body.items())
        set_value(cfg, section + "." + name, v.is_string() ? v.get<std::string>() : v.dump());
    }
    return;
  }
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw InputError("bad section header at " + where);
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InputError("expected key = value at " + where);
    const std::string name = trim(line.substr(0, eq));
    const std::string key = name.find('.') != std::string::npos || section.empty() ? name : section + "." + name;
    set_value(cfg, key, unquote(trim(line.substr(eq + 1)), where));
  }
}

std::string to_config_text(const RunConfig& cfg) {
  std::ostringstream out;
  std::string section;
  RunConfig copy = cfg;
  for (const auto& f : fields()) {
    const std::string key = f.key;
    const auto dot = key.find('.');
    const std::string sec = key.substr(0, dot);
    if (sec != section) {
      out << (section.empty() ? "" : "\n") << "[" << sec << "]\n";
      section = sec;
    }
    const std::string v = text_of(copy, f);
    out << key.substr(dot + 1) << " = ";
    if (f.kind == Kind::kString)
      out << json(v).dump();  // quoted with escapes
    else
      out << v;
    out << "\n";
  }
  return out.str();
}

void validate(const RunConfig& cfg) {
  auto check = [](bool ok, const std::string& what) {
    if (!ok) throw InputError(what);
  };
  check(cfg.max_keypoints >= 100, "features.max_keypoints must be >= 100");
  check(cfg.fast_threshold >= 1 && cfg.fast_threshold <= 255, "features.fast_threshold must be in [1, 255]");
  descriptor_kind_from_string(cfg.descriptor);
  check(cfg.gms.grid_rows >= 1 && cfg.gms.grid_cols >= 1, "gms grid must be at least 1x1");
  check(cfg.gms.alpha > 0.0, "gms.alpha must be positive");
  check(cfg.reproj_tol > 0.0, "homography.reproj_tol must be positive");
  check(cfg.max_iter >= 1, "homography.max_iter must be >= 1");
  check(cfg.confidence > 0.0 && cfg.confidence < 1.0, "homography.confidence must be in (0, 1)");
  estimator_from_string(cfg.estimator);
  check(cfg.k >= 0, "lac.k must be >= 0 (0 picks a default)");
  check(cfg.template_width >= 0 && cfg.template_height >= 0, "lac template size must be >= 0");
  check(cfg.history >= 1, "lac.history must be >= 1");
  check(cfg.beta >= 0.0, "lac.beta must be >= 0");
  check(cfg.lambda >= 0.0 && cfg.lambda <= 1.0, "lac.lambda must be in [0, 1]");
  check(cfg.min_inliers >= 4, "lac.min_inliers must be >= 4");
  check(cfg.kmeans_max_iter >= 1 && cfg.kmeans_restarts >= 1, "k-means iterations and restarts must be >= 1");
  check(cfg.reps >= 1, "bench.reps must be >= 1");
  check(cfg.bench_frames >= 1, "bench.frames must be >= 1");
  check(cfg.bench_width >= 128 && cfg.bench_height >= 128, "bench frame size must be at least 128x128");
  selected_variants(cfg);
  check(cfg.rounds >= 1 && cfg.gamma > 0.0 && cfg.quantiles >= 1 && cfg.quantiles <= 255,
        "train settings out of range");
  check(cfg.synthetic_pairs >= 2, "train.synthetic_pairs must be >= 2");
}

std::string run_manifest_json(const RunConfig& cfg, const std::string& command,
                              const std::vector<std::string>& artifacts) {
  json j;
  j["tool"] = "lacmatch";
  j["version"] = kVersion;
  j["command"] = command;
  json conf = json::object();
  RunConfig copy = cfg;
  for (const auto& f : fields()) {
    const std::string key = f.key;
    const auto dot = key.find('.');
    json& slot = conf[key.substr(0, dot)][key.substr(dot + 1)];
    void* p = f.ref(copy);
    switch (f.kind) {
      case Kind::kString: slot = *static_cast<std::string*>(p); break;
      case Kind::kInt: slot = *static_cast<int*>(p); break;
      case Kind::kUint: slot = *static_cast<std::uint64_t*>(p); break;
      case Kind::kDouble: slot = *static_cast<double*>(p); break;
      case Kind::kBool: slot = *static_cast<bool*>(p); break;
    }
  }
  j["config"] = conf;
  j["seeds"] = {{"run", cfg.seed}};
  j["formats"] = {{"cache", 1}, {"beblid_model", 1}, {"feature_blob", 1}};
  j["artifacts"] = artifacts;
  return j.dump(2) + "\n";
}

FeatureConfig feature_config(const RunConfig& cfg) {
  FeatureConfig f;
  f.fast_threshold = cfg.fast_threshold;
  f.max_keypoints = cfg.max_keypoints;
  f.descriptor = descriptor_kind_from_string(cfg.descriptor);
  if (!cfg.beblid_model.empty())
    f.beblid = std::make_shared<BeblidModel>(load_beblid_model(cfg.beblid_model));
  if (f.descriptor == DescriptorKind::kBeblid && !f.beblid)
    throw InputError("descriptor beblid needs paths.beblid_model (train one with train-beblid)");
  return f;
}

SegmentConfig segment_config(const RunConfig& cfg) {
  SegmentConfig s;
  s.k = cfg.k;
  s.template_size = {cfg.template_width, cfg.template_height};
  s.max_iter = cfg.kmeans_max_iter;
  s.restarts = cfg.kmeans_restarts;
  s.seed = cfg.seed;
  return s;
}

RobustConfig robust_config(const RunConfig& cfg) {
  RobustConfig r;
  r.reproj_tol = cfg.reproj_tol;
  r.max_iter = cfg.max_iter;
  r.confidence = cfg.confidence;
  r.seed = cfg.seed;
  return r;
}

MatchConfig match_config(const RunConfig& cfg) {
  MatchConfig m;
  m.cross_check = cfg.cross_check;
  m.gms = cfg.gms;
  return m;
}

PipelineConfig pipeline_config(const RunConfig& cfg, const FeatureConfig& features) {
  PipelineConfig p;
  p.features = features;
  p.matching = match_config(cfg);
  p.homography = robust_config(cfg);
  p.estimator = estimator_from_string(cfg.estimator);
  p.history = cfg.history;
  p.beta = cfg.beta;
  p.lambda = cfg.lambda;
  p.support_radius = cfg.support_radius;
  p.min_inliers = cfg.min_inliers;
  p.use_local_area = cfg.use_local_area;
  p.polar_refinement = cfg.polar_refinement;
  p.fallback_full_search = cfg.fallback_full_search;
  return p;
}

Estimator estimator_from_string(const std::string& s) {
  if (s == "ransac") return Estimator::kRansac;
  if (s == "degensac") return Estimator::kDegensac;
  throw InputError("unknown estimator '" + s + "' (expected ransac or degensac)");
}

std::vector<Variant> selected_variants(const RunConfig& cfg) {
  if (cfg.variants == "all" || cfg.variants.empty()) return all_variants();
  std::vector<Variant> out;
  std::stringstream ss(cfg.variants);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const Variant v = variant_from_string(trim(item));
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  if (out.empty()) throw InputError("bench.variants selects nothing");
  return out;
}

}  // namespace lacmatch
