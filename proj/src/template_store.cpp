#include "lacmatch/template_store.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "binary_io.hpp"
#include "lacmatch/errors.hpp"

namespace lacmatch {

namespace fs = std::filesystem;
using detail::get_le;
using detail::put_le;
using nlohmann::json;

namespace {

constexpr char kFeatureMagic[4] = {'L', 'A', 'C', 'F'};
constexpr std::uint16_t kFeatureVersion = 1;
constexpr int kCacheVersion = 1;

std::string blob_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "template_%03d.lacf", index);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
}

void require(const fs::path& path) {
  if (!fs::exists(path))
    throw MissingCacheError("template cache is missing " + path.string() + "; run prepare first");
}

}  // namespace

void save_feature_set(const fs::path& path, const FeatureSet& set) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  const int bits = set.descriptors.bits();
  out.write(kFeatureMagic, 4);
  put_le<std::uint16_t>(out, kFeatureVersion);
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(bits));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(set.keypoints.size()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(set.image_size.width));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(set.image_size.height));
  const std::size_t nbytes = static_cast<std::size_t>((bits + 7) / 8);
  std::vector<std::uint8_t> bytes(nbytes);
  for (std::size_t i = 0; i < set.keypoints.size(); ++i) {
    const auto& kp = set.keypoints[i];
    put_le(out, kp.position.x);
    put_le(out, kp.position.y);
    put_le(out, kp.response);
    put_le(out, kp.angle);
    const auto d = set.descriptors.view(i);
    std::fill(bytes.begin(), bytes.end(), 0);
    for (int k = 0; k < bits; ++k)
      if (d.bit(k)) bytes[static_cast<std::size_t>(k / 8)] |= static_cast<std::uint8_t>(1u << (k % 8));
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(nbytes));
  }
  if (!out) throw InputError("failed writing " + path.string());
}

FeatureSet load_feature_set(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingCacheError("cannot open " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, kFeatureMagic, 4) != 0)
    throw InputError("not a feature blob: " + path.string());
  if (get_le<std::uint16_t>(in, path) != kFeatureVersion)
    throw InputError("unsupported feature blob version: " + path.string());
  const int bits = get_le<std::uint16_t>(in, path);
  if (bits < 1) throw InputError("feature blob has zero-length descriptors: " + path.string());
  const auto count = get_le<std::uint32_t>(in, path);
  FeatureSet set;
  set.image_size.width = static_cast<int>(get_le<std::uint32_t>(in, path));
  set.image_size.height = static_cast<int>(get_le<std::uint32_t>(in, path));
  set.descriptors = DescriptorSet(bits);
  const std::size_t nbytes = static_cast<std::size_t>((bits + 7) / 8);
  std::vector<std::uint8_t> bytes(nbytes);
  for (std::uint32_t i = 0; i < count; ++i) {
    Keypoint kp;
    kp.position.x = get_le<double>(in, path);
    kp.position.y = get_le<double>(in, path);
    kp.response = get_le<float>(in, path);
    kp.angle = get_le<float>(in, path);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(nbytes));
    if (in.gcount() != static_cast<std::streamsize>(nbytes)) throw InputError("truncated file: " + path.string());
    BinaryDescriptor d(bits);
    for (int k = 0; k < bits; ++k) d.set(k, (bytes[static_cast<std::size_t>(k / 8)] >> (k % 8)) & 1u);
    set.keypoints.push_back(kp);
    set.descriptors.push_back(d);
  }
  return set;
}

void save_template_cache(const fs::path& dir, const TemplateSet& set, const CacheInfo& info,
                         const BeblidModel* beblid) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create cache directory " + dir.string() + ": " + ec.message());
  if (info.descriptor == DescriptorKind::kBeblid && !beblid)
    throw InputError("a BEBLID cache needs its model");

  json manifest;
  manifest["format_version"] = kCacheVersion;
  manifest["panorama"] = info.panorama;
  manifest["panorama_size"] = {set.panorama_size.width, set.panorama_size.height};
  manifest["k"] = info.k;
  manifest["seed"] = info.seed;
  manifest["template_size"] = {info.template_size.width, info.template_size.height};
  manifest["features"] = {{"fast_threshold", info.fast_threshold},
                          {"max_keypoints", info.max_keypoints},
                          {"descriptor", to_string(info.descriptor)}};
  manifest["beblid_model"] = beblid ? "beblid.lacb" : "";
  json templates = json::array();
  for (const auto& t : set.templates) {
    const std::string blob = blob_name(t.index);
    save_feature_set(dir / blob, t.features);
    templates.push_back({{"index", t.index},
                         {"rect", {t.rect.x, t.rect.y, t.rect.w, t.rect.h}},
                         {"center", {t.center.x, t.center.y}},
                         {"label_ids", t.label_ids},
                         {"keypoints", t.features.keypoints.size()},
                         {"features", blob}});
  }
  manifest["templates"] = templates;

  write_labels_file(dir / "labels.json", info.panorama, set.labels);
  write_text(dir / "topology.json", set.topology.to_json());
  if (beblid) save_beblid_model(dir / "beblid.lacb", *beblid);
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

LoadedCache load_template_cache(const fs::path& dir) {
  if (!fs::is_directory(dir))
    throw MissingCacheError("template cache " + dir.string() + " not found; run prepare first");
  require(dir / "manifest.json");
  require(dir / "labels.json");

  json m;
  try {
    std::ifstream in(dir / "manifest.json");
    m = json::parse(in);
  } catch (const json::exception& e) {
    throw InputError("malformed cache manifest: " + std::string(e.what()));
  }

  LoadedCache out;
  try {
    if (m.at("format_version").get<int>() != kCacheVersion) throw InputError("unsupported cache format version");
    out.info.panorama = m.at("panorama").get<std::string>();
    out.info.k = m.at("k").get<int>();
    out.info.seed = m.at("seed").get<std::uint64_t>();
    out.info.template_size = {m.at("template_size").at(0).get<int>(), m.at("template_size").at(1).get<int>()};
    const auto& f = m.at("features");
    out.info.fast_threshold = f.at("fast_threshold").get<int>();
    out.info.max_keypoints = f.at("max_keypoints").get<int>();
    out.info.descriptor = descriptor_kind_from_string(f.at("descriptor").get<std::string>());
    const auto model = m.at("beblid_model").get<std::string>();
    out.info.has_beblid = !model.empty();

    out.features.fast_threshold = out.info.fast_threshold;
    out.features.max_keypoints = out.info.max_keypoints;
    out.features.descriptor = out.info.descriptor;
    if (out.info.has_beblid) {
      require(dir / model);
      out.features.beblid = std::make_shared<BeblidModel>(load_beblid_model(dir / model));
    }
    if (out.info.descriptor == DescriptorKind::kBeblid && !out.features.beblid)
      throw InputError("BEBLID cache without a model file");

    out.set.panorama_size = {m.at("panorama_size").at(0).get<int>(), m.at("panorama_size").at(1).get<int>()};
    out.set.labels = read_labels_file(dir / "labels.json").labels;
    out.set.topology = build_topology(out.set.labels);
    for (const auto& jt : m.at("templates")) {
      Template t;
      t.index = jt.at("index").get<int>();
      const auto& r = jt.at("rect");
      t.rect = {r.at(0).get<int>(), r.at(1).get<int>(), r.at(2).get<int>(), r.at(3).get<int>()};
      t.center = {jt.at("center").at(0).get<double>(), jt.at("center").at(1).get<double>()};
      t.label_ids = jt.at("label_ids").get<std::vector<int>>();
      const fs::path blob = dir / jt.at("features").get<std::string>();
      require(blob);
      t.features = load_feature_set(blob);
      if (t.index != static_cast<int>(out.set.templates.size()))
        throw InputError("cache templates are not stored in index order");
      out.set.templates.push_back(std::move(t));
    }
  } catch (const json::exception& e) {
    throw InputError("malformed cache manifest: " + std::string(e.what()));
  }
  if (out.set.templates.empty()) throw InputError("cache holds no templates");
  return out;
}

}  // namespace lacmatch
