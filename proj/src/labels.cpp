#include "lacmatch/labels.hpp"

#include <fstream>
#include <json.hpp>
#include <set>

#include "lacmatch/errors.hpp"

namespace lacmatch {

LabelsFile read_labels_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open labels file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("malformed labels file " + path.string() + ": " + e.what());
  }
  LabelsFile out;
  try {
    std::filesystem::path pano = j.at("panorama").get<std::string>();
    out.panorama = pano.is_absolute() ? pano : path.parent_path() / pano;
    for (const auto& item : j.at("labels")) {
      Label l;
      l.id = item.at("id").get<int>();
      l.name = item.value("name", std::to_string(l.id));
      l.position = {item.at("x").get<double>(), item.at("y").get<double>()};
      out.labels.push_back(std::move(l));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError("labels file " + path.string() + ": " + e.what());
  }
  if (out.labels.empty()) throw InputError("labels file has no labels: " + path.string());
  std::set<int> ids;
  for (const auto& l : out.labels)
    if (!ids.insert(l.id).second)
      throw InputError("duplicate label id " + std::to_string(l.id));
  return out;
}

void write_labels_file(const std::filesystem::path& path, const std::string& panorama,
                       std::span<const Label> labels) {
  nlohmann::json j;
  j["panorama"] = panorama;
  j["labels"] = nlohmann::json::array();
  for (const auto& l : labels)
    j["labels"].push_back({{"id", l.id}, {"name", l.name}, {"x", l.position.x}, {"y", l.position.y}});
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

void validate_labels(std::span<const Label> labels, Size2 bounds) {
  std::set<int> ids;
  for (const auto& l : labels) {
    if (!ids.insert(l.id).second) throw InputError("duplicate label id " + std::to_string(l.id));
    if (!is_finite(l.position) || l.position.x < 0 || l.position.y < 0 ||
        l.position.x >= bounds.width || l.position.y >= bounds.height)
      throw InputError("label " + std::to_string(l.id) + " lies outside the panorama");
  }
}

}  // namespace lacmatch
