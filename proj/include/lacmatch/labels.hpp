#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "lacmatch/image.hpp"

namespace lacmatch {

struct Label {
  int id = 0;
  std::string name;
  Point2 position;  // panorama pixels
};

using LabelPositions = std::map<int, Point2>;

struct LabelsFile {
  std::filesystem::path panorama;  // resolved against the labels file directory
  std::vector<Label> labels;
};

/// {"panorama": "path", "labels": [{"id", "name", "x", "y"}]}. Ids must be
/// unique. Throws InputError.
LabelsFile read_labels_file(const std::filesystem::path& path);
void write_labels_file(const std::filesystem::path& path, const std::string& panorama,
                       std::span<const Label> labels);

/// Throws InputError if a label lies outside `bounds` or ids repeat.
void validate_labels(std::span<const Label> labels, Size2 bounds);

}  // namespace lacmatch
