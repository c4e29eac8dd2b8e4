#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <string>

#include "lacmatch/homography.hpp"
#include "lacmatch/image.hpp"
#include "lacmatch/rng.hpp"

namespace testing {

inline lacmatch::GrayImage random_image(int w, int h, std::uint64_t seed) {
  lacmatch::GrayImage img(w, h);
  lacmatch::CounterRng rng(seed);
  for (auto& p : img.pixels()) p = static_cast<std::uint8_t>(rng.below(256));
  return img;
}

/// Well-conditioned homography near a similarity with mild perspective.
inline lacmatch::Homography random_homography(lacmatch::CounterRng& rng) {
  const double a = rng.uniform(-0.5, 0.5), s = rng.uniform(0.8, 1.25);
  Eigen::Matrix3d m;
  m << s * std::cos(a), -s * std::sin(a), rng.uniform(-50, 50),
       s * std::sin(a), s * std::cos(a), rng.uniform(-50, 50),
       rng.uniform(-4e-4, 4e-4), rng.uniform(-4e-4, 4e-4), 1.0;
  return lacmatch::Homography(m);
}

inline double relative_frobenius(const lacmatch::Homography& a, const lacmatch::Homography& b) {
  return (a.matrix() - b.matrix()).norm() / b.matrix().norm();
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    lacmatch::CounterRng rng(std::hash<std::string>{}(tag) ^
                             static_cast<std::uint64_t>(std::chrono::steady_clock::now().time_since_epoch().count()));
    path_ = std::filesystem::temp_directory_path() / ("lacmatch_" + tag + "_" + std::to_string(rng.next_u64() % 1000000007));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& p) const { return path_ / p; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
