#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <sstream>

#include "cli.hpp"
#include "lacmatch/config.hpp"
#include "lacmatch/errors.hpp"
#include "lacmatch/evaluation.hpp"
#include "lacmatch/extractor.hpp"
#include "lacmatch/homography.hpp"
#include "lacmatch/lac.hpp"
#include "lacmatch/matching.hpp"

namespace py = pybind11;
using namespace lacmatch;

namespace {

using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using F64Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

GrayImage to_image(const U8Array& a) {
  if (a.ndim() != 2) throw InputError("expected a 2-D uint8 array");
  const auto h = static_cast<int>(a.shape(0)), w = static_cast<int>(a.shape(1));
  if (w < 1 || h < 1) throw InputError("image must not be empty");
  return GrayImage(w, h, std::vector<std::uint8_t>(a.data(), a.data() + a.size()));
}

U8Array from_image(const GrayImage& img) {
  U8Array out({img.height(), img.width()});
  std::memcpy(out.mutable_data(), img.pixels().data(), img.pixels().size());
  return out;
}

F64Array keypoint_array(std::span<const Keypoint> kps) {
  F64Array out({static_cast<py::ssize_t>(kps.size()), py::ssize_t{4}});
  auto v = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < kps.size(); ++i) {
    const auto r = static_cast<py::ssize_t>(i);
    v(r, 0) = kps[i].position.x;
    v(r, 1) = kps[i].position.y;
    v(r, 2) = kps[i].response;
    v(r, 3) = kps[i].angle;
  }
  return out;
}

// Bit k of a descriptor is bit k % 8 of byte k / 8.
U8Array descriptor_array(const DescriptorSet& d) {
  const auto n = static_cast<py::ssize_t>(d.size());
  const py::ssize_t bytes = (d.bits() + 7) / 8;
  U8Array out({n, bytes});
  auto v = out.mutable_unchecked<2>();
  for (py::ssize_t i = 0; i < n; ++i) {
    const auto desc = d.at(static_cast<std::size_t>(i));
    for (py::ssize_t b = 0; b < bytes; ++b) {
      std::uint8_t byte = 0;
      for (int k = 0; k < 8 && b * 8 + k < d.bits(); ++k)
        if (desc.bit(static_cast<int>(b * 8 + k))) byte |= static_cast<std::uint8_t>(1u << k);
      v(i, b) = byte;
    }
  }
  return out;
}

DescriptorSet descriptor_set(const U8Array& a) {
  if (a.ndim() != 2) throw InputError("descriptors must be an (n, bytes) uint8 array");
  const int bits = static_cast<int>(a.shape(1)) * 8;
  DescriptorSet set(bits);
  auto v = a.unchecked<2>();
  for (py::ssize_t i = 0; i < a.shape(0); ++i) {
    BinaryDescriptor d(bits);
    for (int k = 0; k < bits; ++k) d.set(k, (v(i, k / 8) >> (k % 8)) & 1u);
    set.push_back(d);
  }
  return set;
}

std::vector<Correspondence> pairs_from(const F64Array& src, const F64Array& dst) {
  if (src.ndim() != 2 || src.shape(1) != 2 || dst.ndim() != 2 || dst.shape(1) != 2 ||
      src.shape(0) != dst.shape(0))
    throw InputError("src and dst must be (n, 2) arrays of equal length");
  auto s = src.unchecked<2>();
  auto d = dst.unchecked<2>();
  std::vector<Correspondence> out;
  for (py::ssize_t i = 0; i < src.shape(0); ++i) out.push_back({{s(i, 0), s(i, 1)}, {d(i, 0), d(i, 1)}});
  return out;
}

F64Array matrix_array(const Homography& h) {
  F64Array out({3, 3});
  auto v = out.mutable_unchecked<2>();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) v(r, c) = h.matrix()(r, c);
  return out;
}

py::tuple robust(const F64Array& src, const F64Array& dst, double tol, std::uint64_t seed, bool degenerate_aware) {
  RobustConfig cfg;
  cfg.reproj_tol = tol;
  cfg.seed = seed;
  const auto pairs = pairs_from(src, dst);
  const RobustEstimate est = degenerate_aware ? degensac(pairs, cfg) : ransac(pairs, cfg);
  if (!est.success) return py::make_tuple(py::none(), py::array_t<bool>(0));
  py::array_t<bool> mask(static_cast<py::ssize_t>(est.inlier_mask.size()));
  for (std::size_t i = 0; i < est.inlier_mask.size(); ++i) mask.mutable_at(static_cast<py::ssize_t>(i)) = est.inlier_mask[i];
  return py::make_tuple(matrix_array(est.homography), mask);
}

FeatureConfig features_for(int max_keypoints, int fast_threshold) {
  FeatureConfig f;
  f.max_keypoints = max_keypoints;
  f.fast_threshold = fast_threshold;
  return f;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Panorama label matching: ORB-style features, GMS, robust homographies and local clustering.";
  m.attr("__version__") = kVersion;

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<InfeasibleError>(m, "InfeasibleError", PyExc_ValueError);
  py::register_exception<BoundaryError>(m, "BoundaryError", PyExc_IndexError);

  m.def("synthetic_panorama",
        [](int width, int height, std::uint64_t seed) { return from_image(synthetic_panorama({width, height}, seed)); },
        py::arg("width"), py::arg("height"), py::arg("seed") = 0);

  m.def("box_mean",
        [](const U8Array& img, double x, double y, int side) {
          return box_mean(IntegralImage(to_image(img)), {x, y}, side);
        },
        py::arg("image"), py::arg("x"), py::arg("y"), py::arg("side"),
        "Mean of the side x side box centred at (x, y).");

  m.def("detect_keypoints",
        [](const U8Array& img, int fast_threshold, int max_keypoints) {
          return keypoint_array(detect_keypoints(to_image(img), fast_threshold, max_keypoints));
        },
        py::arg("image"), py::arg("fast_threshold") = 20, py::arg("max_keypoints") = 2500,
        "FAST-9 keypoints as rows of (x, y, response, angle), strongest first.");

  m.def("extract_brief",
        [](const U8Array& img, int max_keypoints, int fast_threshold) {
          const FeatureSet fs = extract_features(to_image(img), features_for(max_keypoints, fast_threshold));
          return py::make_tuple(keypoint_array(fs.keypoints), descriptor_array(fs.descriptors));
        },
        py::arg("image"), py::arg("max_keypoints") = 2500, py::arg("fast_threshold") = 20,
        "Keypoints and rotated BRIEF-256 descriptors (32 bytes per row).");

  m.def("match_descriptors",
        [](const U8Array& query, const U8Array& train, bool cross_check) {
          const auto matches = brute_force_match(descriptor_set(query), descriptor_set(train), cross_check);
          py::array_t<int> out({static_cast<py::ssize_t>(matches.size()), py::ssize_t{3}});
          auto v = out.mutable_unchecked<2>();
          for (std::size_t i = 0; i < matches.size(); ++i) {
            const auto r = static_cast<py::ssize_t>(i);
            v(r, 0) = matches[i].query_idx;
            v(r, 1) = matches[i].train_idx;
            v(r, 2) = matches[i].distance;
          }
          return out;
        },
        py::arg("query"), py::arg("train"), py::arg("cross_check") = false,
        "Nearest train descriptor per query row: (query_idx, train_idx, distance).");

  m.def("estimate_homography", [](const F64Array& src, const F64Array& dst) {
    return matrix_array(estimate_dlt(pairs_from(src, dst)));
  }, py::arg("src"), py::arg("dst"), "Normalised DLT through all pairs.");

  m.def("ransac",
        [](const F64Array& src, const F64Array& dst, double tol, std::uint64_t seed) {
          return robust(src, dst, tol, seed, false);
        },
        py::arg("src"), py::arg("dst"), py::arg("reproj_tol") = 3.0, py::arg("seed") = 0,
        "(H, inlier mask), or (None, []) when no model is found.");
  m.def("degensac",
        [](const F64Array& src, const F64Array& dst, double tol, std::uint64_t seed) {
          return robust(src, dst, tol, seed, true);
        },
        py::arg("src"), py::arg("dst"), py::arg("reproj_tol") = 3.0, py::arg("seed") = 0);

  m.def("match_images",
        [](const U8Array& frame, const U8Array& tpl, int max_keypoints, std::uint64_t seed) {
          const FeatureConfig fc = features_for(max_keypoints, 20);
          const FeatureSet a = extract_features(to_image(frame), fc);
          const FeatureSet b = extract_features(to_image(tpl), fc);
          const auto raw = brute_force_match(a.descriptors, b.descriptors, false);
          const auto kept = gms_filter(raw, a.keypoints, b.keypoints, a.image_size, b.image_size).kept;
          py::dict out;
          out["raw_matches"] = raw.size();
          out["kept_matches"] = kept.size();
          out["homography"] = py::none();
          out["inliers"] = 0;
          if (kept.size() >= 4) {
            RobustConfig rc;
            rc.seed = seed;
            const auto est = degensac(kept, a.keypoints, b.keypoints, rc);
            if (est.success) {
              out["homography"] = matrix_array(est.homography);
              out["inliers"] = est.inlier_count();
            }
          }
          return out;
        },
        py::arg("frame"), py::arg("template"), py::arg("max_keypoints") = 2500, py::arg("seed") = 0,
        "BRIEF + GMS + DEGENSAC; the homography maps template to frame.");

  m.def("kmeans",
        [](const F64Array& points, int k, int max_iter, std::uint64_t seed) {
          if (points.ndim() != 2 || points.shape(1) != 2) throw InputError("points must be an (n, 2) array");
          auto v = points.unchecked<2>();
          std::vector<Point2> pts;
          for (py::ssize_t i = 0; i < points.shape(0); ++i) pts.push_back({v(i, 0), v(i, 1)});
          const KMeansResult r = kmeans(pts, k, max_iter, seed);
          F64Array centers({static_cast<py::ssize_t>(r.centers.size()), py::ssize_t{2}});
          auto c = centers.mutable_unchecked<2>();
          for (std::size_t i = 0; i < r.centers.size(); ++i) {
            c(static_cast<py::ssize_t>(i), 0) = r.centers[i].x;
            c(static_cast<py::ssize_t>(i), 1) = r.centers[i].y;
          }
          return py::make_tuple(centers, r.assignment, r.objective_history);
        },
        py::arg("points"), py::arg("k"), py::arg("max_iter") = 100, py::arg("seed") = 0,
        "(centers, assignment, objective per iteration).");

  m.def("run_cli",
        [](const std::vector<std::string>& args) {
          std::ostringstream out, err;
          int code = 0;
          {
            py::gil_scoped_release release;
            code = cli::run(args, out, err);
          }
          return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the command line; returns (exit code, stdout, stderr).");
}
