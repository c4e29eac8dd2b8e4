#include "lacmatch/beblid.hpp"

#include <algorithm>
#include <bit>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <set>
#include <tuple>

#include "lacmatch/errors.hpp"
#include "lacmatch/rng.hpp"
#include "binary_io.hpp"

namespace lacmatch {

namespace {

using detail::get_le;
using detail::put_le;

constexpr char kMagic[4] = {'L', 'A', 'C', 'B'};
constexpr std::uint16_t kFormatVersion = 1;

Point2 rotated_offset(double c, double s, int ox, int oy) {
  return {c * ox - s * oy, s * ox + c * oy};
}

// Feature value on an unrotated canonical patch whose centre is side/2.
double patch_feature(const IntegralImage& ii, int centre, const BoxPairCandidate& c) {
  const int s = c.box;
  const int half = s / 2;
  const int x1 = centre + c.p1x - half;
  const int y1 = centre + c.p1y - half;
  const int x2 = centre + c.p2x - half;
  const int y2 = centre + c.p2y - half;
  const auto sum1 = ii.box_sum(x1, y1, x1 + s, y1 + s);
  const auto sum2 = ii.box_sum(x2, y2, x2 + s, y2 + s);
  // Same expression as box_mean differences, so thresholds transfer exactly.
  const double area = static_cast<double>(s) * s;
  return static_cast<double>(sum1) / area - static_cast<double>(sum2) / area;
}

// Minimiser of sum_i exp(-gamma * a * z_i) over a >= 0 (z_i = l_i * margin_i),
// found by bisection on the derivative.
double fit_common_alpha(const std::vector<double>& z, double gamma) {
  auto derivative = [&](double a) {
    double emax = -std::numeric_limits<double>::infinity();
    for (double v : z) emax = std::max(emax, -gamma * a * v);
    double d = 0.0;
    for (double v : z) d += -gamma * v * std::exp(-gamma * a * v - emax);
    return d;
  };
  if (derivative(0.0) >= 0.0) return 0.0;
  double lo = 0.0;
  double hi = 1e-3;
  while (derivative(hi) < 0.0 && hi < 1e3) {
    lo = hi;
    hi *= 2.0;
  }
  if (derivative(hi) < 0.0) return hi;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (derivative(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double beblid_feature(const IntegralImage& ii, const Keypoint& kp, const BeblidWeakLearner& wl) {
  const double c = std::cos(kp.angle);
  const double s = std::sin(kp.angle);
  const Point2 p1 = kp.position + rotated_offset(c, s, wl.p1x, wl.p1y);
  const Point2 p2 = kp.position + rotated_offset(c, s, wl.p2x, wl.p2y);
  return box_mean(ii, p1, wl.box) - box_mean(ii, p2, wl.box);
}

BinaryDescriptor compute_beblid(const IntegralImage& ii, const Keypoint& kp,
                                const BeblidModel& model) {
  BinaryDescriptor d(model.bits());
  const double c = std::cos(kp.angle);
  const double s = std::sin(kp.angle);
  for (int k = 0; k < model.bits(); ++k) {
    const auto& wl = model.learners[static_cast<std::size_t>(k)];
    const Point2 p1 = kp.position + rotated_offset(c, s, wl.p1x, wl.p1y);
    const Point2 p2 = kp.position + rotated_offset(c, s, wl.p2x, wl.p2y);
    const double f = box_mean(ii, p1, wl.box) - box_mean(ii, p2, wl.box);
    if (beblid_response(f, wl.threshold) > 0) d.set(k, true);
  }
  return d;
}

DescriptorSet compute_beblid_all(const IntegralImage& ii, std::span<const Keypoint> kps,
                                 const BeblidModel& model) {
  DescriptorSet set(model.bits());
  for (const auto& kp : kps) set.push_back(compute_beblid(ii, kp, model));
  return set;
}

BinaryDescriptor describe_patch(const GrayImage& patch, const BeblidModel& model) {
  Keypoint kp;
  kp.position = {static_cast<double>(model.patch_side / 2),
                 static_cast<double>(model.patch_side / 2)};
  return compute_beblid(IntegralImage(patch), kp, model);
}

std::vector<BoxPairCandidate> beblid_candidate_grid(int patch_side, int stride,
                                                    std::span<const int> sizes) {
  static constexpr std::array<int, 4> kDefaultSizes{2, 4, 6, 8};
  if (sizes.empty()) sizes = kDefaultSizes;
  const int centre = patch_side / 2;
  std::vector<BoxPairCandidate> pool;
  for (int s : sizes) {
    const int half = s / 2;
    std::vector<std::pair<int, int>> centres;
    for (int y = half; y + (s - half) <= patch_side; y += stride)
      for (int x = half; x + (s - half) <= patch_side; x += stride) centres.emplace_back(x, y);
    for (std::size_t a = 0; a < centres.size(); ++a)
      for (std::size_t b = a + 1; b < centres.size(); ++b)
        pool.push_back({static_cast<std::int16_t>(centres[a].first - centre),
                        static_cast<std::int16_t>(centres[a].second - centre),
                        static_cast<std::int16_t>(centres[b].first - centre),
                        static_cast<std::int16_t>(centres[b].second - centre),
                        static_cast<std::uint16_t>(s)});
  }
  return pool;
}

BeblidTrainReport train_beblid(std::span<const PatchPairSample> samples,
                               std::span<const BoxPairCandidate> pool,
                               const BeblidTrainOptions& options) {
  if (samples.empty()) throw InputError("BEBLID training needs at least one sample");
  if (pool.empty()) throw InputError("BEBLID candidate pool is empty");
  if (options.rounds < 1) throw InputError("BEBLID rounds must be >= 1");
  if (!(options.gamma > 0.0)) throw InputError("BEBLID gamma must be positive");
  bool has_pos = false;
  bool has_neg = false;
  for (const auto& s : samples) {
    if (s.label != 1 && s.label != -1) throw InputError("patch pair label must be +1 or -1");
    has_pos |= s.label == 1;
    has_neg |= s.label == -1;
  }
  if (!has_pos || !has_neg) throw InputError("BEBLID training needs both labels present");

  const int side = samples.front().x.width();
  for (const auto& s : samples)
    if (s.x.width() != side || s.x.height() != side || s.y.width() != side ||
        s.y.height() != side)
      throw InputError("all training patches must be square and share one side length");
  const int centre = side / 2;
  for (const auto& c : pool) {
    const int half = c.box / 2;
    for (auto [ox, oy] : {std::pair<int, int>{c.p1x, c.p1y}, std::pair<int, int>{c.p2x, c.p2y}}) {
      const int x0 = centre + ox - half;
      const int y0 = centre + oy - half;
      if (c.box < 1 || x0 < 0 || y0 < 0 || x0 + c.box > side || y0 + c.box > side)
        throw InputError("candidate box leaves the training patch");
    }
  }

  const std::size_t n = samples.size();
  std::vector<IntegralImage> ix, iy;
  ix.reserve(n);
  iy.reserve(n);
  for (const auto& s : samples) {
    ix.emplace_back(s.x);
    iy.emplace_back(s.y);
  }

  // Working subset of the pool.
  CounterRng rng(options.seed);
  std::vector<std::size_t> chosen(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) chosen[i] = i;
  const std::size_t budget = options.candidate_budget > 0
                                 ? static_cast<std::size_t>(options.candidate_budget)
                                 : pool.size();
  if (budget < pool.size()) {
    for (std::size_t i = 0; i < budget; ++i) {
      const std::size_t j = i + rng.below(pool.size() - i);
      std::swap(chosen[i], chosen[j]);
    }
    chosen.resize(budget);
    std::sort(chosen.begin(), chosen.end());
  }

  // Per candidate: quantile thresholds and, per patch, the index of the
  // first threshold >= f. Then h(f; T_q) = +1 iff bucket(f) <= q.
  const int nq = std::clamp(options.threshold_quantiles, 1, 255);  // buckets are 8-bit
  const std::size_t m = chosen.size();
  std::vector<std::vector<float>> thresholds(m);
  std::vector<std::uint8_t> bucket_x(m * n), bucket_y(m * n);
  {
    std::vector<double> fx(n), fy(n), all;
    for (std::size_t c = 0; c < m; ++c) {
      const auto& cand = pool[chosen[c]];
      for (std::size_t i = 0; i < n; ++i) {
        fx[i] = patch_feature(ix[i], centre, cand);
        fy[i] = patch_feature(iy[i], centre, cand);
      }
      all.assign(fx.begin(), fx.end());
      all.insert(all.end(), fy.begin(), fy.end());
      std::sort(all.begin(), all.end());
      std::vector<float> ts;
      for (int q = 0; q < nq; ++q) {
        const std::size_t idx = static_cast<std::size_t>(
            (static_cast<double>(q) + 0.5) / nq * static_cast<double>(all.size()));
        ts.push_back(static_cast<float>(all[std::min(idx, all.size() - 1)]));
      }
      ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
      // Compared in double, as at inference.
      const auto bucket = [&ts](double f) {
        return static_cast<std::uint8_t>(
            std::lower_bound(ts.begin(), ts.end(), f, [](float t, double v) { return t < v; }) - ts.begin());
      };
      for (std::size_t i = 0; i < n; ++i) {
        bucket_x[c * n + i] = bucket(fx[i]);
        bucket_y[c * n + i] = bucket(fy[i]);
      }
      thresholds[c] = std::move(ts);
    }
  }

  BeblidTrainReport report;
  report.model.patch_side = side;
  report.model.gamma = options.gamma;

  std::vector<double> margin(n, 0.0);
  std::vector<double> weight(n, 1.0);
  report.initial_loss = static_cast<double>(n);
  std::set<std::pair<std::size_t, int>> used;
  std::vector<double> diff(static_cast<std::size_t>(nq) + 1);
  std::vector<double> round_alpha;
  std::vector<std::vector<std::int8_t>> agreements;  // h_k(x_i) h_k(y_i) per round

  for (int round = 0; round < options.rounds; ++round) {
    double total_wl = 0.0;
    for (std::size_t i = 0; i < n; ++i) total_wl += weight[i] * samples[i].label;

    double best_edge = -std::numeric_limits<double>::infinity();
    std::size_t best_c = 0;
    int best_q = 0;
    for (std::size_t c = 0; c < m; ++c) {
      const int tq = static_cast<int>(thresholds[c].size());
      std::fill(diff.begin(), diff.begin() + tq + 1, 0.0);
      const std::uint8_t* bx = &bucket_x[c * n];
      const std::uint8_t* by = &bucket_y[c * n];
      for (std::size_t i = 0; i < n; ++i) {
        const int lo = std::min(bx[i], by[i]);
        const int hi = std::max(bx[i], by[i]);
        if (lo == hi) continue;
        const double wl = weight[i] * samples[i].label;
        diff[static_cast<std::size_t>(lo)] += wl;
        diff[static_cast<std::size_t>(hi)] -= wl;
      }
      double disagree = 0.0;
      for (int q = 0; q < tq; ++q) {
        disagree += diff[static_cast<std::size_t>(q)];
        const double edge = total_wl - 2.0 * disagree;
        if (edge > best_edge && !used.count({chosen[c], q})) {
          best_edge = edge;
          best_c = c;
          best_q = q;
        }
      }
    }
    used.insert({chosen[best_c], best_q});

    std::vector<std::int8_t> agree(n);
    double w_plus = 0.0;
    double w_minus = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool hx = bucket_x[best_c * n + i] <= best_q;
      const bool hy = bucket_y[best_c * n + i] <= best_q;
      agree[i] = hx == hy ? 1 : -1;
      if (agree[i] * samples[i].label > 0)
        w_plus += weight[i];
      else
        w_minus += weight[i];
    }
    double alpha = 0.0;
    if (w_plus > w_minus) {
      const double floor_w = 1e-12 * (w_plus + w_minus);
      alpha = 0.5 / options.gamma * std::log(w_plus / std::max(w_minus, floor_w));
    }

    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      margin[i] += alpha * agree[i];
      weight[i] = std::exp(-options.gamma * samples[i].label * margin[i]);
      loss += weight[i];
    }
    report.loss_per_round.push_back(loss);
    round_alpha.push_back(alpha);
    agreements.push_back(std::move(agree));

    const auto& cand = pool[chosen[best_c]];
    BeblidWeakLearner wl;
    wl.p1x = cand.p1x;
    wl.p1y = cand.p1y;
    wl.p2x = cand.p2x;
    wl.p2y = cand.p2y;
    wl.box = cand.box;
    wl.threshold = thresholds[best_c][static_cast<std::size_t>(best_q)];
    wl.alpha = static_cast<float>(alpha);
    report.model.learners.push_back(wl);
  }

  // One shared weight for all learners.
  std::vector<double> z(n, 0.0);
  for (const auto& agree : agreements)
    for (std::size_t i = 0; i < n; ++i) z[i] += agree[i];
  for (std::size_t i = 0; i < n; ++i) z[i] *= samples[i].label;
  report.common_alpha = fit_common_alpha(z, options.gamma);
  report.common_alpha_loss = 0.0;
  for (double v : z) report.common_alpha_loss += std::exp(-options.gamma * report.common_alpha * v);
  for (auto& wl : report.model.learners) wl.alpha = static_cast<float>(report.common_alpha);
  return report;
}

double beblid_loss(std::span<const PatchPairSample> samples, const BeblidModel& model,
                   double gamma) {
  double loss = 0.0;
  Keypoint kp;
  kp.position = {static_cast<double>(model.patch_side / 2),
                 static_cast<double>(model.patch_side / 2)};
  for (const auto& s : samples) {
    const IntegralImage ix(s.x);
    const IntegralImage iy(s.y);
    double m = 0.0;
    for (const auto& wl : model.learners) {
      const int hx = beblid_response(beblid_feature(ix, kp, wl), wl.threshold);
      const int hy = beblid_response(beblid_feature(iy, kp, wl), wl.threshold);
      m += wl.alpha * hx * hy;
    }
    loss += std::exp(-gamma * s.label * m);
  }
  return loss;
}

void save_beblid_model(const std::filesystem::path& path, const BeblidModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out.write(kMagic, 4);
  put_le<std::uint16_t>(out, kFormatVersion);
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(model.patch_side));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.learners.size()));
  for (const auto& wl : model.learners) {
    put_le(out, wl.p1x);
    put_le(out, wl.p1y);
    put_le(out, wl.p2x);
    put_le(out, wl.p2y);
    put_le(out, wl.box);
    put_le(out, wl.threshold);
    put_le(out, wl.alpha);
  }
  if (!out) throw InputError("failed writing " + path.string());
}

BeblidModel load_beblid_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0)
    throw InputError("not a BEBLID model file: " + path.string());
  const auto version = get_le<std::uint16_t>(in, path);
  if (version != kFormatVersion)
    throw InputError("unsupported BEBLID model version " + std::to_string(version));
  BeblidModel model;
  model.patch_side = get_le<std::uint16_t>(in, path);
  const auto k = get_le<std::uint32_t>(in, path);
  if (k < 1) throw InputError("BEBLID model has no learners: " + path.string());
  model.learners.resize(k);
  for (auto& wl : model.learners) {
    wl.p1x = get_le<std::int16_t>(in, path);
    wl.p1y = get_le<std::int16_t>(in, path);
    wl.p2x = get_le<std::int16_t>(in, path);
    wl.p2y = get_le<std::int16_t>(in, path);
    wl.box = get_le<std::uint16_t>(in, path);
    wl.threshold = get_le<float>(in, path);
    wl.alpha = get_le<float>(in, path);
  }
  return model;
}

}  // namespace lacmatch
