#include "lacmatch/matching.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <limits>

#include "lacmatch/errors.hpp"

namespace lacmatch {

namespace {

template <int W>
int hamming_words(const std::uint64_t* a, const std::uint64_t* b) {
  int d = 0;
  for (int i = 0; i < W; ++i) d += std::popcount(a[i] ^ b[i]);
  return d;
}

int hamming_words(const std::uint64_t* a, const std::uint64_t* b, int words) {
  int d = 0;
  for (int i = 0; i < words; ++i) d += std::popcount(a[i] ^ b[i]);
  return d;
}

// For each row of `from`, index of and distance to the nearest row of `to`.
template <int W>
void nearest_fixed(const DescriptorSet& from, const DescriptorSet& to, std::vector<int>& idx,
                   std::vector<int>& dist) {
  const std::size_t nf = from.size();
  const std::size_t nt = to.size();
  idx.assign(nf, -1);
  dist.assign(nf, std::numeric_limits<int>::max());
  for (std::size_t i = 0; i < nf; ++i) {
    const std::uint64_t* a = from.row(i);
    int best = std::numeric_limits<int>::max();
    int best_j = -1;
    for (std::size_t j = 0; j < nt; ++j) {
      const int d = hamming_words<W>(a, to.row(j));
      if (d < best) {
        best = d;
        best_j = static_cast<int>(j);
      }
    }
    idx[i] = best_j;
    dist[i] = best;
  }
}

void nearest(const DescriptorSet& from, const DescriptorSet& to, std::vector<int>& idx,
             std::vector<int>& dist) {
  switch (from.words_per_descriptor()) {
    case 4:
      return nearest_fixed<4>(from, to, idx, dist);
    case 8:
      return nearest_fixed<8>(from, to, idx, dist);
    default:
      break;
  }
  const int words = from.words_per_descriptor();
  idx.assign(from.size(), -1);
  dist.assign(from.size(), std::numeric_limits<int>::max());
  for (std::size_t i = 0; i < from.size(); ++i)
    for (std::size_t j = 0; j < to.size(); ++j) {
      const int d = hamming_words(from.row(i), to.row(j), words);
      if (d < dist[i]) {
        dist[i] = d;
        idx[i] = static_cast<int>(j);
      }
    }
}

// 3x3 neighbourhood in row-major order, centre at 4.
constexpr std::array<std::array<int, 2>, 9> kNeighbours{
    {{-1, -1}, {0, -1}, {1, -1}, {-1, 0}, {0, 0}, {1, 0}, {-1, 1}, {0, 1}, {1, 1}}};
// Clockwise ring of the 8 outer neighbours.
constexpr std::array<int, 8> kRing{0, 1, 2, 5, 8, 7, 6, 3};

std::array<std::array<int, 9>, 8> rotation_permutations() {
  std::array<std::array<int, 9>, 8> perms{};
  for (int r = 0; r < 8; ++r) {
    perms[r][4] = 4;
    for (int i = 0; i < 8; ++i) perms[r][kRing[i]] = kRing[(i + r) % 8];
  }
  return perms;
}

struct Grid {
  int cols = 0;
  int rows = 0;
  int cell(int cx, int cy) const { return cy * cols + cx; }
  // Neighbour k of cell (cx, cy) or -1 when outside.
  int neighbour(int cx, int cy, int k) const {
    const int nx = cx + kNeighbours[k][0];
    const int ny = cy + kNeighbours[k][1];
    if (nx < 0 || ny < 0 || nx >= cols || ny >= rows) return -1;
    return cell(nx, ny);
  }
};

}  // namespace

int hamming(DescriptorView a, DescriptorView b) {
  if (a.bits != b.bits) throw InputError("Hamming distance needs equal descriptor lengths");
  return hamming_words(a.words.data(), b.words.data(), static_cast<int>(a.words.size()));
}

std::vector<MatchPair> brute_force_match(const DescriptorSet& query, const DescriptorSet& train,
                                         bool cross_check) {
  std::vector<MatchPair> out;
  if (query.empty() || train.empty()) return out;
  if (query.bits() != train.bits())
    throw InputError("cannot match descriptor sets of different lengths");
  std::vector<int> q_idx, q_dist;
  nearest(query, train, q_idx, q_dist);
  std::vector<int> t_idx, t_dist;
  if (cross_check) nearest(train, query, t_idx, t_dist);
  out.reserve(query.size());
  for (std::size_t i = 0; i < query.size(); ++i) {
    const int j = q_idx[i];
    if (cross_check && t_idx[static_cast<std::size_t>(j)] != static_cast<int>(i)) continue;
    out.push_back({static_cast<int>(i), j, q_dist[i]});
  }
  return out;
}

GmsResult gms_filter(std::span<const MatchPair> matches, std::span<const Keypoint> frame_kps,
                     std::span<const Keypoint> template_kps, Size2 frame_dims,
                     Size2 template_dims, const GmsConfig& cfg) {
  GmsResult result;
  const std::size_t n = matches.size();
  result.mask.assign(n, false);
  result.scores.assign(n, 0.0);
  if (n == 0) return result;
  if (cfg.grid_rows < 1 || cfg.grid_cols < 1) throw InputError("GMS grid must be at least 1x1");
  for (const auto& m : matches)
    if (m.query_idx < 0 || m.train_idx < 0 ||
        static_cast<std::size_t>(m.query_idx) >= frame_kps.size() ||
        static_cast<std::size_t>(m.train_idx) >= template_kps.size())
      throw InputError("match index out of keypoint range");

  const double cw = static_cast<double>(frame_dims.width) / cfg.grid_cols;
  const double ch = static_cast<double>(frame_dims.height) / cfg.grid_rows;
  // Shifted grids need one extra column/row.
  const Grid left{cfg.grid_cols + 1, cfg.grid_rows + 1};
  const Grid right{std::max(1, static_cast<int>(std::ceil(template_dims.width / cw))),
                   std::max(1, static_cast<int>(std::ceil(template_dims.height / ch)))};
  const std::size_t nl = static_cast<std::size_t>(left.cols) * left.rows;
  const std::size_t nr = static_cast<std::size_t>(right.cols) * right.rows;

  std::vector<int> right_cell(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 p = template_kps[static_cast<std::size_t>(matches[i].train_idx)].position;
    const int cx = std::clamp(static_cast<int>(std::floor(p.x / cw)), 0, right.cols - 1);
    const int cy = std::clamp(static_cast<int>(std::floor(p.y / ch)), 0, right.rows - 1);
    right_cell[i] = right.cell(cx, cy);
  }

  static const auto kPerms = rotation_permutations();
  const int n_perms = cfg.with_rotation ? 8 : 1;

  std::vector<int> counts(nl * nr);
  std::vector<int> left_cell(n);
  std::vector<int> per_cell(nl);
  std::vector<std::vector<int>> members(nl);

  auto score = [&](int l, int r, const std::array<int, 9>& perm) {
    const int lx = l % left.cols, ly = l / left.cols;
    const int rx = r % right.cols, ry = r / right.cols;
    int s = 0;
    for (int k = 0; k < 9; ++k) {
      const int a = left.neighbour(lx, ly, k);
      const int b = right.neighbour(rx, ry, perm[k]);
      if (a < 0 || b < 0) continue;
      s += counts[static_cast<std::size_t>(a) * nr + b];
    }
    return s;
  };

  for (int offset = 0; offset < 4; ++offset) {
    const double ox = (offset & 1) ? 0.5 : 0.0;
    const double oy = (offset & 2) ? 0.5 : 0.0;
    std::fill(counts.begin(), counts.end(), 0);
    std::fill(per_cell.begin(), per_cell.end(), 0);
    for (auto& v : members) v.clear();

    for (std::size_t i = 0; i < n; ++i) {
      const Point2 p = frame_kps[static_cast<std::size_t>(matches[i].query_idx)].position;
      const int cx = std::clamp(static_cast<int>(std::floor(p.x / cw + ox)), 0, left.cols - 1);
      const int cy = std::clamp(static_cast<int>(std::floor(p.y / ch + oy)), 0, left.rows - 1);
      const int l = left.cell(cx, cy);
      left_cell[i] = l;
      ++counts[static_cast<std::size_t>(l) * nr + right_cell[i]];
      ++per_cell[static_cast<std::size_t>(l)];
      members[static_cast<std::size_t>(l)].push_back(static_cast<int>(i));
    }

    int non_empty = 0;
    for (int c : per_cell) non_empty += c > 0;
    const double mean_per_cell = static_cast<double>(n) / non_empty;
    const double tau = cfg.alpha * std::sqrt(mean_per_cell);

    for (std::size_t l = 0; l < nl; ++l) {
      if (members[l].empty()) continue;
      // Template cell receiving most matches from this frame cell.
      int best_r = -1;
      int best_count = 0;
      for (int i : members[l]) {
        const int r = right_cell[static_cast<std::size_t>(i)];
        const int c = counts[l * nr + static_cast<std::size_t>(r)];
        if (c > best_count || (c == best_count && r < best_r)) {
          best_count = c;
          best_r = r;
        }
      }
      int best_score = 0;
      int best_perm = 0;
      for (int p = 0; p < n_perms; ++p) {
        const int s = score(static_cast<int>(l), best_r, kPerms[static_cast<std::size_t>(p)]);
        if (s > best_score) {
          best_score = s;
          best_perm = p;
        }
      }
      const bool accept = best_score > tau;
      for (int i : members[l]) {
        const auto ui = static_cast<std::size_t>(i);
        const int r = right_cell[ui];
        const double own = r == best_r ? best_score
                                       : score(static_cast<int>(l), r,
                                               kPerms[static_cast<std::size_t>(best_perm)]);
        result.scores[ui] = std::max(result.scores[ui], own);
        if (accept && r == best_r) result.mask[ui] = true;
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i)
    (result.mask[i] ? result.kept : result.rejected).push_back(matches[i]);
  auto by_query = [](const MatchPair& a, const MatchPair& b) {
    if (a.query_idx != b.query_idx) return a.query_idx < b.query_idx;
    return a.train_idx < b.train_idx;
  };
  std::stable_sort(result.kept.begin(), result.kept.end(), by_query);
  std::stable_sort(result.rejected.begin(), result.rejected.end(), by_query);
  return result;
}

}  // namespace lacmatch
