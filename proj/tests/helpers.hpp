#pragma once

#include <algorithm>
#include <optional>
#include <queue>
#include <random>
#include <vector>

#include "cgw/cli.hpp"
#include "cgw/witness.hpp"

namespace cgw::testing {

// -----------------------------------------------------------------------
// Independent brute-force minimal-k enumerator. Deliberately implemented
// with different machinery than the library oracle (recursive coloring
// enumeration, BFS components) so the two can cross-check each other.
// -----------------------------------------------------------------------

inline bool bf_coloring_ok(const Subspace& s, const std::vector<int>& color, int k, Dist r, Dist d) {
  int n = static_cast<int>(s.pts.size());
  for (int c = 0; c < k; ++c) {
    std::vector<int> members;
    for (int i = 0; i < n; ++i)
      if (color[i] == c) members.push_back(i);
    std::vector<int> comp(members.size(), -1);
    int next = 0;
    for (size_t i = 0; i < members.size(); ++i) {
      if (comp[i] >= 0) continue;
      std::queue<size_t> q;
      comp[i] = next;
      q.push(i);
      while (!q.empty()) {
        size_t u = q.front();
        q.pop();
        for (size_t v = 0; v < members.size(); ++v)
          if (comp[v] < 0 && s.ambient->dist(s.pts[members[u]], s.pts[members[v]]) <= r) {
            comp[v] = next;
            q.push(v);
          }
      }
      ++next;
    }
    for (int cc = 0; cc < next; ++cc) {
      Dist diam = 0;
      for (size_t i = 0; i < members.size(); ++i)
        for (size_t j = i + 1; j < members.size(); ++j)
          if (comp[i] == cc && comp[j] == cc)
            diam = std::max(diam, s.ambient->dist(s.pts[members[i]], s.pts[members[j]]));
      if (diam > d) return false;
    }
  }
  return true;
}

inline bool bf_exists(const Subspace& s, std::vector<int>& color, size_t pos, int k, Dist r, Dist d) {
  if (pos == s.pts.size()) return bf_coloring_ok(s, color, k, r, d);
  for (int c = 0; c < k; ++c) {
    color[pos] = c;
    if (bf_exists(s, color, pos + 1, k, r, d)) return true;
  }
  return false;
}

inline std::optional<int> brute_force_min_k(const Subspace& s, Dist r, Dist d, int max_k) {
  std::vector<int> color(s.pts.size(), 0);
  for (int k = 1; k <= max_k; ++k)
    if (bf_exists(s, color, 0, k, r, d)) return k;
  return std::nullopt;
}

// -----------------------------------------------------------------------
// Seeded instance generators.
// -----------------------------------------------------------------------

inline FiniteMetricSpace::Ptr random_space(unsigned seed, int max_points = 8) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> size_dist(2, max_points);
  return cli::make_random(size_dist(rng), seed * 7919 + 13);
}

/// A valid (k, s) family witness: random coloring, pieces = s-components of
/// the color classes (separation-valid by construction), bounded target.
inline FamilyWitness random_family_witness(unsigned seed, int max_k = 4) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> k_dist(1, max_k);
  std::uniform_int_distribution<int> member_dist(1, 3);
  std::uniform_int_distribution<Dist> s_dist(1, 3);
  FamilyWitness fw;
  fw.k = k_dist(rng);
  fw.r = s_dist(rng);
  int members = member_dist(rng);
  Dist bound = 0;
  for (int m = 0; m < members; ++m) {
    auto space = random_space(seed * 31 + m * 101 + 1);
    Subspace whole = Subspace::whole(space);
    std::uniform_int_distribution<int> color(0, fw.k - 1);
    DecompositionWitness w;
    w.space = whole;
    w.k = fw.k;
    w.r = fw.r;
    w.labels.assign(whole.pts.size(), PieceLabel{});
    std::vector<int> coloring(whole.pts.size());
    for (auto& c : coloring) c = color(rng);
    for (int c = 0; c < fw.k; ++c) {
      std::vector<int> pts;
      for (size_t i = 0; i < coloring.size(); ++i)
        if (coloring[i] == c) pts.push_back(whole.pts[i]);
      int pid = 0;
      for (const auto& comp : r_components(Subspace(space, pts), fw.r)) {
        for (int p : comp) {
          size_t pos = std::lower_bound(whole.pts.begin(), whole.pts.end(), p) - whole.pts.begin();
          w.labels[pos] = PieceLabel{c, pid};
        }
        bound = std::max(bound, Subspace(space, comp).diameter());
        ++pid;
      }
    }
    fw.source.members.push_back(whole);
    fw.per_member.push_back(std::move(w));
  }
  for (auto& w : fw.per_member) w.target = TargetClass::bounded(bound);
  return fw;
}

}  // namespace cgw::testing
