#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cgw/witness.hpp"

namespace cgw {

struct SearchBudget {
  enum class Mode { Exhaustive, Heuristic };
  int max_k = 4;
  int max_points = 9;  // exhaustive cutoff; complexity is k^n
  Mode mode = Mode::Exhaustive;
};

namespace detail {

/// Builds the canonical witness for a coloring: pieces are the r-components
/// of each color class.
inline DecompositionWitness witness_from_coloring(const Subspace& s, const std::vector<int>& coloring, int k,
                                                  Dist r, TargetClass target) {
  DecompositionWitness w;
  w.space = s;
  w.k = k;
  w.r = r;
  w.target = std::move(target);
  w.labels.resize(s.pts.size());
  for (int c = 0; c < k; ++c) {
    std::vector<int> class_pts;
    for (size_t i = 0; i < coloring.size(); ++i)
      if (coloring[i] == c) class_pts.push_back(s.pts[i]);
    if (class_pts.empty()) continue;
    auto comps = r_components(Subspace(s.ambient, class_pts), r);
    for (size_t ci = 0; ci < comps.size(); ++ci)
      for (int amb : comps[ci]) {
        size_t idx = std::lower_bound(s.pts.begin(), s.pts.end(), amb) - s.pts.begin();
        w.labels[idx] = PieceLabel{c, static_cast<int>(ci)};
      }
  }
  return w;
}

/// Validity of a coloring at (k, r, D): every r-component of every color
/// class has diameter <= D. Same-color components are > r apart by
/// construction.
inline bool coloring_valid(const Subspace& s, const std::vector<int>& coloring, int k, Dist r, Dist d) {
  int n = s.size();
  for (int c = 0; c < k; ++c) {
    std::vector<int> cls;
    for (int i = 0; i < n; ++i)
      if (coloring[i] == c) cls.push_back(i);
    if (cls.empty()) continue;
    // union-find over local indices
    std::vector<int> parent(cls.size());
    for (size_t i = 0; i < cls.size(); ++i) parent[i] = static_cast<int>(i);
    std::function<int(int)> find = [&](int x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (size_t i = 0; i < cls.size(); ++i)
      for (size_t j = i + 1; j < cls.size(); ++j)
        if (s.dist(cls[i], cls[j]) <= r) parent[find(static_cast<int>(i))] = find(static_cast<int>(j));
    for (size_t i = 0; i < cls.size(); ++i)
      for (size_t j = i + 1; j < cls.size(); ++j)
        if (find(static_cast<int>(i)) == find(static_cast<int>(j)) && s.dist(cls[i], cls[j]) > d) return false;
  }
  return true;
}

}  // namespace detail

struct OracleResult {
  int k = 0;
  DecompositionWitness witness;
};

/// Smallest k <= max_k admitting a valid (k, r)-decomposition into pieces of
/// diameter <= d, by exhaustive enumeration of colorings in lexicographic
/// order (ties broken by the lexicographically smallest coloring). Pieces
/// are the r-components of color classes, the canonical coarsest choice.
inline std::optional<OracleResult> oracle_min_k(const Subspace& s, Dist r, Dist d, int max_k,
                                                int max_points = 9) {
  if (s.size() > max_points)
    fail(ErrorCode::TooLarge, std::to_string(s.size()) + " points exceeds the exhaustive cutoff of " +
                                  std::to_string(max_points));
  int n = s.size();
  if (n == 0) {
    OracleResult res;
    res.k = 1;
    res.witness = detail::witness_from_coloring(s, {}, 1, r, TargetClass::bounded(d));
    return res;
  }
  for (int k = 1; k <= max_k; ++k) {
    std::vector<int> coloring(n, 0);
    while (true) {
      if (detail::coloring_valid(s, coloring, k, r, d)) {
        OracleResult res;
        res.k = k;
        res.witness = detail::witness_from_coloring(s, coloring, k, r, TargetClass::bounded(d));
        return res;
      }
      int pos = n - 1;
      while (pos >= 0 && coloring[pos] == k - 1) coloring[pos--] = 0;
      if (pos < 0) break;
      ++coloring[pos];
    }
  }
  return std::nullopt;
}

namespace detail {

/// Minimum proper coloring of a small conflict graph by backtracking, with a
/// step budget; on budget exhaustion falls back to greedy first-fit.
inline std::vector<int> color_conflict_graph(const std::vector<std::vector<bool>>& conflict) {
  int p = static_cast<int>(conflict.size());
  long budget = 200000;
  for (int k = 1; k <= p; ++k) {
    std::vector<int> col(p, -1);
    std::function<bool(int)> go = [&](int v) -> bool {
      if (v == p) return true;
      if (--budget < 0) return false;
      for (int c = 0; c < k; ++c) {
        bool ok = true;
        for (int q = 0; q < v; ++q)
          if (conflict[v][q] && col[q] == c) {
            ok = false;
            break;
          }
        if (ok) {
          col[v] = c;
          if (go(v + 1)) return true;
          col[v] = -1;
        }
      }
      return false;
    };
    if (go(0)) return col;
    if (budget < 0) break;
  }
  // greedy first-fit fallback
  std::vector<int> col(p, -1);
  for (int v = 0; v < p; ++v) {
    std::vector<bool> used(p + 1, false);
    for (int q = 0; q < p; ++q)
      if (conflict[v][q] && col[q] >= 0) used[col[q]] = true;
    int c = 0;
    while (used[c]) ++c;
    col[v] = c;
  }
  return col;
}

}  // namespace detail

/// Net-based construction: a maximal set of centers pairwise > D/2 apart,
/// pieces grown by nearest-center assignment, colors by (budgeted) exact
/// coloring of the "pieces within distance <= r" conflict graph. Several
/// rotated seed orders are tried and the best verified witness kept.
inline std::optional<DecompositionWitness> heuristic_decompose(const Subspace& s, Dist r, Dist d) {
  if (s.empty()) return trivial_witness(s, r, TargetClass::bounded(d));
  if (s.diameter() <= d) return trivial_witness(s, r, TargetClass::bounded(d));

  int n = s.size();
  std::optional<DecompositionWitness> best;
  int rotations = std::min(n, 16);
  for (int rot = 0; rot < rotations; ++rot) {
    // Maximal net: centers pairwise at distance > D/2 (i.e. 2*dist > D),
    // seeded in rotated point order.
    std::vector<int> centers;
    for (int oi = 0; oi < n; ++oi) {
      int i = (oi + rot * (n / rotations)) % n;
      bool ok = true;
      for (int c : centers)
        if (2 * s.dist(i, c) <= d) {
          ok = false;
          break;
        }
      if (ok) centers.push_back(i);
    }
    // Nearest-center assignment, ties to the earliest center.
    std::vector<int> piece_of(n);
    for (int i = 0; i < n; ++i) {
      Dist bestd = -1;
      int bestc = 0;
      for (size_t ci = 0; ci < centers.size(); ++ci) {
        Dist dd = s.dist(i, centers[ci]);
        if (bestd < 0 || dd < bestd) {
          bestd = dd;
          bestc = static_cast<int>(ci);
        }
      }
      piece_of[i] = bestc;
    }
    int pieces = static_cast<int>(centers.size());
    // Conflict graph on pieces: edge when within distance <= r.
    std::vector<std::vector<bool>> conflict(pieces, std::vector<bool>(pieces, false));
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (piece_of[i] != piece_of[j] && s.dist(i, j) <= r)
          conflict[piece_of[i]][piece_of[j]] = conflict[piece_of[j]][piece_of[i]] = true;
    std::vector<int> color = detail::color_conflict_graph(conflict);
    int k = 0;
    for (int c : color) k = std::max(k, c + 1);
    if (best && best->k <= k) continue;

    DecompositionWitness w;
    w.space = s;
    w.k = k;
    w.r = r;
    w.target = TargetClass::bounded(d);
    w.labels.resize(n);
    for (int i = 0; i < n; ++i) w.labels[i] = PieceLabel{color[piece_of[i]], piece_of[i]};
    // Normalize piece ids per color to 0..m-1 in center order.
    for (int c = 0; c < k; ++c) {
      std::map<int, int> seen;
      for (int p = 0; p < pieces; ++p)
        if (color[p] == c) seen.emplace(p, static_cast<int>(seen.size()));
      for (int i = 0; i < n; ++i)
        if (w.labels[i].color == c) w.labels[i].piece = seen[w.labels[i].piece];
    }
    if (verify_witness(w).valid) best = std::move(w);
  }
  return best;
}

/// Fallback for spaces where the net heuristic fails: annulus rings around a
/// center, alternating two ring parities, pieces as r-components of rings.
/// Works well on tree-like windows; the output is verified before use.
inline std::optional<DecompositionWitness> annulus_decompose(const Subspace& s, Dist r, Dist d) {
  if (s.empty() || s.diameter() <= d) return trivial_witness(s, r, TargetClass::bounded(d));
  int n = s.size();
  Dist width = std::max<Dist>(r + 1, (d + 1) / 2);
  for (int root = 0; root < std::min(n, 8); ++root) {
    DecompositionWitness w;
    w.space = s;
    w.k = 2;
    w.r = r;
    w.target = TargetClass::bounded(d);
    w.labels.resize(n);
    for (int i = 0; i < n; ++i) {
      int ring = static_cast<int>(s.dist(i, root) / width);
      w.labels[i] = PieceLabel{ring % 2, 0};
    }
    // piece ids: r-components per color
    for (int c = 0; c < 2; ++c) {
      std::vector<int> cls;
      for (int i = 0; i < n; ++i)
        if (w.labels[i].color == c) cls.push_back(s.pts[i]);
      if (cls.empty()) continue;
      auto comps = r_components(Subspace(s.ambient, cls), r);
      for (size_t ci = 0; ci < comps.size(); ++ci)
        for (int a : comps[ci]) {
          size_t idx = std::lower_bound(s.pts.begin(), s.pts.end(), a) - s.pts.begin();
          w.labels[idx].piece = static_cast<int>(ci);
        }
    }
    if (verify_witness(w).valid) return w;
  }
  return std::nullopt;
}

struct ProfileRow {
  Dist r = 0;
  Dist d = 0;
  int k = 0;
  bool exhaustive = false;
  DecompositionWitness witness;
};

/// Scale-wise asymptotic-dimension profile: min k by the oracle on small
/// spaces, best verified heuristic k on large ones, flagged by mode.
inline std::vector<ProfileRow> asdim_profile(const Subspace& s, const std::vector<Dist>& scales,
                                             const std::function<Dist(Dist)>& d_rule,
                                             const SearchBudget& budget = {}) {
  std::vector<ProfileRow> out;
  for (Dist r : scales) {
    ProfileRow row;
    row.r = r;
    row.d = d_rule(r);
    if (budget.mode == SearchBudget::Mode::Exhaustive) {
      auto res = oracle_min_k(s, r, row.d, budget.max_k, budget.max_points);
      if (!res) fail(ErrorCode::NotFound, "no k <= " + std::to_string(budget.max_k) + " at scale " + std::to_string(r));
      row.k = res->k;
      row.witness = std::move(res->witness);
      row.exhaustive = true;
    } else {
      auto w = heuristic_decompose(s, r, row.d);
      if (!w) w = annulus_decompose(s, r, row.d);
      if (!w) fail(ErrorCode::NotFound, "heuristic found no witness at scale " + std::to_string(r));
      row.k = w->k;
      row.witness = std::move(*w);
      row.exhaustive = false;
    }
    out.push_back(std::move(row));
  }
  return out;
}

inline Dist default_d_rule(Dist r) { return 2 * r; }

}  // namespace cgw
