#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <tuple>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <queue>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cgw/errors.hpp"

namespace cgw {

using Dist = long long;
using StoredDist = int32_t;  // matrix cell; desk-scale distances are small

/// Finite point set with an exact integer metric. Immutable after
/// construction; all distances live in a flat matrix.
class FiniteMetricSpace {
 public:
  using Ptr = std::shared_ptr<const FiniteMetricSpace>;

  const std::string& id() const { return id_; }
  int size() const { return static_cast<int>(points_.size()); }
  const std::vector<std::string>& points() const { return points_; }
  const std::string& point(int i) const { return points_[i]; }

  Dist dist(int i, int j) const { return mat_[static_cast<size_t>(i) * points_.size() + j]; }

  int index(const std::string& p) const {
    auto it = index_.find(p);
    if (it == index_.end()) fail(ErrorCode::InvalidInput, "unknown point '" + p + "' in space '" + id_ + "'");
    return it->second;
  }
  bool has_point(const std::string& p) const { return index_.count(p) > 0; }

  /// Edge list is retained when the space was built from a graph; used by
  /// JSON/DOT export so window-sized spaces serialize compactly.
  const std::optional<std::vector<std::pair<int, int>>>& edges() const { return edges_; }

  Dist diameter() const {
    Dist d = 0;
    int n = size();
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) d = std::max(d, dist(i, j));
    return d;
  }

  /// Validated constructor from explicit pairwise distances.
  static Ptr build(std::string id, std::vector<std::string> points,
                   const std::vector<std::tuple<std::string, std::string, Dist>>& distances) {
    FiniteMetricSpace s;
    s.id_ = std::move(id);
    s.points_ = std::move(points);
    s.build_index();
    size_t n = s.points_.size();
    s.mat_.assign(n * n, -1);
    for (size_t i = 0; i < n; ++i) s.mat_[i * n + i] = 0;
    for (const auto& [u, v, d] : distances) {
      int i = s.index(u), j = s.index(v);
      if (i == j) {
        if (d != 0) fail(ErrorCode::MetricAxiomViolation, "d(" + u + "," + u + ") = " + std::to_string(d) + " != 0");
        continue;
      }
      s.mat_[static_cast<size_t>(i) * n + j] = static_cast<StoredDist>(d);
      s.mat_[static_cast<size_t>(j) * n + i] = static_cast<StoredDist>(d);
    }
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < n; ++j)
        if (s.mat_[i * n + j] < 0)
          fail(ErrorCode::InvalidInput, "missing distance for pair (" + s.points_[i] + "," + s.points_[j] + ")");
    s.validate();
    return std::make_shared<const FiniteMetricSpace>(std::move(s));
  }

  /// Shortest-path hop metric of an undirected graph.
  static Ptr from_graph(std::string id, std::vector<std::string> vertices,
                        const std::vector<std::pair<std::string, std::string>>& edge_list) {
    FiniteMetricSpace s;
    s.id_ = std::move(id);
    s.points_ = std::move(vertices);
    s.build_index();
    int n = s.size();
    std::vector<std::vector<int>> adj(n);
    std::vector<std::pair<int, int>> edges;
    for (const auto& [u, v] : edge_list) {
      int i = s.index(u), j = s.index(v);
      if (i == j) continue;
      adj[i].push_back(j);
      adj[j].push_back(i);
      edges.emplace_back(std::min(i, j), std::max(i, j));
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    s.edges_ = std::move(edges);
    s.mat_.assign(static_cast<size_t>(n) * n, -1);
    for (int src = 0; src < n; ++src) bfs_row(adj, src, &s.mat_[static_cast<size_t>(src) * n]);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (s.dist(i, j) < 0)
          fail(ErrorCode::DisconnectedGraph,
               "no path between '" + s.points_[i] + "' and '" + s.points_[j] + "'");
    return std::make_shared<const FiniteMetricSpace>(std::move(s));
  }

  /// Prebuilt matrix, caller guarantees the metric axioms (word metrics,
  /// translates). Spot-checked by property tests instead of an O(n^3) pass.
  static Ptr from_matrix_unchecked(std::string id, std::vector<std::string> points, std::vector<StoredDist> matrix,
                                   std::optional<std::vector<std::pair<int, int>>> edges = std::nullopt) {
    FiniteMetricSpace s;
    s.id_ = std::move(id);
    s.points_ = std::move(points);
    s.build_index();
    s.mat_ = std::move(matrix);
    s.edges_ = std::move(edges);
    return std::make_shared<const FiniteMetricSpace>(std::move(s));
  }

  void validate() const {
    int n = size();
    for (int i = 0; i < n; ++i) {
      if (dist(i, i) != 0)
        fail(ErrorCode::MetricAxiomViolation, "d(" + points_[i] + "," + points_[i] + ") != 0");
      for (int j = i + 1; j < n; ++j) {
        if (dist(i, j) <= 0)
          fail(ErrorCode::MetricAxiomViolation,
               "d(" + points_[i] + "," + points_[j] + ") = " + std::to_string(dist(i, j)) + " must be positive");
        if (dist(i, j) != dist(j, i))
          fail(ErrorCode::MetricAxiomViolation, "asymmetric pair (" + points_[i] + "," + points_[j] + ")");
      }
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l)
          if (dist(i, l) > dist(i, j) + dist(j, l))
            fail(ErrorCode::MetricAxiomViolation,
                 "triangle (" + points_[i] + "," + points_[j] + "," + points_[l] + "): " +
                     std::to_string(dist(i, l)) + " > " + std::to_string(dist(i, j)) + " + " +
                     std::to_string(dist(j, l)));
  }

 private:
  static void bfs_row(const std::vector<std::vector<int>>& adj, int src, StoredDist* row) {
    std::queue<int> q;
    row[src] = 0;
    q.push(src);
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int v : adj[u])
        if (row[v] < 0) {
          row[v] = row[u] + 1;
          q.push(v);
        }
    }
  }

  void build_index() {
    for (int i = 0; i < size(); ++i) {
      if (!index_.emplace(points_[i], i).second)
        fail(ErrorCode::InvalidInput, "duplicate point id '" + points_[i] + "'");
    }
  }

  std::string id_;
  std::vector<std::string> points_;
  std::vector<StoredDist> mat_;
  std::unordered_map<std::string, int> index_;
  std::optional<std::vector<std::pair<int, int>>> edges_;
};

/// Subset of an ambient space, carrying the induced metric.
struct Subspace {
  FiniteMetricSpace::Ptr ambient;
  std::vector<int> pts;  // sorted ambient indices

  Subspace() = default;
  Subspace(FiniteMetricSpace::Ptr a, std::vector<int> p) : ambient(std::move(a)), pts(std::move(p)) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    for (int i : pts)
      if (i < 0 || i >= ambient->size()) fail(ErrorCode::InvalidInput, "subspace index out of range");
  }

  static Subspace whole(FiniteMetricSpace::Ptr a) {
    std::vector<int> all(a->size());
    std::iota(all.begin(), all.end(), 0);
    return Subspace(std::move(a), std::move(all));
  }

  static Subspace of_points(FiniteMetricSpace::Ptr a, const std::vector<std::string>& ids) {
    std::vector<int> idx;
    idx.reserve(ids.size());
    for (const auto& p : ids) idx.push_back(a->index(p));
    return Subspace(std::move(a), std::move(idx));
  }

  int size() const { return static_cast<int>(pts.size()); }
  bool empty() const { return pts.empty(); }
  bool contains(int ambient_idx) const { return std::binary_search(pts.begin(), pts.end(), ambient_idx); }

  Dist dist(int a, int b) const { return ambient->dist(pts[a], pts[b]); }

  Dist diameter() const {
    Dist d = 0;
    for (size_t i = 0; i < pts.size(); ++i)
      for (size_t j = i + 1; j < pts.size(); ++j) d = std::max(d, ambient->dist(pts[i], pts[j]));
    return d;
  }

  std::vector<std::string> point_ids() const {
    std::vector<std::string> ids;
    ids.reserve(pts.size());
    for (int i : pts) ids.push_back(ambient->point(i));
    return ids;
  }

  bool same_ambient(const Subspace& other) const {
    return ambient == other.ambient || ambient->id() == other.ambient->id();
  }
  bool subset_of(const Subspace& other) const {
    if (!same_ambient(other)) return false;
    return std::includes(other.pts.begin(), other.pts.end(), pts.begin(), pts.end());
  }
  bool same_points(const Subspace& other) const { return same_ambient(other) && pts == other.pts; }
};

inline Subspace subspace_union(const Subspace& a, const Subspace& b) {
  if (a.ambient == nullptr) return b;
  if (b.ambient == nullptr) return a;
  if (!a.same_ambient(b)) fail(ErrorCode::AmbientMismatch, "union across ambients");
  std::vector<int> u;
  std::set_union(a.pts.begin(), a.pts.end(), b.pts.begin(), b.pts.end(), std::back_inserter(u));
  return Subspace(a.ambient, std::move(u));
}

inline Subspace subspace_difference(const Subspace& a, const Subspace& b) {
  if (!a.same_ambient(b)) fail(ErrorCode::AmbientMismatch, "difference across ambients");
  std::vector<int> d;
  std::set_difference(a.pts.begin(), a.pts.end(), b.pts.begin(), b.pts.end(), std::back_inserter(d));
  return Subspace(a.ambient, std::move(d));
}

inline Subspace subspace_intersection(const Subspace& a, const Subspace& b) {
  if (!a.same_ambient(b)) fail(ErrorCode::AmbientMismatch, "intersection across ambients");
  std::vector<int> d;
  std::set_intersection(a.pts.begin(), a.pts.end(), b.pts.begin(), b.pts.end(), std::back_inserter(d));
  return Subspace(a.ambient, std::move(d));
}

/// d(A,B) = min over cross pairs.
inline Dist set_distance(const Subspace& a, const Subspace& b) {
  if (!a.same_ambient(b)) fail(ErrorCode::AmbientMismatch, "set_distance across ambients");
  if (a.empty() || b.empty()) fail(ErrorCode::EmptySet, "set_distance on empty set");
  Dist best = std::numeric_limits<Dist>::max();
  for (int i : a.pts)
    for (int j : b.pts) best = std::min(best, a.ambient->dist(i, j));
  return best;
}

/// Partition of S into classes of the transitive closure of dist <= r.
/// Classes are pairwise > r apart; listed in order of smallest member.
inline std::vector<std::vector<int>> r_components(const Subspace& s, Dist r) {
  int n = s.size();
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (s.dist(i, j) <= r) parent[find(i)] = find(j);
  std::map<int, std::vector<int>> groups;
  for (int i = 0; i < n; ++i) groups[find(i)].push_back(s.pts[i]);
  std::vector<std::vector<int>> out;
  out.reserve(groups.size());
  for (auto& [root, members] : groups) out.push_back(std::move(members));
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.front() < y.front(); });
  return out;
}

/// Finite list of subspaces, optionally tagged with a uniform diameter bound.
struct MetricFamily {
  std::vector<Subspace> members;
  std::optional<Dist> bound_tag;

  bool uniformly_bounded_by(Dist d) const {
    for (const auto& m : members)
      if (m.diameter() > d) return false;
    return true;
  }
};

/// Two families are equal when their nonempty members match as point sets
/// (multiset comparison keyed by ambient id + point list).
inline bool family_equal(const MetricFamily& a, const MetricFamily& b) {
  auto key_list = [](const MetricFamily& f) {
    std::vector<std::pair<std::string, std::vector<int>>> ks;
    for (const auto& m : f.members)
      if (!m.empty()) ks.emplace_back(m.ambient->id(), m.pts);
    std::sort(ks.begin(), ks.end());
    return ks;
  };
  return key_list(a) == key_list(b);
}

/// Monotone nondecreasing table (distance -> bound). Evaluation takes the
/// value at the largest key <= d; the last value extends rightward and the
/// first leftward.
struct ModulusTable {
  std::vector<std::pair<Dist, Dist>> entries;  // sorted by key

  static ModulusTable identity_up_to(Dist max_d) {
    ModulusTable t;
    for (Dist d = 0; d <= max_d; ++d) t.entries.emplace_back(d, d);
    return t;
  }
  static ModulusTable linear(Dist factor, Dist max_d) {
    ModulusTable t;
    for (Dist d = 0; d <= max_d; ++d) t.entries.emplace_back(d, factor * d);
    return t;
  }

  void check() const {
    if (entries.empty()) fail(ErrorCode::InvalidInput, "empty modulus table");
    for (size_t i = 1; i < entries.size(); ++i) {
      if (entries[i].first <= entries[i - 1].first) fail(ErrorCode::InvalidInput, "modulus keys not increasing");
      if (entries[i].second < entries[i - 1].second) fail(ErrorCode::InvalidInput, "modulus values not monotone");
    }
  }

  Dist eval(Dist d) const {
    if (entries.empty()) fail(ErrorCode::InvalidInput, "empty modulus table");
    auto it = std::upper_bound(entries.begin(), entries.end(), std::make_pair(d, std::numeric_limits<Dist>::max()));
    if (it == entries.begin()) return it->second;
    return std::prev(it)->second;
  }

  bool strictly_increasing_on(const std::vector<Dist>& keys) const {
    std::optional<Dist> prev_key, prev_val;
    for (Dist k : keys) {
      Dist v = eval(k);
      if (prev_key && k > *prev_key && v <= *prev_val) return false;
      prev_key = k;
      prev_val = v;
    }
    return true;
  }
};

/// A point map with an upper modulus rho+ (and an optional lower modulus
/// rho- for coarse embeddings).
struct CoarseMapWitness {
  FiniteMetricSpace::Ptr source;
  FiniteMetricSpace::Ptr target;
  std::vector<int> map;  // source index -> target index
  ModulusTable rho_plus;
  std::optional<ModulusTable> rho_minus;
  bool contractive = false;

  int apply(int src_idx) const { return map[src_idx]; }
};

struct CoarseMapReport {
  bool valid = true;
  bool is_contraction = true;  // observed, independent of the flag
  std::vector<std::string> violations;
};

/// Confirms or refutes each modulus inequality; lists violating pairs.
inline CoarseMapReport check_coarse_map(const CoarseMapWitness& w) {
  CoarseMapReport rep;
  int n = w.source->size();
  if (static_cast<int>(w.map.size()) != n) {
    rep.valid = false;
    rep.violations.push_back("map not total on source points");
    return rep;
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      Dist ds = w.source->dist(i, j);
      Dist dt = w.target->dist(w.map[i], w.map[j]);
      if (dt > ds) rep.is_contraction = false;
      if (dt > w.rho_plus.eval(ds)) {
        rep.valid = false;
        rep.violations.push_back("rho+ violated at (" + w.source->point(i) + "," + w.source->point(j) + "): d_Y=" +
                                 std::to_string(dt) + " > " + std::to_string(w.rho_plus.eval(ds)));
      }
      if (w.rho_minus && w.rho_minus->eval(ds) > dt) {
        rep.valid = false;
        rep.violations.push_back("rho- violated at (" + w.source->point(i) + "," + w.source->point(j) + "): " +
                                 std::to_string(w.rho_minus->eval(ds)) + " > d_Y=" + std::to_string(dt));
      }
      if (w.contractive && dt > ds) {
        rep.valid = false;
        rep.violations.push_back("contraction violated at (" + w.source->point(i) + "," + w.source->point(j) +
                                 "): " + std::to_string(dt) + " > " + std::to_string(ds));
      }
    }
  return rep;
}

}  // namespace cgw
