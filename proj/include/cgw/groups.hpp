#pragma once

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <functional>
#include <set>
#include <tuple>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cgw/metric.hpp"

namespace cgw {

/// Supported group classes: exactly those with closed-form geodesic normal
/// forms, so word lengths are exact without solving a word problem.
struct GroupSpec {
  enum class Variant { Free, FreeAbelian, Cyclic, FreeProduct };
  Variant variant = Variant::Free;
  int rank = 0;           // Free, FreeAbelian
  long long modulus = 0;  // Cyclic
  std::vector<GroupSpec> factors;

  static GroupSpec free_group(int rank) { return {Variant::Free, rank, 0, {}}; }
  static GroupSpec free_abelian(int rank) { return {Variant::FreeAbelian, rank, 0, {}}; }
  static GroupSpec cyclic(long long m) { return {Variant::Cyclic, 0, m, {}}; }
  static GroupSpec free_product(std::vector<GroupSpec> fs) {
    for (const auto& f : fs)
      if (f.variant == Variant::FreeProduct)
        fail(ErrorCode::InvalidInput, "nested free products are not supported; flatten the factor list");
    return {Variant::FreeProduct, 0, 0, std::move(fs)};
  }

  bool has_peripherals() const { return variant == Variant::FreeProduct; }
};

/// Group element in normal form: reduced word (Free), exponent vector
/// (FreeAbelian), residue (Cyclic), alternating syllable sequence
/// (FreeProduct).
struct Element {
  std::vector<int> word;                            // Free: letters in ±{1..rank}
  std::vector<long long> vec;                       // FreeAbelian
  long long residue = 0;                            // Cyclic
  std::vector<std::pair<int, Element>> syllables;   // FreeProduct: (factor, nontrivial elem)
};

namespace grp {

inline Element identity(const GroupSpec& g) {
  Element e;
  if (g.variant == GroupSpec::Variant::FreeAbelian) e.vec.assign(g.rank, 0);
  return e;
}

inline bool is_identity(const GroupSpec& g, const Element& e) {
  switch (g.variant) {
    case GroupSpec::Variant::Free: return e.word.empty();
    case GroupSpec::Variant::FreeAbelian:
      return std::all_of(e.vec.begin(), e.vec.end(), [](long long v) { return v == 0; });
    case GroupSpec::Variant::Cyclic: return e.residue % g.modulus == 0;
    case GroupSpec::Variant::FreeProduct: return e.syllables.empty();
  }
  return true;
}

inline void check_element(const GroupSpec& g, const Element& e) {
  switch (g.variant) {
    case GroupSpec::Variant::Free:
      for (size_t i = 0; i < e.word.size(); ++i) {
        if (e.word[i] == 0 || std::abs(e.word[i]) > g.rank)
          fail(ErrorCode::MalformedElement, "free-group letter out of range");
        if (i > 0 && e.word[i] == -e.word[i - 1])
          fail(ErrorCode::MalformedElement, "free-group word not reduced");
      }
      break;
    case GroupSpec::Variant::FreeAbelian:
      if (static_cast<int>(e.vec.size()) != g.rank)
        fail(ErrorCode::MalformedElement, "exponent vector has wrong rank");
      break;
    case GroupSpec::Variant::Cyclic:
      if (e.residue < 0 || e.residue >= g.modulus) fail(ErrorCode::MalformedElement, "residue out of range");
      break;
    case GroupSpec::Variant::FreeProduct:
      for (size_t i = 0; i < e.syllables.size(); ++i) {
        const auto& [f, s] = e.syllables[i];
        if (f < 0 || f >= static_cast<int>(g.factors.size()))
          fail(ErrorCode::MalformedElement, "syllable factor index out of range");
        if (is_identity(g.factors[f], s)) fail(ErrorCode::MalformedElement, "identity syllable");
        check_element(g.factors[f], s);
        if (i > 0 && e.syllables[i - 1].first == f)
          fail(ErrorCode::MalformedElement, "adjacent syllables share a factor");
      }
      break;
  }
}

inline Element multiply(const GroupSpec& g, const Element& a, const Element& b);

inline Element inverse(const GroupSpec& g, const Element& a) {
  Element out;
  switch (g.variant) {
    case GroupSpec::Variant::Free:
      out.word.reserve(a.word.size());
      for (auto it = a.word.rbegin(); it != a.word.rend(); ++it) out.word.push_back(-*it);
      break;
    case GroupSpec::Variant::FreeAbelian:
      out.vec.reserve(a.vec.size());
      for (long long v : a.vec) out.vec.push_back(-v);
      break;
    case GroupSpec::Variant::Cyclic:
      out.residue = a.residue == 0 ? 0 : g.modulus - a.residue;
      break;
    case GroupSpec::Variant::FreeProduct:
      for (auto it = a.syllables.rbegin(); it != a.syllables.rend(); ++it)
        out.syllables.emplace_back(it->first, inverse(g.factors[it->first], it->second));
      break;
  }
  return out;
}

inline Element multiply(const GroupSpec& g, const Element& a, const Element& b) {
  Element out;
  switch (g.variant) {
    case GroupSpec::Variant::Free: {
      out.word = a.word;
      for (int letter : b.word) {
        if (!out.word.empty() && out.word.back() == -letter)
          out.word.pop_back();
        else
          out.word.push_back(letter);
      }
      break;
    }
    case GroupSpec::Variant::FreeAbelian: {
      out.vec.resize(g.rank);
      for (int i = 0; i < g.rank; ++i) out.vec[i] = a.vec[i] + b.vec[i];
      break;
    }
    case GroupSpec::Variant::Cyclic:
      out.residue = (a.residue + b.residue) % g.modulus;
      break;
    case GroupSpec::Variant::FreeProduct: {
      out.syllables = a.syllables;
      for (const auto& syl : b.syllables) {
        if (!out.syllables.empty() && out.syllables.back().first == syl.first) {
          Element merged = multiply(g.factors[syl.first], out.syllables.back().second, syl.second);
          out.syllables.pop_back();
          if (!is_identity(g.factors[syl.first], merged)) out.syllables.emplace_back(syl.first, std::move(merged));
        } else {
          out.syllables.push_back(syl);
        }
      }
      break;
    }
  }
  return out;
}

/// Exact d_S(e, g): reduced length, l^1 norm, circular distance, or the sum
/// of syllable lengths.
inline Dist word_length(const GroupSpec& g, const Element& e) {
  switch (g.variant) {
    case GroupSpec::Variant::Free: return static_cast<Dist>(e.word.size());
    case GroupSpec::Variant::FreeAbelian: {
      Dist sum = 0;
      for (long long v : e.vec) sum += std::llabs(v);
      return sum;
    }
    case GroupSpec::Variant::Cyclic: return std::min(e.residue, g.modulus - e.residue);
    case GroupSpec::Variant::FreeProduct: {
      Dist sum = 0;
      for (const auto& [f, s] : e.syllables) sum += word_length(g.factors[f], s);
      return sum;
    }
  }
  return 0;
}

/// Letters for rendering: one block per generator, assigned left to right
/// across the spec tree.
inline std::vector<std::string> letter_table(const GroupSpec& g) {
  static const char* alphabet = "abcdefghijklmnopqrstuvwxyz";
  std::vector<std::string> out;
  std::function<void(const GroupSpec&)> walk = [&](const GroupSpec& s) {
    int need = 0;
    switch (s.variant) {
      case GroupSpec::Variant::Free:
      case GroupSpec::Variant::FreeAbelian: need = s.rank; break;
      case GroupSpec::Variant::Cyclic: need = 1; break;
      case GroupSpec::Variant::FreeProduct:
        for (const auto& f : s.factors) walk(f);
        return;
    }
    for (int i = 0; i < need; ++i) {
      size_t idx = out.size();
      out.push_back(idx < 26 ? std::string(1, alphabet[idx]) : "g" + std::to_string(idx));
    }
  };
  walk(g);
  return out;
}

inline std::string render(const GroupSpec& g, const Element& e, const std::vector<std::string>& letters,
                          size_t letter_base = 0) {
  auto power = [](const std::string& l, long long p) {
    if (p == 1) return l;
    return l + "^" + std::to_string(p);
  };
  std::vector<std::string> parts;
  switch (g.variant) {
    case GroupSpec::Variant::Free: {
      size_t i = 0;
      while (i < e.word.size()) {
        size_t j = i;
        while (j < e.word.size() && e.word[j] == e.word[i]) ++j;
        long long run = static_cast<long long>(j - i);
        int letter = e.word[i];
        parts.push_back(power(letters[letter_base + std::abs(letter) - 1], letter > 0 ? run : -run));
        i = j;
      }
      break;
    }
    case GroupSpec::Variant::FreeAbelian:
      for (int i = 0; i < g.rank; ++i)
        if (e.vec[i] != 0) parts.push_back(power(letters[letter_base + i], e.vec[i]));
      break;
    case GroupSpec::Variant::Cyclic:
      if (e.residue != 0) parts.push_back(power(letters[letter_base], e.residue));
      break;
    case GroupSpec::Variant::FreeProduct: {
      std::vector<size_t> base(g.factors.size());
      size_t acc = letter_base;
      for (size_t f = 0; f < g.factors.size(); ++f) {
        base[f] = acc;
        const auto& fs = g.factors[f];
        acc += fs.variant == GroupSpec::Variant::Cyclic ? 1 : fs.rank;
      }
      for (const auto& [f, s] : e.syllables) parts.push_back(render(g.factors[f], s, letters, base[f]));
      break;
    }
  }
  if (parts.empty()) return "e";
  std::string out = parts[0];
  for (size_t i = 1; i < parts.size(); ++i) out += "." + parts[i];
  return out;
}

/// Symmetric generating set, deduplicated (a generator equal to its own
/// inverse appears once), with names.
inline std::vector<std::pair<std::string, Element>> generators(const GroupSpec& g) {
  auto letters = letter_table(g);
  std::vector<Element> gens;
  switch (g.variant) {
    case GroupSpec::Variant::Free:
      for (int i = 1; i <= g.rank; ++i) {
        Element e1, e2;
        e1.word = {i};
        e2.word = {-i};
        gens.push_back(e1);
        gens.push_back(e2);
      }
      break;
    case GroupSpec::Variant::FreeAbelian:
      for (int i = 0; i < g.rank; ++i) {
        Element e1 = identity(g), e2 = identity(g);
        e1.vec[i] = 1;
        e2.vec[i] = -1;
        gens.push_back(e1);
        gens.push_back(e2);
      }
      break;
    case GroupSpec::Variant::Cyclic:
      if (g.modulus > 1) {
        Element e1, e2;
        e1.residue = 1;
        e2.residue = g.modulus - 1;
        gens.push_back(e1);
        if (g.modulus > 2) gens.push_back(e2);
      }
      break;
    case GroupSpec::Variant::FreeProduct:
      for (size_t f = 0; f < g.factors.size(); ++f)
        for (auto& [name, e] : generators(g.factors[f])) {
          Element wrapped;
          wrapped.syllables.emplace_back(static_cast<int>(f), e);
          gens.push_back(wrapped);
        }
      break;
  }
  std::vector<std::pair<std::string, Element>> out;
  out.reserve(gens.size());
  for (auto& e : gens) out.emplace_back(render(g, e, letters), e);
  return out;
}

inline std::string key(const GroupSpec& g, const Element& e) { return render(g, e, letter_table(g)); }

/// Canonical representative of the left coset gH_i: g with a trailing
/// factor-i syllable stripped. Unique and of minimal word length in its
/// coset, by the free-product normal form.
inline Element coset_representative(const GroupSpec& g, const Element& e, int factor) {
  Element rep = e;
  if (!rep.syllables.empty() && rep.syllables.back().first == factor) rep.syllables.pop_back();
  return rep;
}

}  // namespace grp

/// A radius-N word-metric ball with exact length metric, plus the
/// window-truncated relative Cayley graph overlay when peripherals exist.
struct GroupWindow {
  GroupSpec spec;
  int radius = 0;
  std::vector<Element> elements;    // sorted by (length, name)
  std::vector<std::string> names;   // canonical renderings, elements[i] <-> names[i]
  FiniteMetricSpace::Ptr s_space;   // exact word metric d_S
  FiniteMetricSpace::Ptr rel_space; // shortest paths over S-edges + H-edges (window approximation)
  std::vector<std::pair<int, int>> s_edges;
  std::vector<std::tuple<int, int, int>> h_edges;  // (u, v, factor)
  std::unordered_map<std::string, int> index_of;
  int identity_index = 0;

  bool has_peripherals() const { return spec.has_peripherals(); }

  int find(const Element& e) const {
    auto it = index_of.find(grp::key(spec, e));
    return it == index_of.end() ? -1 : it->second;
  }

  Dist s_dist(int i, int j) const { return s_space->dist(i, j); }
  Dist rel_dist(int i, int j) const { return rel_space->dist(i, j); }
};

/// All normal forms of length <= N with the exact word metric; the relative
/// graph is attached when the spec has peripherals.
inline GroupWindow enumerate_ball(const GroupSpec& spec, int n, size_t max_elements = 200000) {
  if (n < 0) fail(ErrorCode::InvalidInput, "negative radius");
  GroupWindow w;
  w.spec = spec;
  w.radius = n;
  auto gens = grp::generators(spec);

  std::unordered_map<std::string, Element> seen;
  std::deque<Element> frontier;
  Element e = grp::identity(spec);
  seen.emplace(grp::key(spec, e), e);
  frontier.push_back(e);
  while (!frontier.empty()) {
    Element cur = frontier.front();
    frontier.pop_front();
    if (grp::word_length(spec, cur) >= n) continue;
    for (const auto& [gname, gen] : gens) {
      Element nxt = grp::multiply(spec, cur, gen);
      if (grp::word_length(spec, nxt) > n) continue;
      std::string k = grp::key(spec, nxt);
      if (seen.emplace(k, nxt).second) {
        if (seen.size() > max_elements)
          fail(ErrorCode::BudgetExceeded, "ball exceeds " + std::to_string(max_elements) + " elements");
        frontier.push_back(nxt);
      }
    }
  }

  std::vector<std::pair<std::string, Element>> named;
  named.reserve(seen.size());
  for (auto& [k, el] : seen) named.emplace_back(k, el);
  std::sort(named.begin(), named.end(), [&](const auto& a, const auto& b) {
    Dist la = grp::word_length(spec, a.second), lb = grp::word_length(spec, b.second);
    return la != lb ? la < lb : a.first < b.first;
  });
  int count = static_cast<int>(named.size());
  for (int i = 0; i < count; ++i) {
    w.names.push_back(named[i].first);
    w.elements.push_back(named[i].second);
    w.index_of.emplace(named[i].first, i);
  }
  w.identity_index = w.index_of.at("e");

  for (int i = 0; i < count; ++i)
    for (const auto& [gname, gen] : gens) {
      int j = w.find(grp::multiply(spec, w.elements[i], gen));
      if (j > i) w.s_edges.emplace_back(i, j);
    }
  std::sort(w.s_edges.begin(), w.s_edges.end());
  w.s_edges.erase(std::unique(w.s_edges.begin(), w.s_edges.end()), w.s_edges.end());

  // Exact word metric: d_S(g, h) = |g^-1 h|, computed as path distance in
  // the window's Cayley edges. Balls of geodesic normal-form classes are
  // geodesically convex, so no geodesic needs to leave the window; the
  // equality with word_length is property-tested.
  std::vector<std::vector<int>> s_adj(count);
  for (auto& [u, v] : w.s_edges) {
    s_adj[u].push_back(v);
    s_adj[v].push_back(u);
  }
  std::vector<StoredDist> mat(static_cast<size_t>(count) * count, -1);
  for (int src = 0; src < count; ++src) {
    StoredDist* row = &mat[static_cast<size_t>(src) * count];
    std::queue<int> q;
    row[src] = 0;
    q.push(src);
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int v : s_adj[u])
        if (row[v] < 0) {
          row[v] = row[u] + 1;
          q.push(v);
        }
    }
  }
  w.s_space = FiniteMetricSpace::from_matrix_unchecked("ball(" + std::to_string(n) + ")", w.names, std::move(mat),
                                                       w.s_edges);

  if (spec.has_peripherals()) {
    // H-edges: g—h whenever g^-1 h lies in a single factor; equivalently,
    // same canonical coset representative.
    for (size_t f = 0; f < spec.factors.size(); ++f) {
      std::map<std::string, std::vector<int>> cosets;
      for (int i = 0; i < count; ++i)
        cosets[grp::key(spec, grp::coset_representative(spec, w.elements[i], static_cast<int>(f)))].push_back(i);
      for (auto& [rep, members] : cosets)
        for (size_t a = 0; a < members.size(); ++a)
          for (size_t b = a + 1; b < members.size(); ++b)
            w.h_edges.emplace_back(members[a], members[b], static_cast<int>(f));
    }
    std::vector<std::vector<int>> adj(count);
    std::vector<std::pair<int, int>> rel_edges = w.s_edges;
    for (auto& [u, v, f] : w.h_edges) rel_edges.emplace_back(u, v);
    std::sort(rel_edges.begin(), rel_edges.end());
    rel_edges.erase(std::unique(rel_edges.begin(), rel_edges.end()), rel_edges.end());
    for (auto& [u, v] : rel_edges) {
      adj[u].push_back(v);
      adj[v].push_back(u);
    }
    std::vector<StoredDist> rel_mat(static_cast<size_t>(count) * count, -1);
    for (int src = 0; src < count; ++src) {
      StoredDist* row = &rel_mat[static_cast<size_t>(src) * count];
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
    w.rel_space = FiniteMetricSpace::from_matrix_unchecked("relball(" + std::to_string(n) + ")", w.names,
                                                           std::move(rel_mat), rel_edges);
  }
  return w;
}

/// Exact d_S(e, g) for an element in normal form.
inline Dist word_length(const GroupSpec& spec, const Element& g) {
  grp::check_element(spec, g);
  return grp::word_length(spec, g);
}

/// B(n) of the relative graph, carried as a subspace of the d_S window
/// (window-truncated: relMetric >= the true relative distance).
inline Subspace relative_ball(const GroupWindow& w, int n) {
  if (!w.has_peripherals()) fail(ErrorCode::NoPeripherals, "relative ball needs peripheral subgroups");
  std::vector<int> pts;
  for (int i = 0; i < static_cast<int>(w.elements.size()); ++i)
    if (w.rel_dist(w.identity_index, i) <= n) pts.push_back(i);
  return Subspace(w.s_space, pts);
}

/// Partition of base·H_i ∩ window into cosets, keyed by the canonical
/// minimal-length representative.
inline std::vector<std::pair<std::string, Subspace>> coset_partition(const GroupWindow& w, int factor,
                                                                     const Subspace& base) {
  if (!w.has_peripherals()) fail(ErrorCode::NoPeripherals, "coset partition needs peripheral subgroups");
  std::set<std::string> base_reps;
  for (int i : base.pts)
    base_reps.insert(grp::key(w.spec, grp::coset_representative(w.spec, w.elements[i], factor)));
  std::map<std::string, std::vector<int>> cosets;
  for (int i = 0; i < static_cast<int>(w.elements.size()); ++i) {
    std::string rep = grp::key(w.spec, grp::coset_representative(w.spec, w.elements[i], factor));
    if (base_reps.count(rep)) cosets[rep].push_back(i);
  }
  std::vector<std::pair<std::string, Subspace>> out;
  for (auto& [rep, pts] : cosets) out.emplace_back(rep, Subspace(w.s_space, pts));
  return out;
}

/// Left translation g·X; exact isometry for d_S. Fails if any translate
/// leaves the window.
inline Subspace translate(const GroupWindow& w, const Element& g, const Subspace& x) {
  std::vector<int> pts;
  pts.reserve(x.pts.size());
  for (int i : x.pts) {
    int j = w.find(grp::multiply(w.spec, g, w.elements[i]));
    if (j < 0)
      fail(ErrorCode::LeavesWindow,
           "translate of '" + w.names[i] + "' by '" + grp::key(w.spec, g) + "' leaves the window");
    pts.push_back(j);
  }
  return Subspace(w.s_space, pts);
}

/// Left multiplication action; preserves d_S exactly and maps cosets to
/// cosets, which is the homogeneity supply of the fibering pipeline.
struct TranslationAction {
  Element g;
  Subspace apply(const GroupWindow& w, const Subspace& x) const { return translate(w, g, x); }
};

}  // namespace cgw
