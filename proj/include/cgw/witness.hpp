#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cgw/metric.hpp"

namespace cgw {

/// What counts as an admissible piece of a decomposition.
struct TargetClass {
  enum class Kind { Bounded, Explicit, ClosureOf };
  Kind kind = Kind::Bounded;
  Dist bound = 0;                 // Bounded
  std::vector<Subspace> members;  // Explicit / ClosureOf

  static TargetClass bounded(Dist d) {
    TargetClass t;
    t.kind = Kind::Bounded;
    t.bound = d;
    return t;
  }
  static TargetClass explicit_members(std::vector<Subspace> ms) {
    TargetClass t;
    t.kind = Kind::Explicit;
    t.members = std::move(ms);
    return t;
  }
  static TargetClass closure_of(std::vector<Subspace> ms) {
    TargetClass t;
    t.kind = Kind::ClosureOf;
    t.members = std::move(ms);
    return t;
  }

  bool accepts(const Subspace& piece) const {
    if (piece.empty()) return true;
    switch (kind) {
      case Kind::Bounded:
        return piece.diameter() <= bound;
      case Kind::Explicit:
        for (const auto& m : members)
          if (piece.same_points(m)) return true;
        return false;
      case Kind::ClosureOf:
        for (const auto& m : members)
          if (piece.subset_of(m)) return true;
        return false;
    }
    return false;
  }
};

struct PieceLabel {
  int color = 0;
  int piece = 0;
  friend bool operator==(const PieceLabel&, const PieceLabel&) = default;
};

/// Per-point (color, piece) labeling certifying a (k,r)-decomposition of one
/// space over a target class. labels[i] belongs to space.pts[i].
struct DecompositionWitness {
  Subspace space;
  int k = 1;
  Dist r = 0;
  std::vector<PieceLabel> labels;
  TargetClass target;

  /// Pieces of one color, as ambient index sets keyed by piece id.
  std::map<int, std::vector<int>> color_pieces(int color) const {
    std::map<int, std::vector<int>> out;
    for (size_t i = 0; i < labels.size(); ++i)
      if (labels[i].color == color) out[labels[i].piece].push_back(space.pts[i]);
    return out;
  }

  /// All nonempty pieces in (color, piece) order.
  std::vector<Subspace> pieces() const {
    std::vector<Subspace> out;
    for (int c = 0; c < k; ++c)
      for (auto& [pid, pts] : color_pieces(c)) out.emplace_back(space.ambient, pts);
    return out;
  }
};

struct WitnessReport {
  bool valid = true;
  std::vector<std::string> violations;
  void violate(std::string msg) {
    valid = false;
    violations.push_back(std::move(msg));
  }
};

/// Checks the three witness invariants: cover, same-color r-disjointness,
/// target acceptance of every piece.
inline WitnessReport verify_witness(const DecompositionWitness& w) {
  WitnessReport rep;
  if (w.k < 1) rep.violate("k must be >= 1");
  if (w.r < 0) rep.violate("r must be >= 0");
  if (w.labels.size() != w.space.pts.size()) {
    rep.violate("labels not total: " + std::to_string(w.labels.size()) + " labels for " +
                std::to_string(w.space.pts.size()) + " points");
    return rep;
  }
  for (size_t i = 0; i < w.labels.size(); ++i)
    if (w.labels[i].color < 0 || w.labels[i].color >= w.k)
      rep.violate("point " + w.space.ambient->point(w.space.pts[i]) + " has color out of range");
  if (!rep.valid) return rep;

  for (int c = 0; c < w.k; ++c) {
    auto pieces = w.color_pieces(c);
    std::vector<std::pair<int, Subspace>> ps;
    for (auto& [pid, pts] : pieces) ps.emplace_back(pid, Subspace(w.space.ambient, pts));
    for (size_t a = 0; a < ps.size(); ++a) {
      for (size_t b = a + 1; b < ps.size(); ++b) {
        Dist d = set_distance(ps[a].second, ps[b].second);
        if (d <= w.r)
          rep.violate("d(X_{" + std::to_string(c) + "," + std::to_string(ps[a].first) + "}, X_{" +
                      std::to_string(c) + "," + std::to_string(ps[b].first) + "}) = " + std::to_string(d) +
                      " <= r = " + std::to_string(w.r));
      }
      if (!w.target.accepts(ps[a].second))
        rep.violate("piece X_{" + std::to_string(c) + "," + std::to_string(ps[a].first) +
                    "} rejected by target");
    }
  }
  return rep;
}

/// One (k, r)-decomposition applied across a whole family; every member is
/// witnessed at the same (k, r).
struct FamilyWitness {
  MetricFamily source;
  int k = 1;
  Dist r = 0;
  std::vector<DecompositionWitness> per_member;  // aligned with source.members

  MetricFamily target_family() const {
    MetricFamily f;
    for (const auto& w : per_member)
      for (auto& p : w.pieces()) f.members.push_back(p);
    return f;
  }
};

inline WitnessReport verify_family_witness(const FamilyWitness& fw) {
  WitnessReport rep;
  if (fw.per_member.size() != fw.source.members.size()) {
    rep.violate("family witness does not cover every member");
    return rep;
  }
  for (size_t i = 0; i < fw.per_member.size(); ++i) {
    const auto& w = fw.per_member[i];
    if (!w.space.same_points(fw.source.members[i]))
      rep.violate("member " + std::to_string(i) + ": witness space differs from family member");
    if (w.k != fw.k || w.r != fw.r)
      rep.violate("member " + std::to_string(i) + ": (k,r) differs from family (k,r)");
    auto sub = verify_witness(w);
    for (auto& v : sub.violations) rep.violate("member " + std::to_string(i) + ": " + v);
  }
  return rep;
}

/// Scale-indexed sequence of family-level decompositions ending in a
/// uniformly bounded family. same_scale relaxes the strict ordering for
/// intermediate chains produced by the k-fold-to-chain rewrite.
struct DecompositionChain {
  MetricFamily start;
  std::vector<FamilyWitness> steps;
  Dist final_bound = 0;
  bool same_scale = false;

  MetricFamily final_family() const { return steps.empty() ? start : steps.back().target_family(); }
  Dist max_scale() const {
    Dist m = 0;
    for (const auto& s : steps) m = std::max(m, s.r);
    return m;
  }
  Dist min_scale() const {
    Dist m = std::numeric_limits<Dist>::max();
    for (const auto& s : steps) m = std::min(m, s.r);
    return m;
  }
};

inline WitnessReport verify_chain(const DecompositionChain& c) {
  WitnessReport rep;
  for (size_t i = 0; i < c.steps.size(); ++i) {
    auto sub = verify_family_witness(c.steps[i]);
    for (auto& v : sub.violations) rep.violate("step " + std::to_string(i) + ": " + v);
  }
  if (!c.steps.empty() && !family_equal(c.start, c.steps.front().source))
    rep.violate("start family differs from step 0 source");
  for (size_t i = 0; i + 1 < c.steps.size(); ++i)
    if (!family_equal(c.steps[i].target_family(), c.steps[i + 1].source))
      rep.violate("step " + std::to_string(i) + " target family != step " + std::to_string(i + 1) + " source");
  for (size_t i = 1; i < c.steps.size(); ++i) {
    if (c.same_scale) {
      if (c.steps[i].r < c.steps[i - 1].r)
        rep.violate("scales decrease at step " + std::to_string(i));
    } else if (c.steps[i].r <= c.steps[i - 1].r) {
      rep.violate("scale ordering: R_" + std::to_string(i) + " = " + std::to_string(c.steps[i - 1].r) +
                  " !< R_" + std::to_string(i + 1) + " = " + std::to_string(c.steps[i].r));
    }
  }
  MetricFamily fin = c.final_family();
  for (size_t i = 0; i < fin.members.size(); ++i) {
    Dist d = fin.members[i].diameter();
    if (d > c.final_bound)
      rep.violate("final member " + std::to_string(i) + " has diameter " + std::to_string(d) + " > bound " +
                  std::to_string(c.final_bound));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Certificate rewrites
// ---------------------------------------------------------------------------

/// Same pieces, k' colors (empty colors appended).
inline DecompositionWitness pad_witness(const DecompositionWitness& w, int k_prime) {
  if (k_prime < w.k)
    fail(ErrorCode::BadK, "cannot pad k=" + std::to_string(w.k) + " down to k'=" + std::to_string(k_prime));
  DecompositionWitness out = w;
  out.k = k_prime;
  return out;
}

inline DecompositionWitness trivial_witness(const Subspace& s, Dist r, TargetClass target) {
  DecompositionWitness w;
  w.space = s;
  w.k = 1;
  w.r = r;
  w.labels.assign(s.pts.size(), PieceLabel{0, 0});
  w.target = std::move(target);
  return w;
}

namespace detail {

/// Witness decomposing each family member as itself (one piece per member).
inline FamilyWitness trivial_step(const MetricFamily& fam, Dist r) {
  FamilyWitness fw;
  fw.source = fam;
  fw.k = 1;
  fw.r = r;
  for (const auto& m : fam.members)
    fw.per_member.push_back(trivial_witness(m, r, TargetClass::closure_of({m})));
  return fw;
}

}  // namespace detail

/// Converts one k-fold family decomposition at scale s into a chain of
/// exactly k two-fold steps, all at scale s (same-scale flag set). Step l
/// splits the leftover union of colors >= l-1 into color (l-1)'s pieces
/// versus the remaining leftover.
inline DecompositionChain chain_from_kfold(const FamilyWitness& fw) {
  auto rep = verify_family_witness(fw);
  if (!rep.valid)
    fail(ErrorCode::InvalidInput, "chain_from_kfold input fails verification: " + rep.violations.front());
  const int k = fw.k;
  const Dist s = fw.r;

  DecompositionChain chain;
  chain.start = fw.source;
  chain.same_scale = true;

  // Leftover of member m before step l = union of colors >= l-1.
  auto leftover = [&](const DecompositionWitness& w, int from_color) {
    std::vector<int> pts;
    for (size_t i = 0; i < w.labels.size(); ++i)
      if (w.labels[i].color >= from_color) pts.push_back(w.space.pts[i]);
    return Subspace(w.space.ambient, pts);
  };

  // Current family: pieces already emitted (frozen) + one leftover per member.
  // Each step decomposes frozen pieces trivially and splits leftovers.
  struct Entry {
    Subspace sub;
    int member = -1;  // >= 0 when this is a live leftover of that member
  };
  std::vector<Entry> current;
  for (size_t m = 0; m < fw.source.members.size(); ++m) {
    if (!fw.source.members[m].empty()) current.push_back({fw.source.members[m], static_cast<int>(m)});
  }

  for (int l = 1; l <= k; ++l) {
    FamilyWitness step;
    step.k = 2;
    step.r = s;
    std::vector<Entry> next;
    for (const auto& e : current) {
      step.source.members.push_back(e.sub);
      if (e.member < 0) {
        // Frozen piece: trivial two-fold decomposition (color 1 empty).
        DecompositionWitness w = trivial_witness(e.sub, s, TargetClass::explicit_members({e.sub}));
        w.k = 2;
        step.per_member.push_back(std::move(w));
        next.push_back(e);
        continue;
      }
      const auto& src = fw.per_member[e.member];
      // Split leftover (colors >= l-1) into color (l-1) pieces vs colors >= l.
      DecompositionWitness w;
      w.space = e.sub;
      w.k = 2;
      w.r = s;
      w.labels.resize(e.sub.pts.size());
      std::map<int, int> piece_renumber;
      Subspace rest = leftover(src, l);
      for (size_t i = 0; i < e.sub.pts.size(); ++i) {
        int amb = e.sub.pts[i];
        size_t src_i =
            std::lower_bound(src.space.pts.begin(), src.space.pts.end(), amb) - src.space.pts.begin();
        const PieceLabel& lab = src.labels[src_i];
        if (lab.color == l - 1) {
          auto [it, inserted] = piece_renumber.emplace(lab.piece, static_cast<int>(piece_renumber.size()));
          w.labels[i] = PieceLabel{0, it->second};
        } else {
          w.labels[i] = PieceLabel{1, 0};
        }
      }
      std::vector<Subspace> accepted;
      for (auto& [pid, pts] : src.color_pieces(l - 1)) {
        Subspace p = subspace_intersection(Subspace(src.space.ambient, pts), e.sub);
        if (!p.empty()) accepted.push_back(p);
      }
      if (!rest.empty()) accepted.push_back(rest);
      w.target = TargetClass::explicit_members(accepted);
      step.per_member.push_back(std::move(w));
      // Emitted color-(l-1) pieces freeze; the rest stays live.
      for (auto& p : accepted)
        if (!(!rest.empty() && p.same_points(rest))) next.push_back({p, -1});
      if (!rest.empty()) next.push_back({rest, e.member});
    }
    chain.steps.push_back(std::move(step));
    current = std::move(next);
  }
  chain.final_bound = 0;
  for (const auto& e : current) chain.final_bound = std::max(chain.final_bound, e.sub.diameter());
  return chain;
}

/// Concatenates two chains, relabeling a same-scale head to a strictly
/// increasing scale prefix below the tail's scales.
/// A same-scale head is first relabeled to a strictly increasing prefix;
/// relabeling preserves validity because a witness valid at scale s is valid
/// at any smaller scale.
inline DecompositionChain string_chains(const DecompositionChain& head, const DecompositionChain& tail,
                                        std::optional<std::vector<Dist>> relabel = std::nullopt) {
  if (head.steps.empty()) return tail;
  if (!family_equal(head.final_family(), tail.start))
    fail(ErrorCode::FamilyMismatch, "head final family differs from tail start family");

  DecompositionChain out;
  out.start = head.start;
  out.steps = head.steps;
  out.final_bound = tail.steps.empty() ? tail.final_bound : tail.final_bound;
  out.same_scale = false;

  if (head.same_scale) {
    std::vector<Dist> scales;
    if (relabel) {
      scales = *relabel;
      if (scales.size() != head.steps.size())
        fail(ErrorCode::ScaleOrderViolation, "relabel sequence length differs from head length");
    } else {
      Dist s = head.steps.back().r;
      Dist n = static_cast<Dist>(head.steps.size());
      if (s < n) fail(ErrorCode::ScaleOrderViolation, "no strictly increasing prefix below scale " + std::to_string(s));
      for (Dist i = 1; i <= n; ++i) scales.push_back(s - n + i);
    }
    for (size_t i = 0; i < scales.size(); ++i) {
      if (scales[i] < 0 || (i > 0 && scales[i] <= scales[i - 1]))
        fail(ErrorCode::ScaleOrderViolation, "relabel sequence not strictly increasing");
      if (scales[i] > head.steps[i].r)
        fail(ErrorCode::ScaleOrderViolation, "relabel above original scale breaks witness validity");
      out.steps[i].r = scales[i];
      for (auto& w : out.steps[i].per_member) w.r = scales[i];
    }
  } else {
    for (size_t i = 1; i < out.steps.size(); ++i)
      if (out.steps[i].r <= out.steps[i - 1].r) fail(ErrorCode::ScaleOrderViolation, "head not strictly increasing");
  }
  if (!tail.steps.empty()) {
    if (tail.same_scale) fail(ErrorCode::ScaleOrderViolation, "tail must carry strictly increasing scales");
    if (out.steps.back().r >= tail.min_scale())
      fail(ErrorCode::ScaleOrderViolation, "head max scale " + std::to_string(out.steps.back().r) +
                                               " not below tail min scale " + std::to_string(tail.min_scale()));
    out.steps.insert(out.steps.end(), tail.steps.begin(), tail.steps.end());
  }
  out.final_bound = tail.final_bound;
  return out;
}

/// Finite-union witness merge: k = k1 + k2 colors over X1 ∪ X2; the first
/// witness wins on overlap, then pieces are re-split into r-components.
inline DecompositionWitness merge_union_witnesses(const DecompositionWitness& w1, const DecompositionWitness& w2) {
  if (w1.r != w2.r) fail(ErrorCode::InvalidInput, "merge requires equal scales");
  if (!w1.space.empty() && !w2.space.empty() && !w1.space.same_ambient(w2.space))
    fail(ErrorCode::AmbientMismatch, "merge across ambients");

  TargetClass target;
  if (w1.target.kind == TargetClass::Kind::Bounded && w2.target.kind == TargetClass::Kind::Bounded) {
    target = TargetClass::bounded(std::max(w1.target.bound, w2.target.bound));
  } else if (w1.target.kind != TargetClass::Kind::Bounded && w2.target.kind != TargetClass::Kind::Bounded) {
    std::vector<Subspace> members = w1.target.members;
    members.insert(members.end(), w2.target.members.begin(), w2.target.members.end());
    if (w1.target.kind == TargetClass::Kind::Explicit && w2.target.kind == TargetClass::Kind::Explicit)
      target = TargetClass::explicit_members(std::move(members));
    else
      target = TargetClass::closure_of(std::move(members));
  } else {
    fail(ErrorCode::TargetClash, "cannot merge a bounded target with a member-list target");
  }

  if (w2.space.empty()) {
    DecompositionWitness out = pad_witness(w1, w1.k + w2.k);
    out.target = target;
    return out;
  }
  if (w1.space.empty()) {
    DecompositionWitness out = w2;
    for (auto& l : out.labels) l.color += w1.k;
    out.k = w1.k + w2.k;
    out.target = target;
    return out;
  }

  Subspace space = subspace_union(w1.space, w2.space);
  DecompositionWitness out;
  out.space = space;
  out.k = w1.k + w2.k;
  out.r = w1.r;
  out.target = target;
  out.labels.resize(space.pts.size());
  for (size_t i = 0; i < space.pts.size(); ++i) {
    int amb = space.pts[i];
    if (w1.space.contains(amb)) {
      size_t j = std::lower_bound(w1.space.pts.begin(), w1.space.pts.end(), amb) - w1.space.pts.begin();
      out.labels[i] = w1.labels[j];
    } else {
      size_t j = std::lower_bound(w2.space.pts.begin(), w2.space.pts.end(), amb) - w2.space.pts.begin();
      out.labels[i] = PieceLabel{w2.labels[j].color + w1.k, w2.labels[j].piece};
    }
  }
  // Re-split each color class into r-components (canonical pieces).
  for (int c = 0; c < out.k; ++c) {
    std::vector<int> class_pts;
    for (size_t i = 0; i < out.labels.size(); ++i)
      if (out.labels[i].color == c) class_pts.push_back(space.pts[i]);
    if (class_pts.empty()) continue;
    auto comps = r_components(Subspace(space.ambient, class_pts), out.r);
    std::map<int, int> piece_of;  // ambient point -> component index
    for (size_t ci = 0; ci < comps.size(); ++ci)
      for (int p : comps[ci]) piece_of[p] = static_cast<int>(ci);
    for (size_t i = 0; i < out.labels.size(); ++i)
      if (out.labels[i].color == c) out.labels[i].piece = piece_of[space.pts[i]];
  }
  return out;
}

/// The Union-Theorem witness shape: checks that the sets Z_i = parts_i \ Y
/// are pairwise > r apart and assembles the 2-color witness (color 0 = Y,
/// color 1 = the disjoint union of the Z_i).
inline DecompositionWitness union_assemble(const std::vector<Subspace>& parts, const Subspace& y, Dist r) {
  Subspace space = y;
  for (const auto& p : parts) space = subspace_union(space, p);
  std::vector<Subspace> zs;
  for (const auto& p : parts) zs.push_back(subspace_difference(p, y));
  for (size_t i = 0; i < zs.size(); ++i)
    for (size_t j = i + 1; j < zs.size(); ++j) {
      if (zs[i].empty() || zs[j].empty()) continue;
      Dist d = set_distance(zs[i], zs[j]);
      if (d <= r) {
        // name a witnessing point pair
        std::string detail;
        for (int a : zs[i].pts)
          for (int b : zs[j].pts)
            if (space.ambient->dist(a, b) == d && detail.empty())
              detail = " at (" + space.ambient->point(a) + "," + space.ambient->point(b) + ")";
        fail(ErrorCode::NotSeparated, "parts " + std::to_string(i) + " and " + std::to_string(j) +
                                          ": d = " + std::to_string(d) + " <= r = " + std::to_string(r) + detail);
      }
    }
  DecompositionWitness w;
  w.space = space;
  w.k = 2;
  w.r = r;
  w.labels.resize(space.pts.size());
  std::vector<Subspace> target_members = {y};
  std::map<int, int> z_piece;  // ambient point -> z index among nonempty
  int zcount = 0;
  for (auto& z : zs) {
    if (z.empty()) continue;
    for (int p : z.pts)
      if (!z_piece.count(p)) z_piece[p] = zcount;
    target_members.push_back(z);
    ++zcount;
  }
  for (size_t i = 0; i < space.pts.size(); ++i) {
    int amb = space.pts[i];
    if (y.contains(amb))
      w.labels[i] = PieceLabel{0, 0};
    else
      w.labels[i] = PieceLabel{1, z_piece.at(amb)};
  }
  w.target = TargetClass::closure_of(target_members);
  return w;
}

/// Subspace-closure restriction: labels restricted to S, member-list targets
/// weakened to ClosureOf. Valid at the same (k, r).
inline DecompositionWitness restrict_to_subspace(const DecompositionWitness& w, const Subspace& s) {
  if (!s.subset_of(w.space)) fail(ErrorCode::NotSubspace, "restriction target is not a subspace of the witness space");
  DecompositionWitness out;
  out.space = s;
  out.k = w.k;
  out.r = w.r;
  out.labels.reserve(s.pts.size());
  for (int amb : s.pts) {
    size_t j = std::lower_bound(w.space.pts.begin(), w.space.pts.end(), amb) - w.space.pts.begin();
    out.labels.push_back(w.labels[j]);
  }
  if (w.target.kind == TargetClass::Kind::Bounded) {
    out.target = w.target;
  } else {
    // members shrink with the space: acceptance is subset-of, so
    // intersecting keeps every restricted piece accepted
    std::vector<Subspace> members;
    for (const auto& m : w.target.members) {
      Subspace cut = subspace_intersection(m, s);
      if (!cut.empty()) members.push_back(cut);
    }
    out.target = TargetClass::closure_of(std::move(members));
  }
  return out;
}

inline TargetClass subspace_closure(const MetricFamily& fam) { return TargetClass::closure_of(fam.members); }

namespace detail {

/// Largest t in [0, limit] with table(t) <= cap; nullopt if table(0) > cap.
inline std::optional<Dist> inverse_modulus(const ModulusTable& table, Dist cap, Dist limit) {
  std::optional<Dist> best;
  for (Dist t = 0; t <= limit; ++t)
    if (table.eval(t) <= cap) best = t;
  return best;
}

}  // namespace detail

/// Coarse-transfer of a witness along a coarse embedding emb : Y -> X.
/// Pieces pull back to preimages; the scale is relabeled to the largest r'
/// with rho+(r') <= r, so X-side separation forces Y-side separation.
inline DecompositionWitness transfer_witness(const DecompositionWitness& w, const CoarseMapWitness& emb) {
  if (!emb.rho_minus) fail(ErrorCode::ModulusMissing, "transfer requires a lower modulus");
  if (emb.target->id() != w.space.ambient->id())
    fail(ErrorCode::AmbientMismatch, "embedding target is not the witness ambient");
  Dist y_diam = emb.source->diameter();
  auto r_prime = detail::inverse_modulus(emb.rho_plus, w.r, std::max<Dist>(y_diam, w.r));
  if (!r_prime) fail(ErrorCode::ScaleCollapse, "no adjusted scale exists for r = " + std::to_string(w.r));

  DecompositionWitness out;
  out.k = w.k;
  out.r = *r_prime;
  std::vector<int> src_pts;
  std::vector<PieceLabel> labels;
  for (int y = 0; y < emb.source->size(); ++y) {
    int x = emb.apply(y);
    if (!w.space.contains(x)) continue;
    size_t j = std::lower_bound(w.space.pts.begin(), w.space.pts.end(), x) - w.space.pts.begin();
    src_pts.push_back(y);
    labels.push_back(w.labels[j]);
  }
  out.space = Subspace(emb.source, src_pts);
  out.labels = std::move(labels);
  if (w.target.kind == TargetClass::Kind::Bounded) {
    auto d_prime = detail::inverse_modulus(*emb.rho_minus, w.target.bound, y_diam);
    out.target = TargetClass::bounded(d_prime.value_or(0));
  } else {
    std::vector<Subspace> members;
    for (const auto& m : w.target.members) {
      std::vector<int> pre;
      for (int y = 0; y < emb.source->size(); ++y)
        if (m.contains(emb.apply(y))) pre.push_back(y);
      members.push_back(Subspace(emb.source, pre));
    }
    out.target = TargetClass::closure_of(std::move(members));
  }
  return out;
}

/// Coarse-transfer of a whole chain along an embedding: each step's scale is
/// pulled back through the upper modulus, member by member.
inline DecompositionChain transfer_chain(const DecompositionChain& c, const CoarseMapWitness& emb) {
  if (!emb.rho_minus) fail(ErrorCode::ModulusMissing, "transfer requires a lower modulus");
  Dist y_diam = emb.source->diameter();
  std::vector<Dist> realized;
  for (int i = 0; i < emb.source->size(); ++i)
    for (int j = i + 1; j < emb.source->size(); ++j) realized.push_back(emb.source->dist(i, j));
  std::sort(realized.begin(), realized.end());
  realized.erase(std::unique(realized.begin(), realized.end()), realized.end());
  if (!emb.rho_minus->strictly_increasing_on(realized))
    fail(ErrorCode::ModulusMissing, "lower modulus not strictly increasing on realized distances");

  auto preimage = [&](const Subspace& m) {
    std::vector<int> pre;
    for (int y = 0; y < emb.source->size(); ++y)
      if (m.contains(emb.apply(y))) pre.push_back(y);
    return Subspace(emb.source, pre);
  };

  DecompositionChain out;
  out.same_scale = c.same_scale;
  for (const auto& m : c.start.members) out.start.members.push_back(preimage(m));

  std::vector<Dist> scales;
  for (const auto& s : c.steps) {
    auto r_prime = detail::inverse_modulus(emb.rho_plus, s.r, std::max<Dist>(y_diam, s.r));
    if (!r_prime || *r_prime < 1)
      fail(ErrorCode::ScaleCollapse, "no positive adjusted scale for r = " + std::to_string(s.r));
    scales.push_back(*r_prime);
  }
  // Strictness can collapse under a coarse modulus; lower earlier scales.
  if (!c.same_scale) {
    for (size_t i = scales.size(); i-- > 1;) {
      if (scales[i - 1] >= scales[i]) scales[i - 1] = scales[i] - 1;
    }
    if (!scales.empty() && scales.front() < 1)
      fail(ErrorCode::ScaleCollapse, "adjusted scales collapse below 1");
  }

  for (size_t si = 0; si < c.steps.size(); ++si) {
    const auto& step = c.steps[si];
    FamilyWitness fw;
    fw.k = step.k;
    fw.r = scales[si];
    for (size_t mi = 0; mi < step.source.members.size(); ++mi) {
      fw.source.members.push_back(preimage(step.source.members[mi]));
      DecompositionWitness tw = transfer_witness(step.per_member[mi], emb);
      tw.r = scales[si];
      fw.per_member.push_back(std::move(tw));
    }
    out.steps.push_back(std::move(fw));
  }
  auto d_prime = detail::inverse_modulus(*emb.rho_minus, c.final_bound, y_diam);
  out.final_bound = d_prime.value_or(0);
  return out;
}

}  // namespace cgw
