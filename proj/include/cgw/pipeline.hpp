#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cgw/groups.hpp"
#include "cgw/json_io.hpp"
#include "cgw/search.hpp"
#include "cgw/witness.hpp"

namespace cgw {

// ---------------------------------------------------------------------------
// Ball recursion: B(n) = (∪ B(n-1)·H_i) ∪ (∪ B(n-1)·s), window-truncated.
// ---------------------------------------------------------------------------

struct OsinCover {
  Subspace ball;  // relative_ball(window, n)
  Subspace prev;  // relative_ball(window, n-1)
  // per factor: the cosets prev·H_i ∩ window, keyed by canonical rep
  std::vector<std::pair<int, std::vector<std::pair<std::string, Subspace>>>> factor_parts;
  // per generator: prev·s ∩ window
  std::vector<std::pair<std::string, Subspace>> s_parts;
};

/// The inductive cover of the relative n-ball. The window is too small when
/// the n-ball already fills it: then the cover is clipped by the boundary
/// and set equality against B(n) is meaningless.
inline OsinCover osin_cover(const GroupWindow& w, int n) {
  if (n < 1) fail(ErrorCode::InvalidInput, "osin_cover needs n >= 1");
  OsinCover cover;
  cover.ball = relative_ball(w, n);
  if (static_cast<int>(cover.ball.pts.size()) == static_cast<int>(w.elements.size()))
    fail(ErrorCode::WindowTooSmall,
         "relative " + std::to_string(n) + "-ball fills the whole radius-" + std::to_string(w.radius) + " window");
  cover.prev = relative_ball(w, n - 1);
  int nf = static_cast<int>(w.spec.factors.size());
  for (int i = 0; i < nf; ++i) cover.factor_parts.emplace_back(i, coset_partition(w, i, cover.prev));
  for (auto& [name, s] : grp::generators(w.spec)) {
    std::vector<int> pts;
    for (int idx : cover.prev.pts) {
      int j = w.find(grp::multiply(w.spec, w.elements[idx], s));
      if (j >= 0) pts.push_back(j);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    cover.s_parts.emplace_back(name, Subspace(w.s_space, pts));
  }
  // cover equality: every point of B(n) is reached by a last H-edge or S-edge
  Subspace covered(w.s_space, {});
  for (auto& [i, parts] : cover.factor_parts)
    for (auto& [rep, part] : parts) covered = subspace_union(covered, part);
  for (auto& [name, part] : cover.s_parts) covered = subspace_union(covered, part);
  covered = subspace_union(covered, cover.prev);
  if (!covered.same_points(cover.ball))
    fail(ErrorCode::InvalidInput, "osin cover does not equal the relative ball");
  return cover;
}

struct SeparationResult {
  Dist t = 0;                                           // empirical thickening radius
  Subspace y;                                           // base thickened by the d_S t-ball
  std::vector<std::pair<std::string, Subspace>> parts;  // union_assemble-ready cosets
};

namespace detail {

inline Subspace thicken(const Subspace& base, Dist t) {
  const auto& amb = base.ambient;
  std::vector<int> pts;
  for (int i = 0; i < amb->size(); ++i) {
    Dist best = -1;
    for (int b : base.pts) {
      Dist d = amb->dist(i, b);
      if (best < 0 || d < best) best = d;
    }
    if (best >= 0 && best <= t) pts.push_back(i);
  }
  return Subspace(amb, pts);
}

}  // namespace detail

/// Smallest t <= t_max such that the factor-i cosets of `base`, minus the
/// t-thickening of `base`, are pairwise > s apart in d_S. Stand-in for the
/// closed-form thickening constants, searched instead of derived.
inline SeparationResult find_separating_radius(const GroupWindow& w, const Subspace& base, int factor, Dist s,
                                               Dist t_max) {
  auto cosets = coset_partition(w, factor, base);
  for (Dist t = 0; t <= t_max; ++t) {
    Subspace y = detail::thicken(base, t);
    std::vector<Subspace> zs;
    for (auto& [rep, part] : cosets) zs.push_back(subspace_difference(part, y));
    bool ok = true;
    for (size_t i = 0; i < zs.size() && ok; ++i) {
      if (zs[i].empty()) continue;
      for (size_t j = i + 1; j < zs.size() && ok; ++j) {
        if (zs[j].empty()) continue;
        if (set_distance(zs[i], zs[j]) <= s) ok = false;
      }
    }
    if (ok) {
      SeparationResult res;
      res.t = t;
      res.y = y;
      res.parts = cosets;
      return res;
    }
  }
  fail(ErrorCode::NotFound, "no separating radius t <= " + std::to_string(t_max) + " at scale " + std::to_string(s));
}

// ---------------------------------------------------------------------------
// Chain plumbing: restriction, translation, bounded tails.
// ---------------------------------------------------------------------------

/// Restricts every stage of a chain to `sub`; empty members drop out.
/// Shrinking pieces preserves separation, so validity persists.
inline DecompositionChain restrict_chain(const DecompositionChain& c, const Subspace& sub) {
  DecompositionChain out;
  out.final_bound = c.final_bound;
  out.same_scale = c.same_scale;
  for (const auto& m : c.start.members) {
    Subspace s = subspace_intersection(m, sub);
    if (!s.empty()) out.start.members.push_back(s);
  }
  for (const auto& step : c.steps) {
    FamilyWitness fw;
    fw.k = step.k;
    fw.r = step.r;
    for (size_t i = 0; i < step.per_member.size(); ++i) {
      Subspace s = subspace_intersection(step.source.members[i], sub);
      if (s.empty()) continue;
      fw.source.members.push_back(s);
      fw.per_member.push_back(restrict_to_subspace(step.per_member[i], s));
    }
    out.steps.push_back(std::move(fw));
  }
  return out;
}

namespace detail {

inline Subspace translate_sub(const GroupWindow& w, const Element& g, const Subspace& x) {
  return translate(w, g, x);
}

inline DecompositionWitness translate_witness(const GroupWindow& w, const Element& g,
                                              const DecompositionWitness& src) {
  DecompositionWitness out;
  out.k = src.k;
  out.r = src.r;
  out.space = translate_sub(w, g, src.space);
  out.labels.assign(out.space.pts.size(), PieceLabel{});
  for (size_t i = 0; i < src.space.pts.size(); ++i) {
    int moved = w.find(grp::multiply(w.spec, g, w.elements[src.space.pts[i]]));
    size_t pos = std::lower_bound(out.space.pts.begin(), out.space.pts.end(), moved) - out.space.pts.begin();
    out.labels[pos] = src.labels[i];
  }
  switch (src.target.kind) {
    case TargetClass::Kind::Bounded:
      out.target = src.target;
      break;
    case TargetClass::Kind::Explicit:
    case TargetClass::Kind::ClosureOf: {
      std::vector<Subspace> members;
      for (const auto& m : src.target.members) members.push_back(translate_sub(w, g, m));
      out.target = src.target.kind == TargetClass::Kind::Explicit ? TargetClass::explicit_members(std::move(members))
                                                                  : TargetClass::closure_of(std::move(members));
      break;
    }
  }
  return out;
}

}  // namespace detail

/// Transports a chain by left multiplication: an exact d_S isometry, so
/// every stage verifies identically. Fails if any set leaves the window.
inline DecompositionChain translate_chain(const DecompositionChain& c, const GroupWindow& w, const Element& g) {
  DecompositionChain out;
  out.final_bound = c.final_bound;
  out.same_scale = c.same_scale;
  for (const auto& m : c.start.members) out.start.members.push_back(detail::translate_sub(w, g, m));
  for (const auto& step : c.steps) {
    FamilyWitness fw;
    fw.k = step.k;
    fw.r = step.r;
    for (size_t i = 0; i < step.per_member.size(); ++i) {
      fw.source.members.push_back(detail::translate_sub(w, g, step.source.members[i]));
      fw.per_member.push_back(detail::translate_witness(w, g, step.per_member[i]));
    }
    out.steps.push_back(std::move(fw));
  }
  return out;
}

/// One real decomposition at scales[0] into diameter <= d pieces, then
/// trivial steps at the remaining scales. Search order: greedy net, annulus
/// rings, exhaustive oracle on very small pieces; fails loudly otherwise.
inline DecompositionChain make_bounded_chain(const Subspace& p, const std::vector<Dist>& scales, Dist d) {
  DecompositionChain out;
  out.start.members.push_back(p);
  out.final_bound = d;
  if (scales.empty()) {
    if (p.diameter() > d)
      fail(ErrorCode::NotFound, "piece of diameter " + std::to_string(p.diameter()) + " exceeds bound " +
                                    std::to_string(d) + " and no scales remain");
    return out;
  }
  auto w = heuristic_decompose(p, scales[0], d);
  if (!w) w = annulus_decompose(p, scales[0], d);
  if (!w && p.pts.size() <= 12) {
    auto res = oracle_min_k(p, scales[0], d, 4, 12);
    if (res) w = std::move(res->witness);
  }
  if (!w)
    fail(ErrorCode::NotFound,
         "no bounded decomposition of a " + std::to_string(p.pts.size()) + "-point piece at scale " +
             std::to_string(scales[0]));
  FamilyWitness fw;
  fw.k = w->k;
  fw.r = scales[0];
  fw.source.members.push_back(p);
  fw.per_member.push_back(std::move(*w));
  out.steps.push_back(std::move(fw));
  for (size_t i = 1; i < scales.size(); ++i)
    out.steps.push_back(detail::trivial_step(out.steps.back().target_family(), scales[i]));
  return out;
}

namespace detail {

/// Appends each chain's step i as extra members of the combined step i.
/// All chains must carry the same scale at each step.
inline DecompositionChain combine_sibling_chains(std::vector<DecompositionChain> chains) {
  DecompositionChain out;
  if (chains.empty()) return out;
  size_t len = chains[0].steps.size();
  for (const auto& c : chains)
    if (c.steps.size() != len) fail(ErrorCode::ScaleMismatch, "sibling chains differ in length");
  out.final_bound = 0;
  for (const auto& c : chains) {
    out.final_bound = std::max(out.final_bound, c.final_bound);
    for (const auto& m : c.start.members) out.start.members.push_back(m);
  }
  for (size_t i = 0; i < len; ++i) {
    FamilyWitness fw;
    fw.r = chains[0].steps[i].r;
    fw.k = 1;
    for (const auto& c : chains) {
      if (c.steps[i].r != fw.r) fail(ErrorCode::ScaleMismatch, "sibling chains disagree on scales");
      fw.k = std::max(fw.k, c.steps[i].k);
    }
    for (const auto& c : chains)
      for (size_t j = 0; j < c.steps[i].per_member.size(); ++j) {
        fw.source.members.push_back(c.steps[i].source.members[j]);
        fw.per_member.push_back(c.steps[i].per_member[j]);
      }
    for (auto& w : fw.per_member) w = pad_witness(w, fw.k);
    out.steps.push_back(std::move(fw));
  }
  return out;
}

/// A left translate z with z⁻¹·piece inside the relative m-ball of the
/// window, if one exists among the piece's own elements (shortest first).
inline std::optional<Element> centering_translate(const GroupWindow& w, const Subspace& piece, int m,
                                                  size_t max_candidates = 64) {
  std::vector<Element> candidates{grp::identity(w.spec)};
  for (int idx : piece.pts) candidates.push_back(w.elements[idx]);
  size_t tried = 0;
  for (const auto& z : candidates) {
    if (tried++ >= max_candidates) break;
    Element zi = grp::inverse(w.spec, z);
    bool ok = true;
    for (int idx : piece.pts) {
      int j = w.find(grp::multiply(w.spec, zi, w.elements[idx]));
      if (j < 0 || w.rel_dist(w.identity_index, j) > m) {
        ok = false;
        break;
      }
    }
    if (ok) return z;
  }
  return std::nullopt;
}

}  // namespace detail

struct BallChainLog {
  std::vector<std::pair<std::string, Dist>> separation_radii;  // (level/factor, t)
};

/// Chain over {relative_ball(window, n)} in d_S, by induction on n: split
/// B(n) along the coset cover at scales[0], then decompose each piece over
/// the remaining scales — recursively via a translate into B(n-1) when one
/// exists, else directly into bounded blocks.
inline DecompositionChain ball_chain(const GroupWindow& w, int n, const std::vector<Dist>& scales, Dist d,
                                     BallChainLog* log = nullptr) {
  if (n < 0) fail(ErrorCode::InvalidInput, "ball_chain needs n >= 0");
  if (n == 0) {
    DecompositionChain out;
    out.start.members.push_back(Subspace(w.s_space, {w.identity_index}));
    out.final_bound = d;
    MetricFamily fam = out.start;
    for (Dist r : scales) {
      out.steps.push_back(detail::trivial_step(fam, r));
      fam = out.steps.back().target_family();
    }
    return out;
  }
  if (scales.empty()) fail(ErrorCode::InvalidInput, "ball_chain needs at least one scale for n >= 1");
  for (size_t i = 1; i < scales.size(); ++i)
    if (scales[i] <= scales[i - 1]) fail(ErrorCode::ScaleOrderViolation, "ball_chain scales must strictly increase");

  OsinCover cover = osin_cover(w, n);

  // split step: per-factor assemblies plus the leftover generator translates
  std::vector<DecompositionWitness> parts;
  for (auto& [factor, cosets] : cover.factor_parts) {
    SeparationResult sep = find_separating_radius(w, cover.prev, factor, scales[0], w.radius);
    if (log)
      log->separation_radii.emplace_back("n=" + std::to_string(n) + " factor=" + std::to_string(factor), sep.t);
    std::vector<Subspace> coset_subs;
    for (auto& [rep, part] : sep.parts) coset_subs.push_back(part);
    parts.push_back(union_assemble(coset_subs, subspace_intersection(sep.y, cover.ball), scales[0]));
  }
  for (auto& [name, q] : cover.s_parts)
    if (!q.empty()) parts.push_back(trivial_witness(q, scales[0], TargetClass::closure_of({q})));
  if (parts.empty()) fail(ErrorCode::InvalidInput, "empty osin cover");
  DecompositionWitness split = parts[0];
  for (size_t i = 1; i < parts.size(); ++i) split = merge_union_witnesses(split, parts[i]);
  if (!split.space.same_points(cover.ball))
    fail(ErrorCode::InvalidInput, "osin split does not cover the relative ball");

  DecompositionChain out;
  out.start.members.push_back(cover.ball);
  out.final_bound = d;
  FamilyWitness step0;
  step0.k = split.k;
  step0.r = scales[0];
  step0.source.members.push_back(cover.ball);
  step0.per_member.push_back(split);
  out.steps.push_back(std::move(step0));

  std::vector<Dist> tail(scales.begin() + 1, scales.end());
  std::optional<DecompositionChain> sub_master;  // ball_chain(n-1, tail), built on demand
  std::vector<DecompositionChain> piece_chains;
  for (const auto& piece : out.steps[0].per_member[0].pieces()) {
    std::optional<Element> z;
    if (n >= 2 && !tail.empty()) z = detail::centering_translate(w, piece, n - 1);
    if (z) {
      if (!sub_master) sub_master = ball_chain(w, n - 1, tail, d, log);
      Subspace moved = translate(w, grp::inverse(w.spec, *z), piece);
      piece_chains.push_back(translate_chain(restrict_chain(*sub_master, moved), w, *z));
    } else {
      piece_chains.push_back(make_bounded_chain(piece, tail, d));
    }
  }
  DecompositionChain rest = detail::combine_sibling_chains(std::move(piece_chains));
  for (auto& s : rest.steps) out.steps.push_back(std::move(s));
  return out;
}

// ---------------------------------------------------------------------------
// Fibering pullback.
// ---------------------------------------------------------------------------

struct FiberingInput {
  CoarseMapWitness f;  // E -> B, contractive or with a rho_plus table
  DecompositionChain base;
  std::function<std::optional<DecompositionChain>(const Subspace&)> fiber_provider;
  std::vector<TranslationAction> homogeneity;  // translates realizing provider reuse
};

namespace detail {

inline Subspace preimage(const CoarseMapWitness& f, const Subspace& target_set) {
  std::vector<int> pts;
  for (int i = 0; i < f.source->size(); ++i)
    if (target_set.contains(f.map[i])) pts.push_back(i);
  return Subspace(f.source, pts);
}

inline TargetClass explicit_own_pieces(const DecompositionWitness& w) {
  return TargetClass::explicit_members(w.pieces());
}

}  // namespace detail

/// Pulls a base chain back through f, then hangs the fiber chains under the
/// preimages of the final family. Disjointness transfers: base pieces more
/// than rho_plus(R_i) apart have preimages more than R_i apart.
inline DecompositionChain pullback_chain(const FiberingInput& input, const std::vector<Dist>& scales) {
  const auto& base = input.base;
  if (scales.size() != base.steps.size())
    fail(ErrorCode::ScaleMismatch, "need one source scale per base step, got " + std::to_string(scales.size()) +
                                       " for " + std::to_string(base.steps.size()));
  for (size_t i = 0; i < scales.size(); ++i)
    if (input.f.rho_plus.eval(scales[i]) != base.steps[i].r)
      fail(ErrorCode::ScaleMismatch, "base step " + std::to_string(i) + " at scale " +
                                         std::to_string(base.steps[i].r) + " but rho+(R) = " +
                                         std::to_string(input.f.rho_plus.eval(scales[i])));

  DecompositionChain out;
  for (const auto& m : base.start.members) {
    Subspace pre = detail::preimage(input.f, m);
    if (!pre.empty()) out.start.members.push_back(pre);
  }
  for (size_t i = 0; i < base.steps.size(); ++i) {
    const auto& bs = base.steps[i];
    FamilyWitness fw;
    fw.k = bs.k;
    fw.r = scales[i];
    for (size_t j = 0; j < bs.per_member.size(); ++j) {
      Subspace pre = detail::preimage(input.f, bs.source.members[j]);
      if (pre.empty()) continue;
      DecompositionWitness pw;
      pw.space = pre;
      pw.k = bs.k;
      pw.r = scales[i];
      pw.labels.reserve(pre.pts.size());
      const auto& bw = bs.per_member[j];
      for (int x : pre.pts) {
        int y = input.f.map[x];
        size_t pos = std::lower_bound(bw.space.pts.begin(), bw.space.pts.end(), y) - bw.space.pts.begin();
        pw.labels.push_back(bw.labels[pos]);
      }
      pw.target = detail::explicit_own_pieces(pw);
      fw.source.members.push_back(pre);
      fw.per_member.push_back(std::move(pw));
    }
    out.steps.push_back(std::move(fw));
  }

  std::vector<DecompositionChain> fibers;
  for (const auto& y : base.steps.back().target_family().members) {
    Subspace pre = detail::preimage(input.f, y);
    if (pre.empty()) continue;
    auto fc = input.fiber_provider(y);
    if (!fc) fail(ErrorCode::MissingFiber, "no fiber chain for a final base piece of size " +
                                               std::to_string(y.pts.size()));
    if (fc->start.members.size() != 1 || !fc->start.members[0].same_points(pre))
      fail(ErrorCode::TranslateFailure, "fiber chain does not start at the piece preimage");
    if (!fc->steps.empty() && fc->steps.front().r <= scales.back())
      fail(ErrorCode::ScaleMismatch, "fiber scales must exceed the last preimage scale");
    fibers.push_back(std::move(*fc));
  }
  DecompositionChain tail = detail::combine_sibling_chains(std::move(fibers));
  out.final_bound = tail.final_bound;
  for (auto& s : tail.steps) out.steps.push_back(std::move(s));
  return out;
}

// ---------------------------------------------------------------------------
// End-to-end pipeline for a free product relative to its factors.
// ---------------------------------------------------------------------------

struct PipelineStage {
  std::string name;
  bool valid = false;
  std::string detail;
  json certificate;
};

struct PipelineReport {
  std::vector<PipelineStage> stages;
  bool overall = false;
  json parameters;

  json to_json() const {
    json j;
    j["kind"] = "report";
    j["overall"] = overall ? "valid" : "invalid";
    j["parameters"] = parameters;
    json st = json::array();
    for (const auto& s : stages) {
      json e;
      e["name"] = s.name;
      e["valid"] = s.valid;
      e["detail"] = s.detail;
      e["certificate"] = s.certificate;
      st.push_back(std::move(e));
    }
    j["stages"] = std::move(st);
    return j;
  }
};

/// Full extension pipeline: window, contraction onto the relative graph,
/// base decomposition in the relative metric, ball recursion for the
/// fibers, fibering pullback. Every stage emits a self-contained
/// certificate; overall is valid only if all of them verify.
inline PipelineReport extend_group_chain(const GroupSpec& spec, int window_radius, int n, std::vector<Dist> scales,
                                         Dist d = 0) {
  if (!spec.has_peripherals()) fail(ErrorCode::NoPeripherals, "pipeline needs a free product with factors");
  if (scales.size() < 2) fail(ErrorCode::InvalidInput, "pipeline needs at least two scales");
  for (size_t i = 0; i < scales.size(); ++i)
    if (scales[i] < 1 || (i > 0 && scales[i] <= scales[i - 1]))
      fail(ErrorCode::ScaleOrderViolation, "scales must be strictly increasing positive integers");
  if (d <= 0) d = 2 * scales.back();

  PipelineReport report;
  report.parameters["group"] = group_spec_to_json(spec);
  report.parameters["N"] = window_radius;
  report.parameters["n"] = n;
  report.parameters["scales"] = scales;
  report.parameters["D"] = d;

  auto run_stage = [&report](const std::string& name, auto&& body) -> bool {
    PipelineStage stage;
    stage.name = name;
    try {
      body(stage);
    } catch (const Error& e) {
      stage.valid = false;
      stage.detail = e.what();
    }
    report.stages.push_back(std::move(stage));
    return report.stages.back().valid;
  };

  std::optional<GroupWindow> window;
  if (!run_stage("window", [&](PipelineStage& st) {
        window.emplace(enumerate_ball(spec, window_radius));
        if (relative_ball(*window, n).pts.size() == window->elements.size())
          fail(ErrorCode::WindowTooSmall, "relative " + std::to_string(n) + "-ball fills the window");
        bool dominated = true;
        for (int i = 0; i < window->s_space->size() && dominated; ++i)
          for (int j = i + 1; j < window->s_space->size(); ++j)
            if (window->rel_dist(i, j) > window->s_dist(i, j)) {
              dominated = false;
              break;
            }
        if (!dominated) fail(ErrorCode::InvalidInput, "relative metric exceeds the word metric");
        st.valid = true;
        st.detail = std::to_string(window->elements.size()) + " elements, relative metric dominated by d_S";
        st.certificate = window_to_json(*window);
      })) {
    report.overall = false;
    return report;
  }

  CoarseMapWitness p;
  if (!run_stage("contraction", [&](PipelineStage& st) {
        p.source = window->s_space;
        p.target = window->rel_space;
        p.map.resize(window->elements.size());
        for (size_t i = 0; i < p.map.size(); ++i) p.map[i] = static_cast<int>(i);
        p.rho_plus = ModulusTable::identity_up_to(std::max<Dist>(1, window->s_space->diameter()));
        p.contractive = true;
        auto rep = check_coarse_map(p);
        st.valid = rep.valid && rep.is_contraction;
        st.detail = st.valid ? "identity-on-points map is a contraction"
                             : (rep.violations.empty() ? "not a contraction" : rep.violations.front());
        st.certificate = coarse_map_to_json(p);
      })) {
    report.overall = false;
    return report;
  }

  DecompositionChain base;
  if (!run_stage("base_decomposition", [&](PipelineStage& st) {
        Subspace rel_whole = Subspace::whole(window->rel_space);
        SearchBudget budget;
        budget.mode = SearchBudget::Mode::Heuristic;
        auto rows = asdim_profile(rel_whole, {scales[0]}, [&](Dist) { return static_cast<Dist>(n); }, budget);
        base.start.members.push_back(rel_whole);
        base.final_bound = n;
        FamilyWitness fw;
        fw.k = rows[0].witness.k;
        fw.r = scales[0];
        fw.source.members.push_back(rel_whole);
        fw.per_member.push_back(rows[0].witness);
        base.steps.push_back(std::move(fw));
        auto rep = verify_chain(base);
        st.valid = rep.valid;
        st.detail = st.valid ? "k=" + std::to_string(rows[0].k) + " relative decomposition into diameter<=" +
                                   std::to_string(n) + " pieces"
                             : rep.violations.front();
        st.certificate = chain_to_json(base);
      })) {
    report.overall = false;
    return report;
  }

  std::vector<Dist> tail(scales.begin() + 1, scales.end());
  DecompositionChain master;
  BallChainLog log;
  if (!run_stage("ball_chain", [&](PipelineStage& st) {
        master = ball_chain(*window, n, tail, d, &log);
        auto rep = verify_chain(master);
        st.valid = rep.valid;
        st.detail = st.valid ? "relative " + std::to_string(n) + "-ball chain over scales tail" : rep.violations.front();
        st.certificate = chain_to_json(master);
        json ts = json::array();
        for (auto& [where, t] : log.separation_radii) ts.push_back(json::array({where, t}));
        report.parameters["separation_radii"] = std::move(ts);
      })) {
    report.overall = false;
    return report;
  }

  Subspace master_domain = relative_ball(*window, n);
  if (!run_stage("fibering", [&](PipelineStage& st) {
        FiberingInput input;
        input.f = p;
        input.base = base;
        input.fiber_provider = [&](const Subspace& y) -> std::optional<DecompositionChain> {
          // preimage of y under the identity map: the same points in d_S
          Subspace pre(window->s_space, y.pts);
          auto z = detail::centering_translate(*window, pre, n, pre.pts.size() + 1);
          if (!z) return std::nullopt;
          input.homogeneity.push_back(TranslationAction{*z});
          Subspace moved = translate(*window, grp::inverse(window->spec, *z), pre);
          return translate_chain(restrict_chain(master, moved), *window, *z);
        };
        DecompositionChain full = pullback_chain(input, {scales[0]});
        auto rep = verify_chain(full);
        st.valid = rep.valid;
        st.detail = st.valid ? "assembled chain over the whole window, " + std::to_string(full.steps.size()) +
                                   " steps, final bound " + std::to_string(full.final_bound)
                             : rep.violations.front();
        st.certificate = chain_to_json(full);
      })) {
    report.overall = false;
    return report;
  }

  report.overall = true;
  return report;
}

}  // namespace cgw
