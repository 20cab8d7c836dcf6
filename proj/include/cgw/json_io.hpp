#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cgw/groups.hpp"
#include "cgw/metric.hpp"
#include "cgw/witness.hpp"

namespace cgw {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Spaces
// ---------------------------------------------------------------------------

inline json space_to_json(const FiniteMetricSpace& s) {
  json j;
  j["id"] = s.id();
  j["points"] = s.points();
  if (s.edges()) {
    json edges = json::array();
    for (auto& [u, v] : *s.edges()) edges.push_back(json::array({s.point(u), s.point(v)}));
    j["edges"] = std::move(edges);
  } else {
    json dist = json::array();
    for (int i = 0; i < s.size(); ++i)
      for (int k = i + 1; k < s.size(); ++k)
        dist.push_back(json::array({s.point(i), s.point(k), s.dist(i, k)}));
    j["dist"] = std::move(dist);
  }
  return j;
}

inline FiniteMetricSpace::Ptr space_from_json(const json& j) {
  std::string id = j.value("id", "space");
  std::vector<std::string> points = j.at("points").get<std::vector<std::string>>();
  if (j.contains("edges")) {
    std::vector<std::pair<std::string, std::string>> edges;
    for (const auto& e : j.at("edges")) edges.emplace_back(e.at(0).get<std::string>(), e.at(1).get<std::string>());
    return FiniteMetricSpace::from_graph(std::move(id), std::move(points), edges);
  }
  std::vector<std::tuple<std::string, std::string, Dist>> dist;
  for (const auto& e : j.at("dist"))
    dist.emplace_back(e.at(0).get<std::string>(), e.at(1).get<std::string>(), e.at(2).get<Dist>());
  return FiniteMetricSpace::build(std::move(id), std::move(points), dist);
}

inline json subspace_to_json(const Subspace& s) {
  json j = json::array();
  for (int i : s.pts) j.push_back(s.ambient->point(i));
  return j;
}

inline Subspace subspace_from_json(const FiniteMetricSpace::Ptr& ambient, const json& j) {
  return Subspace::of_points(ambient, j.get<std::vector<std::string>>());
}

// ---------------------------------------------------------------------------
// Targets and witnesses
// ---------------------------------------------------------------------------

inline json target_to_json(const TargetClass& t) {
  json j;
  switch (t.kind) {
    case TargetClass::Kind::Bounded:
      j["type"] = "bounded";
      j["D"] = t.bound;
      break;
    case TargetClass::Kind::Explicit:
    case TargetClass::Kind::ClosureOf: {
      j["type"] = t.kind == TargetClass::Kind::Explicit ? "explicit" : "closure_of";
      json members = json::array();
      for (const auto& m : t.members) members.push_back(subspace_to_json(m));
      j["members"] = std::move(members);
      break;
    }
  }
  return j;
}

inline TargetClass target_from_json(const FiniteMetricSpace::Ptr& ambient, const json& j) {
  std::string type = j.at("type").get<std::string>();
  if (type == "bounded") return TargetClass::bounded(j.at("D").get<Dist>());
  std::vector<Subspace> members;
  for (const auto& m : j.at("members")) members.push_back(subspace_from_json(ambient, m));
  if (type == "explicit") return TargetClass::explicit_members(std::move(members));
  if (type == "closure_of") return TargetClass::closure_of(std::move(members));
  fail(ErrorCode::InvalidInput, "unknown target type '" + type + "'");
}

inline json labels_to_json(const DecompositionWitness& w) {
  json labels = json::array();
  for (size_t i = 0; i < w.labels.size(); ++i)
    labels.push_back(json::array({w.space.ambient->point(w.space.pts[i]), w.labels[i].color, w.labels[i].piece}));
  return labels;
}

inline json witness_to_json(const DecompositionWitness& w, bool with_space = true) {
  json j;
  j["kind"] = "witness";
  if (with_space) j["space"] = space_to_json(*w.space.ambient);
  j["pts"] = subspace_to_json(w.space);
  j["k"] = w.k;
  j["r"] = w.r;
  j["labels"] = labels_to_json(w);
  j["target"] = target_to_json(w.target);
  return j;
}

inline DecompositionWitness witness_from_json(const json& j, FiniteMetricSpace::Ptr ambient = nullptr) {
  if (!ambient) ambient = space_from_json(j.at("space"));
  DecompositionWitness w;
  if (j.contains("pts"))
    w.space = subspace_from_json(ambient, j.at("pts"));
  else
    w.space = Subspace::whole(ambient);
  w.k = j.at("k").get<int>();
  w.r = j.at("r").get<Dist>();
  w.labels.assign(w.space.pts.size(), PieceLabel{});
  for (const auto& l : j.at("labels")) {
    int amb = ambient->index(l.at(0).get<std::string>());
    if (!w.space.contains(amb)) fail(ErrorCode::InvalidInput, "label for a point outside the witness space");
    size_t idx = std::lower_bound(w.space.pts.begin(), w.space.pts.end(), amb) - w.space.pts.begin();
    w.labels[idx] = PieceLabel{l.at(1).get<int>(), l.at(2).get<int>()};
  }
  if (j.at("labels").size() != w.space.pts.size())
    fail(ErrorCode::InvalidInput, "labels not total on the witness space");
  w.target = target_from_json(ambient, j.at("target"));
  return w;
}

inline json family_witness_to_json(const FamilyWitness& fw, bool with_space = true) {
  json j;
  j["kind"] = "family_witness";
  if (with_space && !fw.source.members.empty()) j["space"] = space_to_json(*fw.source.members.front().ambient);
  j["k"] = fw.k;
  j["r"] = fw.r;
  json members = json::array();
  for (size_t i = 0; i < fw.per_member.size(); ++i) {
    json m;
    m["pts"] = subspace_to_json(fw.source.members[i]);
    m["labels"] = labels_to_json(fw.per_member[i]);
    m["target"] = target_to_json(fw.per_member[i].target);
    members.push_back(std::move(m));
  }
  j["members"] = std::move(members);
  return j;
}

inline FamilyWitness family_witness_from_json(const json& j, FiniteMetricSpace::Ptr ambient = nullptr) {
  if (!ambient) ambient = space_from_json(j.at("space"));
  FamilyWitness fw;
  fw.k = j.at("k").get<int>();
  fw.r = j.at("r").get<Dist>();
  for (const auto& m : j.at("members")) {
    Subspace sub = subspace_from_json(ambient, m.at("pts"));
    json wj;
    wj["pts"] = m.at("pts");
    wj["k"] = fw.k;
    wj["r"] = fw.r;
    wj["labels"] = m.at("labels");
    wj["target"] = m.at("target");
    fw.source.members.push_back(sub);
    fw.per_member.push_back(witness_from_json(wj, ambient));
  }
  return fw;
}

inline json chain_to_json(const DecompositionChain& c) {
  json j;
  j["kind"] = "chain";
  FiniteMetricSpace::Ptr ambient;
  for (const auto& m : c.start.members)
    if (m.ambient) ambient = m.ambient;
  if (!ambient)
    for (const auto& s : c.steps)
      for (const auto& m : s.source.members)
        if (m.ambient) ambient = m.ambient;
  if (ambient) j["space"] = space_to_json(*ambient);
  json start = json::array();
  for (const auto& m : c.start.members) start.push_back(subspace_to_json(m));
  j["start"] = std::move(start);
  json steps = json::array();
  for (const auto& s : c.steps) steps.push_back(family_witness_to_json(s, /*with_space=*/false));
  j["steps"] = std::move(steps);
  j["final_bound"] = c.final_bound;
  j["same_scale"] = c.same_scale;
  return j;
}

inline DecompositionChain chain_from_json(const json& j, FiniteMetricSpace::Ptr ambient = nullptr) {
  if (!ambient) ambient = space_from_json(j.at("space"));
  DecompositionChain c;
  for (const auto& m : j.at("start")) c.start.members.push_back(subspace_from_json(ambient, m));
  for (const auto& s : j.at("steps")) c.steps.push_back(family_witness_from_json(s, ambient));
  c.final_bound = j.at("final_bound").get<Dist>();
  c.same_scale = j.value("same_scale", false);
  return c;
}

// ---------------------------------------------------------------------------
// Coarse maps
// ---------------------------------------------------------------------------

inline json modulus_to_json(const ModulusTable& t) {
  json j = json::array();
  for (auto& [d, v] : t.entries) j.push_back(json::array({d, v}));
  return j;
}

inline ModulusTable modulus_from_json(const json& j) {
  ModulusTable t;
  for (const auto& e : j) t.entries.emplace_back(e.at(0).get<Dist>(), e.at(1).get<Dist>());
  t.check();
  return t;
}

inline json coarse_map_to_json(const CoarseMapWitness& w) {
  json j;
  j["kind"] = "coarse_map";
  j["source"] = space_to_json(*w.source);
  j["target"] = space_to_json(*w.target);
  json m = json::array();
  for (int i = 0; i < w.source->size(); ++i)
    m.push_back(json::array({w.source->point(i), w.target->point(w.map[i])}));
  j["map"] = std::move(m);
  j["rho_plus"] = modulus_to_json(w.rho_plus);
  if (w.rho_minus) j["rho_minus"] = modulus_to_json(*w.rho_minus);
  j["contractive"] = w.contractive;
  return j;
}

inline CoarseMapWitness coarse_map_from_json(const json& j) {
  CoarseMapWitness w;
  w.source = space_from_json(j.at("source"));
  w.target = space_from_json(j.at("target"));
  w.map.assign(w.source->size(), 0);
  for (const auto& e : j.at("map"))
    w.map[w.source->index(e.at(0).get<std::string>())] = w.target->index(e.at(1).get<std::string>());
  w.rho_plus = modulus_from_json(j.at("rho_plus"));
  if (j.contains("rho_minus")) w.rho_minus = modulus_from_json(j.at("rho_minus"));
  w.contractive = j.value("contractive", false);
  return w;
}

// ---------------------------------------------------------------------------
// Group specs and windows
// ---------------------------------------------------------------------------

inline json group_spec_to_json(const GroupSpec& g) {
  json j;
  switch (g.variant) {
    case GroupSpec::Variant::Free:
      j["variant"] = "free";
      j["rank"] = g.rank;
      break;
    case GroupSpec::Variant::FreeAbelian:
      j["variant"] = "free_abelian";
      j["rank"] = g.rank;
      break;
    case GroupSpec::Variant::Cyclic:
      j["variant"] = "cyclic";
      j["modulus"] = g.modulus;
      break;
    case GroupSpec::Variant::FreeProduct: {
      j["variant"] = "free_product";
      json fs = json::array();
      for (const auto& f : g.factors) fs.push_back(group_spec_to_json(f));
      j["factors"] = std::move(fs);
      break;
    }
  }
  return j;
}

inline GroupSpec group_spec_from_json(const json& j) {
  std::string variant = j.at("variant").get<std::string>();
  if (variant == "free") return GroupSpec::free_group(j.at("rank").get<int>());
  if (variant == "free_abelian") return GroupSpec::free_abelian(j.at("rank").get<int>());
  if (variant == "cyclic") return GroupSpec::cyclic(j.at("modulus").get<long long>());
  if (variant == "free_product") {
    std::vector<GroupSpec> fs;
    for (const auto& f : j.at("factors")) fs.push_back(group_spec_from_json(f));
    return GroupSpec::free_product(std::move(fs));
  }
  fail(ErrorCode::InvalidInput, "unknown group variant '" + variant + "'");
}

/// Window export: the d_S graph plus the relative overlay.
inline json window_to_json(const GroupWindow& w) {
  json j;
  j["kind"] = "window";
  j["spec"] = group_spec_to_json(w.spec);
  j["N"] = w.radius;
  j["elements"] = w.names;
  json se = json::array();
  for (auto& [u, v] : w.s_edges) se.push_back(json::array({w.names[u], w.names[v]}));
  j["s_edges"] = std::move(se);
  if (w.has_peripherals()) {
    json he = json::array();
    for (auto& [u, v, f] : w.h_edges) he.push_back(json::array({w.names[u], w.names[v], f}));
    j["h_edges"] = std::move(he);
  }
  return j;
}

// ---------------------------------------------------------------------------
// DOT export: S-edges solid, H-edges dashed; piece membership as fill groups.
// ---------------------------------------------------------------------------

inline std::string dot_export(const FiniteMetricSpace& s, const DecompositionWitness* witness = nullptr,
                              const std::vector<std::tuple<int, int, int>>* h_edges = nullptr) {
  static const char* fills[] = {"lightblue", "lightpink", "lightyellow", "lightgreen",
                                "lightsalmon", "lightcyan", "plum", "wheat"};
  std::ostringstream os;
  os << "graph \"" << s.id() << "\" {\n";
  for (int i = 0; i < s.size(); ++i) {
    os << "  \"" << s.point(i) << "\"";
    if (witness && witness->space.contains(i)) {
      size_t idx = std::lower_bound(witness->space.pts.begin(), witness->space.pts.end(), i) -
                   witness->space.pts.begin();
      const auto& l = witness->labels[idx];
      os << " [style=filled, fillcolor=" << fills[l.color % 8] << ", label=\"" << s.point(i) << "\\n("
         << l.color << "," << l.piece << ")\"]";
    }
    os << ";\n";
  }
  if (s.edges())
    for (auto& [u, v] : *s.edges()) os << "  \"" << s.point(u) << "\" -- \"" << s.point(v) << "\";\n";
  if (h_edges)
    for (auto& [u, v, f] : *h_edges)
      os << "  \"" << s.point(u) << "\" -- \"" << s.point(v) << "\" [style=dashed, color=gray];\n";
  os << "}\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Usage, "cannot open '" + path + "'");
  json j;
  in >> j;
  return j;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Usage, "cannot write '" + path + "'");
  out << content;
}

inline void write_json_file(const std::string& path, const json& j) { write_file(path, j.dump(1) + "\n"); }

}  // namespace cgw
