#pragma once

#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cgw/json_io.hpp"
#include "cgw/pipeline.hpp"
#include "cgw/search.hpp"

namespace cgw::cli {

// exit-code contract: 0 success/valid, 1 invalid certificate, 2 usage
constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kUsage = 2;

// ---------------------------------------------------------------------------
// Standard test-bench spaces.
// ---------------------------------------------------------------------------

inline FiniteMetricSpace::Ptr make_path(int n) {
  std::vector<std::string> pts;
  std::vector<std::pair<std::string, std::string>> edges;
  for (int i = 0; i < n; ++i) pts.push_back("p" + std::to_string(i));
  for (int i = 0; i + 1 < n; ++i) edges.emplace_back(pts[i], pts[i + 1]);
  return FiniteMetricSpace::from_graph("P" + std::to_string(n), pts, edges);
}

inline FiniteMetricSpace::Ptr make_cycle(int n) {
  std::vector<std::string> pts;
  std::vector<std::pair<std::string, std::string>> edges;
  for (int i = 0; i < n; ++i) pts.push_back("c" + std::to_string(i));
  for (int i = 0; i < n; ++i) edges.emplace_back(pts[i], pts[(i + 1) % n]);
  return FiniteMetricSpace::from_graph("C" + std::to_string(n), pts, edges);
}

inline FiniteMetricSpace::Ptr make_grid(int rows, int cols) {
  std::vector<std::string> pts;
  std::vector<std::pair<std::string, std::string>> edges;
  auto name = [&](int i, int j) { return std::to_string(i) + "," + std::to_string(j); };
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) pts.push_back(name(i, j));
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      if (i + 1 < rows) edges.emplace_back(name(i, j), name(i + 1, j));
      if (j + 1 < cols) edges.emplace_back(name(i, j), name(i, j + 1));
    }
  return FiniteMetricSpace::from_graph("grid" + std::to_string(rows) + "x" + std::to_string(cols), pts, edges);
}

inline FiniteMetricSpace::Ptr make_complete(int n) {
  std::vector<std::string> pts;
  std::vector<std::pair<std::string, std::string>> edges;
  for (int i = 0; i < n; ++i) pts.push_back("k" + std::to_string(i));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) edges.emplace_back(pts[i], pts[j]);
  return FiniteMetricSpace::from_graph("K" + std::to_string(n), pts, edges);
}

/// Seeded connected random graph: a random spanning tree plus a coin flip
/// per extra pair. Deterministic for a fixed (n, seed).
inline FiniteMetricSpace::Ptr make_random(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::vector<std::string> pts;
  for (int i = 0; i < n; ++i) pts.push_back("v" + std::to_string(i));
  std::vector<std::pair<std::string, std::string>> edges;
  for (int i = 1; i < n; ++i) {
    std::uniform_int_distribution<int> parent(0, i - 1);
    edges.emplace_back(pts[parent(rng)], pts[i]);
  }
  std::bernoulli_distribution extra(0.25);
  for (int i = 0; i < n; ++i)
    for (int j = i + 2; j < n; ++j)
      if (extra(rng)) edges.emplace_back(pts[i], pts[j]);
  return FiniteMetricSpace::from_graph("rand" + std::to_string(n) + "_" + std::to_string(seed), pts, edges);
}

// ---------------------------------------------------------------------------
// Certificate verification dispatch.
// ---------------------------------------------------------------------------

struct VerifyOutcome {
  bool valid = true;
  json report;
};

inline VerifyOutcome verify_any(const json& j);

namespace detail {

inline VerifyOutcome from_witness_report(const std::string& kind, const WitnessReport& rep) {
  VerifyOutcome out;
  out.valid = rep.valid;
  out.report["kind"] = kind;
  out.report["valid"] = rep.valid;
  out.report["violations"] = rep.violations;
  return out;
}

inline VerifyOutcome verify_window_json(const json& j) {
  VerifyOutcome out;
  out.report["kind"] = "window_report";
  GroupSpec spec = group_spec_from_json(j.at("spec"));
  GroupWindow w = enumerate_ball(spec, j.at("N").get<int>());
  std::vector<std::string> violations;
  if (j.at("elements").get<std::vector<std::string>>() != w.names)
    violations.push_back("element list differs from a fresh enumeration");
  auto edge_set = [](const json& arr) {
    std::set<std::pair<std::string, std::string>> s;
    for (const auto& e : arr) {
      std::string a = e.at(0).get<std::string>(), b = e.at(1).get<std::string>();
      s.insert({std::min(a, b), std::max(a, b)});
    }
    return s;
  };
  std::set<std::pair<std::string, std::string>> fresh;
  for (auto& [u, v] : w.s_edges)
    fresh.insert({std::min(w.names[u], w.names[v]), std::max(w.names[u], w.names[v])});
  if (edge_set(j.at("s_edges")) != fresh) violations.push_back("word-metric edge set differs");
  if (j.contains("h_edges")) {
    std::set<std::pair<std::string, std::string>> fresh_h;
    for (auto& [u, v, f] : w.h_edges)
      fresh_h.insert({std::min(w.names[u], w.names[v]), std::max(w.names[u], w.names[v])});
    if (edge_set(j.at("h_edges")) != fresh_h) violations.push_back("peripheral edge set differs");
  }
  out.valid = violations.empty();
  out.report["valid"] = out.valid;
  out.report["violations"] = violations;
  return out;
}

inline VerifyOutcome verify_report_json(const json& j) {
  VerifyOutcome out;
  out.report["kind"] = "pipeline_report_report";
  json stages = json::array();
  bool all = true;
  for (const auto& st : j.at("stages")) {
    json e;
    e["name"] = st.at("name");
    if (st.at("certificate").is_null()) {
      e["valid"] = st.at("valid");
      if (!st.at("valid").get<bool>()) all = false;
    } else {
      VerifyOutcome sub = verify_any(st.at("certificate"));
      e["valid"] = sub.valid;
      e["report"] = sub.report;
      if (!sub.valid) all = false;
    }
    stages.push_back(std::move(e));
  }
  bool claimed = j.at("overall").get<std::string>() == "valid";
  out.valid = all && claimed == all;
  out.report["valid"] = out.valid;
  out.report["stages"] = std::move(stages);
  if (claimed != all) out.report["violations"] = json::array({"overall flag disagrees with stage re-verification"});
  return out;
}

}  // namespace detail

inline VerifyOutcome verify_any(const json& j) {
  std::string kind = j.value("kind", "witness");
  if (kind == "witness") return detail::from_witness_report("witness_report", verify_witness(witness_from_json(j)));
  if (kind == "family_witness")
    return detail::from_witness_report("family_report", verify_family_witness(family_witness_from_json(j)));
  if (kind == "chain") return detail::from_witness_report("chain_report", verify_chain(chain_from_json(j)));
  if (kind == "coarse_map") {
    auto rep = check_coarse_map(coarse_map_from_json(j));
    VerifyOutcome out;
    out.valid = rep.valid && (!j.value("contractive", false) || rep.is_contraction);
    out.report["kind"] = "coarse_map_report";
    out.report["valid"] = out.valid;
    out.report["is_contraction"] = rep.is_contraction;
    out.report["violations"] = rep.violations;
    return out;
  }
  if (kind == "window") return detail::verify_window_json(j);
  if (kind == "report") return detail::verify_report_json(j);
  fail(ErrorCode::Usage, "cannot verify objects of kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Subcommand bodies.
// ---------------------------------------------------------------------------

namespace detail {

inline void emit(const json& j, const std::string& out_path, std::ostream& os) {
  if (out_path.empty())
    os << j.dump() << "\n";
  else
    write_json_file(out_path, j);
}

inline std::vector<Dist> parse_scales(const std::string& csv) {
  std::vector<Dist> scales;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    scales.push_back(std::stoll(item));
  }
  if (scales.empty()) fail(ErrorCode::Usage, "empty scale list");
  for (size_t i = 1; i < scales.size(); ++i)
    if (scales[i] <= scales[i - 1]) fail(ErrorCode::Usage, "scales must strictly increase");
  return scales;
}

inline int run_transform(const std::string& kind, const std::vector<std::string>& inputs, const std::string& map_path,
                         int k_prime, Dist r, const std::string& scales_csv, const std::string& pts_csv,
                         const std::string& out_path, std::ostream& os) {
  auto need = [&](size_t n) {
    if (inputs.size() != n)
      fail(ErrorCode::Usage, kind + " needs exactly " + std::to_string(n) + " --in file(s)");
  };
  json result;
  if (kind == "chain-from-kfold") {
    need(1);
    DecompositionChain c = chain_from_kfold(family_witness_from_json(read_json_file(inputs[0])));
    if (!verify_chain(c).valid) fail(ErrorCode::InvalidInput, "rewrite produced an invalid chain");
    result = chain_to_json(c);
  } else if (kind == "string") {
    need(2);
    std::optional<std::vector<Dist>> relabel;
    if (!scales_csv.empty()) relabel = parse_scales(scales_csv);
    DecompositionChain c = string_chains(chain_from_json(read_json_file(inputs[0])),
                                         chain_from_json(read_json_file(inputs[1])), relabel);
    if (!verify_chain(c).valid) fail(ErrorCode::InvalidInput, "strung chain does not verify");
    result = chain_to_json(c);
  } else if (kind == "pad") {
    need(1);
    if (k_prime < 1) fail(ErrorCode::Usage, "pad needs --k");
    DecompositionWitness w = pad_witness(witness_from_json(read_json_file(inputs[0])), k_prime);
    if (!verify_witness(w).valid) fail(ErrorCode::InvalidInput, "padded witness does not verify");
    result = witness_to_json(w);
  } else if (kind == "merge-union") {
    need(2);
    json j1 = read_json_file(inputs[0]);
    DecompositionWitness w1 = witness_from_json(j1);
    DecompositionWitness w2 = witness_from_json(read_json_file(inputs[1]), w1.space.ambient);
    DecompositionWitness w = merge_union_witnesses(w1, w2);
    if (!verify_witness(w).valid) fail(ErrorCode::InvalidInput, "merged witness does not verify");
    result = witness_to_json(w);
  } else if (kind == "union-assemble") {
    need(1);
    json j = read_json_file(inputs[0]);
    auto ambient = space_from_json(j.at("space"));
    std::vector<Subspace> parts;
    for (const auto& p : j.at("parts")) parts.push_back(subspace_from_json(ambient, p));
    DecompositionWitness w = union_assemble(parts, subspace_from_json(ambient, j.at("y")), j.at("r").get<Dist>());
    if (!verify_witness(w).valid) fail(ErrorCode::InvalidInput, "assembled witness does not verify");
    result = witness_to_json(w);
  } else if (kind == "transfer") {
    need(1);
    if (map_path.empty()) fail(ErrorCode::Usage, "transfer needs --map");
    CoarseMapWitness emb = coarse_map_from_json(read_json_file(map_path));
    json j = read_json_file(inputs[0]);
    if (j.value("kind", "witness") == "chain") {
      DecompositionChain c = transfer_chain(chain_from_json(j, emb.target), emb);
      if (!verify_chain(c).valid) fail(ErrorCode::InvalidInput, "transferred chain does not verify");
      result = chain_to_json(c);
    } else {
      DecompositionWitness w = transfer_witness(witness_from_json(j, emb.target), emb);
      if (!verify_witness(w).valid) fail(ErrorCode::InvalidInput, "transferred witness does not verify");
      result = witness_to_json(w);
    }
  } else if (kind == "restrict") {
    need(1);
    if (pts_csv.empty()) fail(ErrorCode::Usage, "restrict needs --pts");
    DecompositionWitness w = witness_from_json(read_json_file(inputs[0]));
    std::vector<std::string> names;
    std::stringstream ss(pts_csv);
    std::string item;
    while (std::getline(ss, item, ',')) names.push_back(item);
    DecompositionWitness out = restrict_to_subspace(w, Subspace::of_points(w.space.ambient, names));
    if (!verify_witness(out).valid) fail(ErrorCode::InvalidInput, "restricted witness does not verify");
    result = witness_to_json(out);
  } else {
    fail(ErrorCode::Usage, "unknown transform kind '" + kind + "'");
  }
  emit(result, out_path, os);
  return kOk;
}

}  // namespace detail

/// Whole CLI as a function of argv, for in-process testing.
inline int run(std::vector<std::string> args, std::ostream& os = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"finite-scale coarse geometry workbench"};
  app.require_subcommand(1);

  std::string kind = "path", space_path, spec_path, witness_path, map_path, out_path, in_path, scales_csv, pts_csv;
  std::string mode = "exhaustive", transform_kind;
  std::vector<std::string> inputs;
  int n = 5, cols = 0, big_n = 2, rel_n = 1, max_k = 4, k_prime = 0;
  unsigned seed = 1;
  Dist r = 1, big_d = 2;
  bool emit_dot = false;

  auto* gen_space = app.add_subcommand("gen-space", "emit a standard or seeded random space");
  gen_space->add_option("--kind", kind)->check(CLI::IsMember({"path", "cycle", "grid", "complete", "random"}));
  gen_space->add_option("--n", n);
  gen_space->add_option("--cols", cols);
  gen_space->add_option("--seed", seed);
  gen_space->add_option("--out", out_path);

  auto* gen_ball = app.add_subcommand("gen-ball", "enumerate a word-metric ball of a group");
  gen_ball->add_option("--spec", spec_path)->required();
  gen_ball->add_option("--N", big_n)->required();
  gen_ball->add_option("--out", out_path);

  auto* rel_ball_cmd = app.add_subcommand("rel-ball", "relative ball inside a window");
  rel_ball_cmd->add_option("--spec", spec_path)->required();
  rel_ball_cmd->add_option("--N", big_n)->required();
  rel_ball_cmd->add_option("--n", rel_n)->required();
  rel_ball_cmd->add_option("--out", out_path);

  auto* search_cmd = app.add_subcommand("search", "find a (k,r)-decomposition witness");
  search_cmd->add_option("--space", space_path)->required();
  search_cmd->add_option("--r", r)->required();
  search_cmd->add_option("--D", big_d)->required();
  search_cmd->add_option("--max-k", max_k);
  search_cmd->add_option("--mode", mode)->check(CLI::IsMember({"exhaustive", "heuristic"}));
  search_cmd->add_option("--out", out_path);

  auto* profile_cmd = app.add_subcommand("profile", "scale-wise minimal-k profile");
  profile_cmd->add_option("--space", space_path)->required();
  profile_cmd->add_option("--scales", scales_csv)->required();
  profile_cmd->add_option("--max-k", max_k);
  profile_cmd->add_option("--mode", mode)->check(CLI::IsMember({"exhaustive", "heuristic"}));
  profile_cmd->add_option("--out", out_path);

  auto* verify_cmd = app.add_subcommand("verify", "re-verify a certificate file");
  verify_cmd->add_option("--witness", witness_path);
  verify_cmd->add_option("--chain", in_path);
  verify_cmd->add_option("--in", in_path);
  verify_cmd->add_option("--report", in_path);

  auto* transform_cmd = app.add_subcommand("transform", "certificate rewrite");
  transform_cmd->add_option("--kind", transform_kind)->required();
  transform_cmd->add_option("--in", inputs);
  transform_cmd->add_option("--map", map_path);
  transform_cmd->add_option("--k", k_prime);
  transform_cmd->add_option("--r", r);
  transform_cmd->add_option("--scales", scales_csv);
  transform_cmd->add_option("--pts", pts_csv);
  transform_cmd->add_option("--out", out_path);

  auto* demo_cmd = app.add_subcommand("rhg-demo", "end-to-end pipeline for a free product");
  demo_cmd->add_option("--spec", spec_path)->required();
  demo_cmd->add_option("--window", big_n)->required();
  demo_cmd->add_option("--rel-radius", rel_n)->required();
  demo_cmd->add_option("--scales", scales_csv)->required();
  demo_cmd->add_option("--D", big_d);
  demo_cmd->add_option("--out", out_path);
  demo_cmd->add_flag("--emit-dot", emit_dot);

  auto* dot_cmd = app.add_subcommand("export-dot", "DOT rendering of a space or window");
  dot_cmd->add_option("--space", space_path);
  dot_cmd->add_option("--spec", spec_path);
  dot_cmd->add_option("--N", big_n);
  dot_cmd->add_option("--witness", witness_path);
  dot_cmd->add_option("--out", out_path);

  std::vector<const char*> argv;
  argv.push_back("cgw");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    os << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kUsage;
  }

  try {
    if (gen_space->parsed()) {
      FiniteMetricSpace::Ptr s;
      if (kind == "path") s = make_path(n);
      else if (kind == "cycle") s = make_cycle(n);
      else if (kind == "grid") s = make_grid(n, cols > 0 ? cols : n);
      else if (kind == "complete") s = make_complete(n);
      else s = make_random(n, seed);
      detail::emit(space_to_json(*s), out_path, os);
      return kOk;
    }
    if (gen_ball->parsed()) {
      GroupSpec spec = group_spec_from_json(read_json_file(spec_path));
      GroupWindow w = enumerate_ball(spec, big_n);
      detail::emit(window_to_json(w), out_path, os);
      return kOk;
    }
    if (rel_ball_cmd->parsed()) {
      GroupSpec spec = group_spec_from_json(read_json_file(spec_path));
      GroupWindow w = enumerate_ball(spec, big_n);
      Subspace b = relative_ball(w, rel_n);
      json j;
      j["kind"] = "rel_ball";
      j["N"] = big_n;
      j["n"] = rel_n;
      j["elements"] = subspace_to_json(b);
      detail::emit(j, out_path, os);
      return kOk;
    }
    if (search_cmd->parsed()) {
      auto s = space_from_json(read_json_file(space_path));
      Subspace whole = Subspace::whole(s);
      std::optional<DecompositionWitness> w;
      if (mode == "exhaustive") {
        auto res = oracle_min_k(whole, r, big_d, max_k, 20);
        if (res) w = std::move(res->witness);
      } else {
        w = heuristic_decompose(whole, r, big_d);
        if (!w) w = annulus_decompose(whole, r, big_d);
      }
      if (!w) {
        err << "no witness with k <= " << max_k << "\n";
        return kInvalid;
      }
      detail::emit(witness_to_json(*w), out_path, os);
      return kOk;
    }
    if (profile_cmd->parsed()) {
      auto s = space_from_json(read_json_file(space_path));
      SearchBudget budget;
      budget.max_k = max_k;
      budget.max_points = 20;
      budget.mode = mode == "heuristic" ? SearchBudget::Mode::Heuristic : SearchBudget::Mode::Exhaustive;
      auto rows = asdim_profile(Subspace::whole(s), detail::parse_scales(scales_csv), default_d_rule, budget);
      json j;
      j["kind"] = "profile";
      j["rows"] = json::array();
      for (const auto& row : rows) {
        json e;
        e["r"] = row.r;
        e["D"] = row.d;
        e["k"] = row.k;
        e["exhaustive"] = row.exhaustive;
        e["witness"] = witness_to_json(row.witness);
        j["rows"].push_back(std::move(e));
      }
      detail::emit(j, out_path, os);
      return kOk;
    }
    if (verify_cmd->parsed()) {
      std::string path = !witness_path.empty() ? witness_path : in_path;
      if (path.empty()) fail(ErrorCode::Usage, "verify needs a certificate file");
      VerifyOutcome outcome = verify_any(read_json_file(path));
      os << outcome.report.dump() << "\n";
      return outcome.valid ? kOk : kInvalid;
    }
    if (transform_cmd->parsed())
      return detail::run_transform(transform_kind, inputs, map_path, k_prime, r, scales_csv, pts_csv, out_path, os);
    if (demo_cmd->parsed()) {
      GroupSpec spec = group_spec_from_json(read_json_file(spec_path));
      PipelineReport report =
          extend_group_chain(spec, big_n, rel_n, detail::parse_scales(scales_csv), big_d > 2 ? big_d : 0);
      detail::emit(report.to_json(), out_path, os);
      if (emit_dot) {
        GroupWindow w = enumerate_ball(spec, big_n);
        std::string dot = dot_export(*w.s_space, nullptr, &w.h_edges);
        write_file(out_path.empty() ? "window.dot" : out_path + ".dot", dot);
      }
      return report.overall ? kOk : kInvalid;
    }
    if (dot_cmd->parsed()) {
      std::string dot;
      std::optional<DecompositionWitness> w;
      if (!spec_path.empty()) {
        GroupSpec spec = group_spec_from_json(read_json_file(spec_path));
        GroupWindow win = enumerate_ball(spec, big_n);
        dot = dot_export(*win.s_space, nullptr, &win.h_edges);
      } else if (!space_path.empty()) {
        auto s = space_from_json(read_json_file(space_path));
        if (!witness_path.empty()) w = witness_from_json(read_json_file(witness_path), s);
        dot = dot_export(*s, w ? &*w : nullptr);
      } else {
        fail(ErrorCode::Usage, "export-dot needs --space or --spec");
      }
      if (out_path.empty())
        os << dot;
      else
        write_file(out_path, dot);
      return kOk;
    }
  } catch (const Error& e) {
    err << e.what() << "\n";
    return e.code() == ErrorCode::Usage ? kUsage : kInvalid;
  } catch (const json::exception& e) {
    err << "bad input: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace cgw::cli
