// Acceptance suite: one line per criterion, nonzero exit if any fail.
#include <chrono>
#include <iostream>
#include <string>

#include "cgw/cli.hpp"
#include "cgw/pipeline.hpp"
#include "helpers.hpp"

using namespace cgw;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int num, const std::string& name, bool ok, const std::string& detail = "") {
  std::cout << (ok ? "PASS" : "FAIL") << " criterion " << num << ": " << name;
  if (!detail.empty()) std::cout << " (" << detail << ")";
  std::cout << std::endl;
  if (!ok) ++failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

GroupSpec zz() { return GroupSpec::free_product({GroupSpec::free_group(1), GroupSpec::free_group(1)}); }

void criterion1() {
  auto t0 = Clock::now();
  int mismatches = 0, instances = 0;
  for (unsigned seed = 1; seed <= 50; ++seed) {
    auto s = cgw::testing::random_space(seed, 8);
    Subspace whole = Subspace::whole(s);
    for (Dist r : {1, 2, 3})
      for (Dist d : {2, 4}) {
        ++instances;
        auto got = oracle_min_k(whole, r, d, 4, 8);
        auto bf = cgw::testing::brute_force_min_k(whole, r, d, 4);
        bool agree = (!got && !bf) || (got && bf && got->k == *bf && verify_witness(got->witness).valid);
        if (!agree) ++mismatches;
      }
  }
  double secs = seconds_since(t0);
  report(1, "oracle agrees with independent brute force on 50 seeded spaces",
         mismatches == 0 && secs < 60.0,
         std::to_string(instances) + " instances, " + std::to_string(mismatches) + " mismatches, " +
             std::to_string(secs) + " s");
}

void criterion2() {
  auto p10 = cgw::cli::make_path(10);
  auto grid = cgw::cli::make_grid(3, 3);
  auto k5 = cgw::cli::make_complete(5);
  auto k_of = [](std::optional<OracleResult> r) { return r ? r->k : -1; };
  bool ok = k_of(oracle_min_k(Subspace::whole(p10), 2, 3, 4, 10)) == 2 &&
            k_of(oracle_min_k(Subspace::whole(grid), 2, 2, 4, 9)) == 3 &&
            k_of(oracle_min_k(Subspace::whole(grid), 1, 0, 4, 9)) == 2 &&
            k_of(oracle_min_k(Subspace::whole(k5), 2, 1, 4, 9)) == 1;
  report(2, "analytic landmarks: P10, 3x3 grid, K5", ok);
}

void criterion3() {
  int passed = 0;
  for (unsigned seed = 1; seed <= 100; ++seed) {
    FamilyWitness fw = cgw::testing::random_family_witness(seed);
    if (!verify_family_witness(fw).valid) continue;
    DecompositionChain c = chain_from_kfold(fw);
    bool ok = c.steps.size() == static_cast<size_t>(fw.k);
    for (const auto& step : c.steps) ok = ok && verify_family_witness(step).valid;
    for (const auto& m : c.steps.back().target_family().members)
      ok = ok && fw.per_member[0].target.accepts(m);
    if (ok) ++passed;
  }
  report(3, "k-fold rewrite: 100 seeded witnesses give verified length-k chains", passed == 100,
         std::to_string(passed) + "/100");
}

void criterion4() {
  int passed = 0, cases = 0;
  for (unsigned seed = 1; cases < 50; ++seed) {
    FamilyWitness fw = cgw::testing::random_family_witness(seed);
    if (fw.r < fw.k - 1) continue;  // no strictly increasing nonnegative prefix ending at r
    ++cases;
    DecompositionChain head = chain_from_kfold(fw);
    MetricFamily fam = head.final_family();
    DecompositionChain tail;
    tail.start = fam;
    tail.final_bound = head.final_bound;
    tail.steps.push_back(cgw::detail::trivial_step(fam, fw.r + 1));
    tail.steps.push_back(cgw::detail::trivial_step(tail.steps[0].target_family(), fw.r + 3));
    std::vector<Dist> relabel;
    for (Dist i = 1; i <= fw.k; ++i) relabel.push_back(fw.r - fw.k + i);
    DecompositionChain joined = string_chains(head, tail, relabel);
    if (verify_chain(joined).valid) ++passed;
  }
  report(4, "stringing relabeled heads with tails: 50 seeded compositions verify", passed == 50,
         std::to_string(passed) + "/50");
}

void criterion5() {
  bool ok = enumerate_ball(GroupSpec::free_group(2), 2).elements.size() == 17 &&
            enumerate_ball(GroupSpec::free_group(2), 3).elements.size() == 53 &&
            enumerate_ball(GroupSpec::free_abelian(2), 2).elements.size() == 13 &&
            enumerate_ball(GroupSpec::free_abelian(2), 3).elements.size() == 25;
  report(5, "ball counts: Free(2) 17/53, FreeAbelian(2) 13/25", ok);
}

void criterion6() {
  bool ok = true;
  std::string detail;
  for (int n : {4, 6}) {
    GroupWindow w = enumerate_ball(zz(), n);
    int count = static_cast<int>(w.elements.size());
    for (int i = 0; i < count && ok; ++i)
      for (int j = 0; j < count && ok; ++j)
        if (w.rel_dist(i, j) > w.s_dist(i, j)) ok = false;

    CoarseMapWitness p;
    p.source = w.s_space;
    p.target = w.rel_space;
    for (int i = 0; i < count; ++i) p.map.push_back(i);
    p.rho_plus = ModulusTable::identity_up_to(std::max<Dist>(1, w.s_space->diameter()));
    p.contractive = true;
    auto rep = check_coarse_map(p);
    if (!rep.valid || !rep.is_contraction) ok = false;
    detail += "N=" + std::to_string(n) + " " + std::to_string(count) + " elements; ";
  }
  report(6, "Z*Z windows N=4,6: relative metric dominated, projection contractive", ok, detail);
}

void criterion7() {
  GroupWindow w = enumerate_ball(zz(), 8);
  Subspace prev = relative_ball(w, 1);
  Subspace ball = relative_ball(w, 2);
  bool ok = true;
  std::string detail;
  for (int factor : {0, 1}) {
    SeparationResult sep = find_separating_radius(w, prev, factor, 2, 8);
    if (sep.t > 8) ok = false;
    std::vector<Subspace> coset_subs;
    for (auto& [rep_name, part] : sep.parts) coset_subs.push_back(part);
    DecompositionWitness u = union_assemble(coset_subs, subspace_intersection(sep.y, ball), 2);
    if (!verify_witness(u).valid) ok = false;
    detail += "factor " + std::to_string(factor) + ": t=" + std::to_string(sep.t) + "; ";
  }
  report(7, "Z*Z N=8 n=2 s=2: finite separating radius with verified assembly", ok, detail);
}

void criterion8() {
  bool ok = true;
  std::string detail;
  struct Case {
    GroupSpec spec;
    int window;
    std::vector<Dist> scales;
    std::string name;
  };
  std::vector<Case> cases = {{zz(), 6, {1, 2, 3, 5, 8}, "Z*Z N=6"},
                             {GroupSpec::free_product({GroupSpec::cyclic(2), GroupSpec::cyclic(3)}),
                              8,
                              {1, 2, 4},
                              "C2*C3 N=8"}};
  for (auto& c : cases) {
    auto t0 = Clock::now();
    PipelineReport rep = extend_group_chain(c.spec, c.window, 2, c.scales);
    bool case_ok = rep.overall;
    // every embedded certificate re-verifies independently
    auto outcome = cgw::cli::verify_any(rep.to_json());
    case_ok = case_ok && outcome.valid;
    double secs = seconds_since(t0);
    case_ok = case_ok && secs < 300.0;
    detail += c.name + (case_ok ? " valid " : " INVALID ") + std::to_string(secs) + " s; ";
    ok = ok && case_ok;
  }
  report(8, "end-to-end pipeline reports valid and re-verify", ok, detail);
}

void criterion9() {
  auto grid = cgw::cli::make_grid(21, 21);
  auto p21 = cgw::cli::make_path(21);
  Subspace base_whole = Subspace::whole(p21);

  DecompositionChain base;
  base.start.members.push_back(base_whole);
  base.final_bound = 7;
  FamilyWitness s1;
  s1.k = 2;
  s1.r = 3;
  s1.source.members.push_back(base_whole);
  DecompositionWitness bw;
  bw.space = base_whole;
  bw.k = 2;
  bw.r = 3;
  bw.labels.assign(21, PieceLabel{});
  for (int i = 0; i < 21; ++i) bw.labels[i] = PieceLabel{(i / 8) % 2, (i / 8) / 2};
  bw.target = TargetClass::bounded(7);
  s1.per_member.push_back(bw);
  base.steps.push_back(s1);

  FiberingInput in;
  in.f.source = grid;
  in.f.target = p21;
  for (int i = 0; i < grid->size(); ++i) {
    std::string name = grid->point(i);
    int col = std::stoi(name.substr(name.find(',') + 1));
    in.f.map.push_back(p21->index("p" + std::to_string(col)));
  }
  in.f.rho_plus = ModulusTable::identity_up_to(40);
  in.base = base;
  in.fiber_provider = [&](const Subspace& y) -> std::optional<DecompositionChain> {
    return make_bounded_chain(cgw::detail::preimage(in.f, y), {5, 9}, 9);
  };

  bool ok = true;
  long pairs = 0;
  DecompositionChain out = pullback_chain(in, {3});
  ok = verify_chain(out).valid;
  for (const auto& step : out.steps)
    for (const auto& pw : step.per_member)
      for (int c = 0; c < pw.k && ok; ++c) {
        auto pieces = pw.color_pieces(c);
        std::vector<Subspace> ps;
        for (auto& [pid, pts] : pieces) ps.emplace_back(pw.space.ambient, pts);
        for (size_t i = 0; i < ps.size() && ok; ++i)
          for (size_t j = i + 1; j < ps.size() && ok; ++j) {
            ++pairs;
            if (set_distance(ps[i], ps[j]) <= step.r) ok = false;
          }
      }
  report(9, "21x21 grid pullback: same-color pieces strictly separated at every scale", ok,
         std::to_string(pairs) + " piece pairs checked");
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  if (failures) {
    std::cout << failures << " criteria failed" << std::endl;
    return 1;
  }
  std::cout << "all 9 criteria passed" << std::endl;
  return 0;
}
