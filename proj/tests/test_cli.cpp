#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cgw/cli.hpp"
#include "helpers.hpp"

using namespace cgw;
namespace fs = std::filesystem;

namespace {

struct Tmp {
  fs::path dir;
  Tmp() {
    dir = fs::temp_directory_path() / ("cgw_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~Tmp() { fs::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

int run(const std::vector<std::string>& args, std::string* out = nullptr, std::string* err = nullptr) {
  std::ostringstream os, es;
  int code = cgw::cli::run(args, os, es);
  if (out) *out = os.str();
  if (err) *err = es.str();
  return code;
}

json load(const std::string& path) { return read_json_file(path); }

}  // namespace

TEST_CASE("exit codes: usage errors return 2") {
  std::string err;
  CHECK(run({"no-such-command"}, nullptr, &err) == cgw::cli::kUsage);
  CHECK(run({}, nullptr, &err) == cgw::cli::kUsage);
  CHECK(run({"gen-space", "--kind", "nonsense", "--n", "5"}, nullptr, &err) == cgw::cli::kUsage);
  CHECK(run({"verify"}, nullptr, &err) == cgw::cli::kUsage);
}

TEST_CASE("gen-space: path round-trips through JSON") {
  Tmp tmp;
  std::string p = tmp.path("p10.json");
  REQUIRE(run({"gen-space", "--kind", "path", "--n", "10", "--out", p}) == cgw::cli::kOk);
  json j = load(p);
  auto space = space_from_json(j);
  CHECK(space->size() == 10);
  CHECK(space->diameter() == 9);
  // serialization is a fixed point
  CHECK(space_to_json(*space) == j);
}

TEST_CASE("gen-space: grid and random") {
  Tmp tmp;
  std::string g = tmp.path("g.json");
  REQUIRE(run({"gen-space", "--kind", "grid", "--n", "3", "--cols", "4", "--out", g}) == cgw::cli::kOk);
  CHECK(space_from_json(load(g))->size() == 12);

  std::string r1 = tmp.path("r1.json"), r2 = tmp.path("r2.json");
  REQUIRE(run({"gen-space", "--kind", "random", "--n", "9", "--seed", "5", "--out", r1}) == cgw::cli::kOk);
  REQUIRE(run({"gen-space", "--kind", "random", "--n", "9", "--seed", "5", "--out", r2}) == cgw::cli::kOk);
  CHECK(load(r1) == load(r2));  // deterministic in the seed
}

TEST_CASE("gen-ball: free group of rank 2 at radius 2 has 17 elements") {
  Tmp tmp;
  std::string spec = tmp.path("f2.json");
  write_json_file(spec, group_spec_to_json(GroupSpec::free_group(2)));
  std::string out = tmp.path("ball.json");
  REQUIRE(run({"gen-ball", "--spec", spec, "--N", "2", "--out", out}) == cgw::cli::kOk);
  json j = load(out);
  CHECK(j.at("kind") == "window");
  CHECK(j.at("elements").size() == 17);
}

TEST_CASE("search + verify round-trip on P10") {
  Tmp tmp;
  std::string p = tmp.path("p10.json");
  REQUIRE(run({"gen-space", "--kind", "path", "--n", "10", "--out", p}) == cgw::cli::kOk);
  std::string w = tmp.path("w.json");
  REQUIRE(run({"search", "--space", p, "--r", "3", "--D", "4", "--mode", "exhaustive", "--out", w}) == cgw::cli::kOk);
  CHECK(witness_from_json(load(w)).k == 2);

  std::string rep;
  CHECK(run({"verify", "--witness", w}, &rep) == cgw::cli::kOk);
  CHECK(rep.find("\"valid\":true") != std::string::npos);
}

TEST_CASE("verify: invalid witness exits 1 and names the violation") {
  Tmp tmp;
  auto p10 = cgw::cli::make_path(10);
  DecompositionWitness w;
  w.space = Subspace::whole(p10);
  w.k = 2;
  w.r = 3;
  w.labels.assign(10, PieceLabel{});
  for (int i : {0, 1, 2}) w.labels[i] = {0, 0};
  for (int i : {5, 6, 7, 8, 9}) w.labels[i] = {0, 1};
  for (int i : {3, 4}) w.labels[i] = {1, 0};
  w.target = TargetClass::bounded(4);
  std::string path = tmp.path("bad.json");
  write_json_file(path, witness_to_json(w));

  std::string rep;
  CHECK(run({"verify", "--witness", path}, &rep) == cgw::cli::kInvalid);
  CHECK(rep.find("d(X_{0,0}, X_{0,1}) = 3 <= r = 3") != std::string::npos);
}

TEST_CASE("verify: malformed JSON is a usage error") {
  Tmp tmp;
  std::string path = tmp.path("garbage.json");
  std::ofstream(path) << "{not json";
  CHECK(run({"verify", "--in", path}) == cgw::cli::kUsage);
}

TEST_CASE("transform: chain-from-kfold emits a verified chain") {
  Tmp tmp;
  FamilyWitness fw = cgw::testing::random_family_witness(5);
  fw.source.members.resize(1);  // serialized families live in one ambient space
  fw.per_member.resize(1);
  std::string in = tmp.path("fw.json");
  write_json_file(in, family_witness_to_json(fw));
  std::string out = tmp.path("chain.json");
  REQUIRE(run({"transform", "--kind", "chain-from-kfold", "--in", in, "--out", out}) == cgw::cli::kOk);
  json j = load(out);
  CHECK(j.at("kind") == "chain");
  CHECK(j.at("steps").size() == static_cast<size_t>(fw.k));
  std::string rep;
  CHECK(run({"verify", "--in", out}, &rep) == cgw::cli::kOk);
}

TEST_CASE("transform write-gate: failing transforms leave no output file") {
  Tmp tmp;
  // string two chains over different families: FamilyMismatch, exit 1, no file
  DecompositionChain a = chain_from_kfold(cgw::testing::random_family_witness(8));
  DecompositionChain b = chain_from_kfold(cgw::testing::random_family_witness(9));
  std::string pa = tmp.path("a.json"), pb = tmp.path("b.json"), out = tmp.path("joined.json");
  write_json_file(pa, chain_to_json(a));
  write_json_file(pb, chain_to_json(b));
  std::string err;
  CHECK(run({"transform", "--kind", "string", "--in", pa, "--in", pb, "--out", out}, nullptr, &err) ==
        cgw::cli::kInvalid);
  CHECK(err.find("FamilyMismatch") != std::string::npos);
  CHECK(!fs::exists(out));
}

TEST_CASE("transform: restrict intersects a witness with named points") {
  Tmp tmp;
  std::string p = tmp.path("p10.json");
  REQUIRE(run({"gen-space", "--kind", "path", "--n", "10", "--out", p}) == cgw::cli::kOk);
  std::string w = tmp.path("w.json");
  REQUIRE(run({"search", "--space", p, "--r", "3", "--D", "4", "--out", w}) == cgw::cli::kOk);
  std::string out = tmp.path("restricted.json");
  REQUIRE(run({"transform", "--kind", "restrict", "--in", w, "--pts", "p1,p3,p5,p7,p9", "--out", out}) ==
          cgw::cli::kOk);
  auto restricted = witness_from_json(load(out));
  CHECK(restricted.space.pts.size() == 5);
  CHECK(verify_witness(restricted).valid);
}

TEST_CASE("profile: P10 scales 1,2") {
  Tmp tmp;
  std::string p = tmp.path("p10.json");
  REQUIRE(run({"gen-space", "--kind", "path", "--n", "10", "--out", p}) == cgw::cli::kOk);
  std::string out;
  REQUIRE(run({"profile", "--space", p, "--scales", "1,2", "--mode", "exhaustive"}, &out) == cgw::cli::kOk);
  json j = json::parse(out);
  REQUIRE(j.at("rows").size() == 2);
  CHECK(j["rows"][0]["k"] == 2);
  CHECK(j["rows"][1]["k"] == 2);
}

TEST_CASE("rhg-demo: report verifies and is accepted by verify --report") {
  Tmp tmp;
  std::string spec = tmp.path("zz.json");
  write_json_file(spec, group_spec_to_json(
                            GroupSpec::free_product({GroupSpec::free_group(1), GroupSpec::free_group(1)})));
  std::string rep = tmp.path("report.json");
  REQUIRE(run({"rhg-demo", "--spec", spec, "--window", "6", "--rel-radius", "2", "--scales", "1,2,3,5,8", "--out",
               rep}) == cgw::cli::kOk);
  json j = load(rep);
  CHECK(j.at("overall") == "valid");
  std::string out;
  CHECK(run({"verify", "--report", rep}, &out) == cgw::cli::kOk);
}

TEST_CASE("export-dot: styles for S-edges, H-edges, and piece fills") {
  Tmp tmp;
  std::string spec = tmp.path("zz.json");
  write_json_file(spec, group_spec_to_json(
                            GroupSpec::free_product({GroupSpec::free_group(1), GroupSpec::free_group(1)})));
  std::string dot = tmp.path("ball.dot");
  REQUIRE(run({"export-dot", "--spec", spec, "--N", "2", "--out", dot}) == cgw::cli::kOk);
  std::ifstream f(dot);
  std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  CHECK(text.find("graph") != std::string::npos);
  CHECK(text.find("style=dashed") != std::string::npos);  // H-edges

  // with a witness: fill colors appear
  std::string p = tmp.path("p10.json");
  REQUIRE(run({"gen-space", "--kind", "path", "--n", "10", "--out", p}) == cgw::cli::kOk);
  std::string w = tmp.path("w.json");
  REQUIRE(run({"search", "--space", p, "--r", "3", "--D", "4", "--out", w}) == cgw::cli::kOk);
  std::string dot2 = tmp.path("p10.dot");
  REQUIRE(run({"export-dot", "--space", p, "--witness", w, "--out", dot2}) == cgw::cli::kOk);
  std::ifstream f2(dot2);
  std::string text2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(text2.find("fillcolor") != std::string::npos);
}

TEST_CASE("JSON round-trip identity for witnesses and chains") {
  // serialized families live in a single ambient space
  for (unsigned seed = 1; seed <= 10; ++seed) {
    FamilyWitness fw = cgw::testing::random_family_witness(seed);
    fw.source.members.resize(1);
    fw.per_member.resize(1);
    json j = family_witness_to_json(fw);
    CHECK(family_witness_to_json(family_witness_from_json(j)) == j);

    DecompositionChain c = chain_from_kfold(fw);
    json jc = chain_to_json(c);
    CHECK(chain_to_json(chain_from_json(jc)) == jc);
  }
}
