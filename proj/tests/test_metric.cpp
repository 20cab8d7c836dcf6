#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "cgw/metric.hpp"
#include "helpers.hpp"

using namespace cgw;

TEST_CASE("build_space: degenerate single point") {
  auto s = FiniteMetricSpace::build("pt", {"a"}, {});
  CHECK(s->size() == 1);
  CHECK(s->diameter() == 0);
}

TEST_CASE("build_space: triangle inequality violation names the triple") {
  std::vector<std::tuple<std::string, std::string, Dist>> d = {{"a", "b", 1}, {"b", "c", 1}, {"a", "c", 3}};
  CHECK_THROWS_WITH_AS(FiniteMetricSpace::build("bad", {"a", "b", "c"}, d), doctest::Contains("triangle"), Error);
  try {
    FiniteMetricSpace::build("bad", {"a", "b", "c"}, d);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MetricAxiomViolation);
  }
}

TEST_CASE("build_space: P10 distances give diameter 9") {
  std::vector<std::tuple<std::string, std::string, Dist>> d;
  std::vector<std::string> pts;
  for (int i = 0; i < 10; ++i) pts.push_back("p" + std::to_string(i));
  for (int i = 0; i < 10; ++i)
    for (int j = i + 1; j < 10; ++j) d.emplace_back(pts[i], pts[j], j - i);
  auto s = FiniteMetricSpace::build("p10", pts, d);
  CHECK(s->diameter() == 9);
}

TEST_CASE("graph_metric: 3-cycle, grid corner, disconnected") {
  auto c3 = cli::make_cycle(3);
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) CHECK(c3->dist(i, j) == 1);

  auto grid = cli::make_grid(3, 3);
  CHECK(grid->dist(grid->index("0,0"), grid->index("2,2")) == 4);

  CHECK_THROWS_AS(FiniteMetricSpace::from_graph("dis", {"a", "b", "c", "d"}, {{"a", "b"}, {"c", "d"}}), Error);
  try {
    FiniteMetricSpace::from_graph("dis", {"a", "b", "c", "d"}, {{"a", "b"}, {"c", "d"}});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DisconnectedGraph);
  }
}

TEST_CASE("set_distance examples and errors") {
  auto p10 = cli::make_path(10);
  Subspace a = Subspace::of_points(p10, {"p0", "p1", "p2"});
  Subspace b = Subspace::of_points(p10, {"p7", "p8", "p9"});
  CHECK(set_distance(a, b) == 5);
  Subspace single = Subspace::of_points(p10, {"p4"});
  CHECK(set_distance(single, single) == 0);
  CHECK(set_distance(Subspace::of_points(p10, {"p0"}), Subspace::of_points(p10, {"p5"})) == 5);

  Subspace empty(p10, {});
  CHECK_THROWS_AS(set_distance(a, empty), Error);
  auto other = cli::make_path(4);
  CHECK_THROWS_AS(set_distance(a, Subspace::whole(other)), Error);
}

TEST_CASE("r_components examples") {
  auto p10 = cli::make_path(10);
  CHECK(r_components(Subspace::whole(p10), 1).size() == 1);

  Subspace s = Subspace::of_points(p10, {"p0", "p1", "p2", "p7", "p8", "p9"});
  auto classes = r_components(s, 3);
  REQUIRE(classes.size() == 2);
  CHECK(classes[0] == std::vector<int>{0, 1, 2});
  CHECK(classes[1] == std::vector<int>{7, 8, 9});

  CHECK(r_components(s, 0).size() == 6);
}

TEST_CASE("r_components: classes pairwise > r apart, close pairs share a class, coarsening") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 25; ++trial) {
    auto space = testing::random_space(100 + trial);
    Subspace whole = Subspace::whole(space);
    for (Dist r = 0; r <= 3; ++r) {
      auto classes = r_components(whole, r);
      for (size_t i = 0; i < classes.size(); ++i)
        for (size_t j = i + 1; j < classes.size(); ++j)
          CHECK(set_distance(Subspace(space, classes[i]), Subspace(space, classes[j])) > r);
      std::vector<int> cls(space->size());
      for (size_t c = 0; c < classes.size(); ++c)
        for (int p : classes[c]) cls[p] = static_cast<int>(c);
      for (int i = 0; i < space->size(); ++i)
        for (int j = 0; j < space->size(); ++j)
          if (space->dist(i, j) <= r) CHECK(cls[i] == cls[j]);
      // coarsening: every r-class sits inside one (r+1)-class
      auto coarser = r_components(whole, r + 1);
      std::vector<int> cc(space->size());
      for (size_t c = 0; c < coarser.size(); ++c)
        for (int p : coarser[c]) cc[p] = static_cast<int>(c);
      for (const auto& cl : classes)
        for (int p : cl) CHECK(cc[p] == cc[cl.front()]);
    }
  }
}

TEST_CASE("metric axioms hold on random graph spaces") {
  for (int trial = 0; trial < 20; ++trial) {
    auto space = testing::random_space(500 + trial);
    CHECK_NOTHROW(space->validate());
  }
}

TEST_CASE("induced subspace distances equal ambient distances") {
  auto grid = cli::make_grid(4, 4);
  Subspace s = Subspace::of_points(grid, {"0,0", "1,2", "3,3", "2,0"});
  for (int i = 0; i < s.size(); ++i)
    for (int j = 0; j < s.size(); ++j) CHECK(s.dist(i, j) == grid->dist(s.pts[i], s.pts[j]));
}

TEST_CASE("modulus tables: step evaluation, rightward extension") {
  ModulusTable t;
  t.entries = {{0, 0}, {2, 3}, {5, 10}};
  t.check();
  CHECK(t.eval(0) == 0);
  CHECK(t.eval(1) == 0);
  CHECK(t.eval(2) == 3);
  CHECK(t.eval(4) == 3);
  CHECK(t.eval(5) == 10);
  CHECK(t.eval(100) == 10);
}

TEST_CASE("check_coarse_map: identity with identity modulus is a contraction") {
  auto p10 = cli::make_path(10);
  CoarseMapWitness w;
  w.source = p10;
  w.target = p10;
  w.map.resize(10);
  for (int i = 0; i < 10; ++i) w.map[i] = i;
  w.rho_plus = ModulusTable::identity_up_to(9);
  w.contractive = true;
  auto rep = check_coarse_map(w);
  CHECK(rep.valid);
  CHECK(rep.is_contraction);
  CHECK(rep.violations.empty());
}

TEST_CASE("check_coarse_map: doubling map expands but stays within rho(t)=2t") {
  auto src = cli::make_path(6);
  auto dst = cli::make_path(11);
  CoarseMapWitness w;
  w.source = src;
  w.target = dst;
  for (int i = 0; i < 6; ++i) w.map.push_back(2 * i);
  w.rho_plus = ModulusTable::linear(2, 5);
  w.contractive = false;
  auto rep = check_coarse_map(w);
  CHECK(rep.valid);
  CHECK(!rep.is_contraction);

  w.contractive = true;
  auto rep2 = check_coarse_map(w);
  CHECK(!rep2.valid);
  REQUIRE(!rep2.violations.empty());
  CHECK(rep2.violations.front().find("p0") != std::string::npos);
  CHECK(rep2.violations.front().find("p1") != std::string::npos);
}
