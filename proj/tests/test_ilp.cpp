#include "doctest.h"

#include <random>
#include <sstream>
#include <stdexcept>

#include "combexplain/errors.hpp"
#include "combexplain/ilp.hpp"
#include "support.hpp"

using namespace combexplain;

namespace {

WeightMatrix weights(std::vector<NodeKind> kinds, std::vector<std::vector<double>> rows) {
  WeightMatrix w;
  w.kinds = std::move(kinds);
  for (std::size_t i = 0; i < w.kinds.size(); ++i) w.ids.push_back(i == 0 ? "h" : "f" + std::to_string(i));
  w.entries = Matrix(w.kinds.size(), w.kinds.size(), 0.0);
  for (std::size_t j = 0; j < rows.size(); ++j)
    for (std::size_t k = 0; k < rows[j].size(); ++k) w.entries(j, k) = rows[j][k];
  return w;
}

std::size_t abstract_selected(const IlpInstance& inst, const IlpSolution& s, const WeightMatrix& w) {
  std::size_t n = 0;
  for (std::size_t j = 0; j < inst.num_nodes; ++j) n += s.assignment[j] && w.kinds[j] == NodeKind::kAbstract;
  return n;
}

}  // namespace

TEST_CASE("hypothesis with two facts has 3 node vars, 3 edge vars and 11 rows") {
  const auto w = weights({NodeKind::kHypothesis, NodeKind::kAbstract, NodeKind::kGrounding},
                         {{0, .5, .2}, {.5, 0, .1}, {.2, .1, 0}});
  const auto inst = build_subgraph_ilp(w, 2);
  CHECK(inst.num_nodes == 3);
  CHECK(inst.num_vars() == 6);
  CHECK(inst.constraints.size() == 11);
  CHECK(inst.cost[edge_var_index(3, 0, 1)] == -0.5);
  CHECK(inst.cost[0] == 0.0);
  CHECK_NOTHROW(validate(inst));
}

TEST_CASE("single node graph") {
  const auto w = weights({NodeKind::kHypothesis}, {{0}});
  const auto inst = build_subgraph_ilp(w, 2);
  CHECK(inst.num_vars() == 1);
  const auto s = solve_exact(inst);
  CHECK(s.assignment == std::vector<std::uint8_t>{1});
  CHECK(s.objective == 0.0);
}

TEST_CASE("one positive abstract fact is selected") {
  const auto w = weights({NodeKind::kHypothesis, NodeKind::kAbstract}, {{0, .7}, {.7, 0}});
  const auto s = solve_exact(build_subgraph_ilp(w, 1));
  CHECK(s.assignment == std::vector<std::uint8_t>{1, 1, 1});
  CHECK(s.objective == doctest::Approx(-0.7));
}

TEST_CASE("M = 0 forbids abstract facts") {
  const auto w = weights({NodeKind::kHypothesis, NodeKind::kAbstract, NodeKind::kGrounding},
                         {{0, .9, .1}, {.9, 0, .5}, {.1, .5, 0}});
  const auto inst = build_subgraph_ilp(w, 0);
  const auto s = solve_exact(inst);
  CHECK(s.assignment[1] == 0);
  CHECK(s.assignment[2] == 1);
  std::vector<std::uint8_t> with_abstract = {1, 1, 0, 1, 0, 0};
  CHECK_FALSE(is_feasible(inst, with_abstract));
}

TEST_CASE("negative hypothesis edges select nothing") {
  const auto w = weights({NodeKind::kHypothesis, NodeKind::kGrounding, NodeKind::kGrounding},
                         {{0, -.3, -.1}, {-.3, 0, -.2}, {-.1, -.2, 0}});
  const auto s = solve_exact(build_subgraph_ilp(w, 2));
  CHECK(s.assignment == std::vector<std::uint8_t>{1, 0, 0, 0, 0, 0});
  CHECK(s.objective == 0.0);
}

TEST_CASE("three abstract facts with M = 2 match enumeration") {
  const auto w = weights({NodeKind::kHypothesis, NodeKind::kAbstract, NodeKind::kAbstract, NodeKind::kAbstract},
                         {{0, .6, .5, .4}, {.6, 0, -.05, -.3}, {.5, -.05, 0, -.1}, {.4, -.3, -.1, 0}});
  const auto inst = build_subgraph_ilp(w, 2);
  const auto s = solve_exact(inst);
  CHECK(s == solve_bruteforce(inst));
  CHECK(-s.objective == doctest::Approx(testing::best_subgraph_weight(w, 2)));
  CHECK(s.assignment[1] == 1);
  CHECK(s.assignment[2] == 1);
  CHECK(s.assignment[3] == 0);
}

TEST_CASE("abstract cap binds when the unconstrained optimum takes three") {
  const auto w = weights({NodeKind::kHypothesis, NodeKind::kAbstract, NodeKind::kAbstract, NodeKind::kAbstract},
                         {{0, .6, .5, .4}, {.6, 0, 0, 0}, {.5, 0, 0, 0}, {.4, 0, 0, 0}});
  CHECK(solve_bruteforce(build_subgraph_ilp(w, 3)).objective == doctest::Approx(-1.5));
  const auto capped = solve_bruteforce(build_subgraph_ilp(w, 2));
  CHECK(capped.objective == doctest::Approx(-1.1));
  CHECK(capped.assignment[3] == 0);
}

TEST_CASE("ties resolve to the lexicographically smallest node assignment") {
  // f1 and f2 are interchangeable; M = 1 allows one of them.
  const auto w = weights({NodeKind::kHypothesis, NodeKind::kAbstract, NodeKind::kAbstract},
                         {{0, .5, .5}, {.5, 0, 0}, {.5, 0, 0}});
  const auto inst = build_subgraph_ilp(w, 1);
  const auto s = solve_exact(inst);
  CHECK(s.assignment[1] == 0);
  CHECK(s.assignment[2] == 1);
  CHECK(s == solve_bruteforce(inst));
}

TEST_CASE("zero-weight facts are left out and do not change the objective") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const auto w = testing::random_weights(rng, 6);
    WeightMatrix bigger = w;
    bigger.kinds.push_back(NodeKind::kGrounding);
    bigger.ids.push_back("zero");
    bigger.entries = Matrix(7, 7, 0.0);
    for (std::size_t j = 0; j < 6; ++j)
      for (std::size_t k = 0; k < 6; ++k) bigger.entries(j, k) = w(j, k);
    const auto a = solve_exact(build_subgraph_ilp(w, 2));
    const auto b = solve_exact(build_subgraph_ilp(bigger, 2));
    CHECK(a.objective == b.objective);
    CHECK(b.assignment[6] == 0);
  }
}

TEST_CASE("exact solver agrees with brute force and direct enumeration") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::size_t> nodes(1, 10), cap(0, 3);
  for (int trial = 0; trial < 300; ++trial) {
    const auto w = testing::random_weights(rng, nodes(rng), trial % 3 == 0);
    const std::size_t m = cap(rng);
    const auto inst = build_subgraph_ilp(w, m);
    const auto exact = solve_exact(inst);
    const auto brute = solve_bruteforce(inst);
    REQUIRE(exact == brute);
    CHECK(is_feasible(inst, exact.assignment));
    CHECK(abstract_selected(inst, exact, w) <= m);
    CHECK(exact.objective == doctest::Approx(objective_value(inst, exact.assignment)).epsilon(1e-12));
    CHECK(-exact.objective == doctest::Approx(testing::best_subgraph_weight(w, m)).epsilon(1e-12));
    for (std::size_t e = inst.num_nodes; e < inst.num_vars(); ++e) {
      CHECK(exact.assignment[e] == (exact.assignment[inst.vars[e].first] & exact.assignment[inst.vars[e].second]));
    }
    CHECK(exact == solve_exact(inst));
  }
}

TEST_CASE("brute force refuses large instances") {
  std::mt19937_64 rng(1);
  const auto w = testing::random_weights(rng, kMaxBruteForceNodes + 1);
  CHECK_THROWS_AS(solve_bruteforce(build_subgraph_ilp(w, 2)), std::invalid_argument);
}

TEST_CASE("decode_solution") {
  const auto w = weights({NodeKind::kHypothesis, NodeKind::kAbstract, NodeKind::kGrounding, NodeKind::kGrounding},
                         {{0, .3, .2, .1}, {.3, 0, .4, 0}, {.2, .4, 0, -.5}, {.1, 0, -.5, 0}});
  const Fact f1{"f2", "", FactKind::kAbstract, {}}, f2{"f5", "", FactKind::kGrounding, {}},
      f3{"f9", "", FactKind::kGrounding, {}};
  const Fact* facts[] = {&f1, &f2, &f3};
  const auto inst = build_subgraph_ilp(w, 2);

  IlpSolution only_h{std::vector<std::uint8_t>(inst.num_vars(), 0), 0.0};
  only_h.assignment[0] = 1;
  const auto empty = decode_solution(inst, only_h, facts);
  CHECK(empty.fact_ids.empty());
  CHECK(empty.weight == 0.0);

  const auto s = solve_exact(inst);
  const auto sub = decode_solution(inst, s, facts);
  CHECK(sub.fact_ids == std::vector<std::string>{"f2", "f5"});
  CHECK(sub.weight == doctest::Approx(0.3 + 0.2 + 0.4));

  IlpSolution broken = s;
  broken.assignment[edge_var_index(4, 0, 1)] = 0;
  CHECK_THROWS_AS(decode_solution(inst, broken, facts), std::logic_error);
}

TEST_CASE("LP dump lists the objective and every row") {
  const auto w = weights({NodeKind::kHypothesis, NodeKind::kAbstract, NodeKind::kGrounding},
                         {{0, .5, .2}, {.5, 0, .1}, {.2, .1, 0}});
  std::ostringstream out;
  write_lp(out, build_subgraph_ilp(w, 2));
  const std::string lp = out.str();
  CHECK(lp.find("Minimize") != std::string::npos);
  CHECK(lp.find("Subject To") != std::string::npos);
  CHECK(lp.find("Binary") != std::string::npos);
  CHECK(lp.find("End") != std::string::npos);
  std::size_t rows = 0;
  for (std::size_t pos = 0; (pos = lp.find("\n c", pos)) != std::string::npos; ++pos) ++rows;
  CHECK(rows == 11);
}

TEST_CASE("validate rejects malformed instances") {
  const auto w = weights({NodeKind::kHypothesis, NodeKind::kAbstract}, {{0, .7}, {.7, 0}});
  auto inst = build_subgraph_ilp(w, 1);
  auto bad = inst;
  bad.cost[2] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(validate(bad), ValidationError);
  bad = inst;
  bad.vars[2].second = 7;
  CHECK_THROWS_AS(validate(bad), ValidationError);
  bad = inst;
  bad.constraints[0].terms.push_back({42, 1.0});
  CHECK_THROWS_AS(validate(bad), ValidationError);
}
