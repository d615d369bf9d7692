#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "combexplain/corpus.hpp"
#include "combexplain/graph.hpp"

namespace combexplain {

enum class VarKind { kNode, kEdge };

// Node variables carry first = node index; edge variables carry first < second.
struct VarInfo {
  VarKind kind;
  std::size_t first;
  std::size_t second;
};

enum class Relation { kLessEqual, kEqual };

struct Constraint {
  std::vector<std::pair<std::size_t, double>> terms;  // (variable, coefficient)
  Relation relation = Relation::kLessEqual;
  double bound = 0.0;
};

// Binary program min c·y subject to the constraint rows, y ∈ {0,1}^n.
// Variables [0, num_nodes) are node indicators; the rest are edges.
struct IlpInstance {
  std::size_t num_nodes = 0;
  std::vector<double> cost;
  std::vector<VarInfo> vars;
  std::vector<Constraint> constraints;

  std::size_t num_vars() const { return vars.size(); }
};

struct IlpSolution {
  std::vector<std::uint8_t> assignment;
  double objective = 0.0;

  bool operator==(const IlpSolution&) const = default;
};

// Variable index of the edge between nodes j != k in a complete graph built by
// build_subgraph_ilp.
std::size_t edge_var_index(std::size_t num_nodes, std::size_t j, std::size_t k);

// Node 0 is the hypothesis and must be selected; edge variables link to their
// endpoints (edge = AND of nodes); at most `max_abstract` abstract nodes.
// Edge (j,k) costs -W(j,k); node variables cost 0.
IlpInstance build_subgraph_ilp(const WeightMatrix& weights, std::size_t max_abstract);

// Throws ValidationError if var metadata, costs or constraint indices are invalid.
void validate(const IlpInstance& inst);

double objective_value(const IlpInstance& inst, std::span<const std::uint8_t> assignment);
bool is_feasible(const IlpInstance& inst, std::span<const std::uint8_t> assignment);

// Two objectives closer than this are treated as tied.
double tie_tolerance(const IlpInstance& inst);

// Exact branch-and-bound over node variables, edges implied by their
// endpoints. Among optima (within tie_tolerance) returns the assignment whose
// node vector is lexicographically smallest. Throws ValidationError when no
// feasible assignment exists.
IlpSolution solve_exact(const IlpInstance& inst);

// Exhaustive enumeration of node subsets with the same tie rule. Refuses
// (std::invalid_argument) instances with more than kMaxBruteForceNodes nodes.
inline constexpr std::size_t kMaxBruteForceNodes = 20;
IlpSolution solve_bruteforce(const IlpInstance& inst);

struct SelectedSubgraph {
  std::vector<std::string> fact_ids;  // ascending
  double weight = 0.0;                // total weight of selected edges
};

// facts[j] is node j + 1. Throws std::logic_error on an infeasible assignment.
SelectedSubgraph decode_solution(const IlpInstance& inst, const IlpSolution& sol,
                                 std::span<const Fact* const> facts);

// CPLEX-LP-style text dump for cross-checking with external solvers.
void write_lp(std::ostream& out, const IlpInstance& inst);

}  // namespace combexplain
