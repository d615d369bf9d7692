#include "combexplain/ilp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "combexplain/errors.hpp"
#include "combexplain/io.hpp"

namespace combexplain {

std::size_t edge_var_index(std::size_t n, std::size_t j, std::size_t k) {
  if (j > k) std::swap(j, k);
  if (j == k || k >= n) throw std::out_of_range("edge_var_index: invalid pair");
  // Edges enumerated row by row: (0,1)..(0,n-1), (1,2)..
  const std::size_t before = j * (2 * n - j - 1) / 2;
  return n + before + (k - j - 1);
}

IlpInstance build_subgraph_ilp(const WeightMatrix& weights, std::size_t max_abstract) {
  const std::size_t n = weights.size();
  IlpInstance inst;
  inst.num_nodes = n;
  for (std::size_t j = 0; j < n; ++j) {
    inst.vars.push_back({VarKind::kNode, j, j});
    inst.cost.push_back(0.0);
  }
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = j + 1; k < n; ++k) {
      inst.vars.push_back({VarKind::kEdge, j, k});
      inst.cost.push_back(-weights(j, k));
    }
  }
  if (n > 0) inst.constraints.push_back({{{0, 1.0}}, Relation::kEqual, 1.0});
  for (std::size_t e = n; e < inst.num_vars(); ++e) {
    const auto [kind, j, k] = inst.vars[e];
    inst.constraints.push_back({{{e, 1.0}, {j, -1.0}}, Relation::kLessEqual, 0.0});
    inst.constraints.push_back({{{e, 1.0}, {k, -1.0}}, Relation::kLessEqual, 0.0});
    inst.constraints.push_back({{{e, -1.0}, {j, 1.0}, {k, 1.0}}, Relation::kLessEqual, 1.0});
  }
  Constraint cap{{}, Relation::kLessEqual, static_cast<double>(max_abstract)};
  for (std::size_t j = 0; j < n; ++j) {
    if (weights.kinds[j] == NodeKind::kAbstract) cap.terms.push_back({j, 1.0});
  }
  inst.constraints.push_back(std::move(cap));
  return inst;
}

void validate(const IlpInstance& inst) {
  if (inst.cost.size() != inst.vars.size()) {
    throw ValidationError("ILP: cost vector and variable metadata differ in length");
  }
  if (inst.num_nodes > inst.vars.size()) throw ValidationError("ILP: num_nodes > num_vars");
  for (std::size_t i = 0; i < inst.vars.size(); ++i) {
    const auto& v = inst.vars[i];
    const bool is_node = i < inst.num_nodes;
    if (is_node != (v.kind == VarKind::kNode)) {
      throw ValidationError("ILP: node variables must precede edge variables");
    }
    if (is_node && v.first != i) throw ValidationError("ILP: node variable index mismatch");
    if (!is_node && !(v.first < v.second && v.second < inst.num_nodes)) {
      throw ValidationError("ILP: edge variable " + std::to_string(i) + " has invalid endpoints");
    }
    if (!std::isfinite(inst.cost[i])) throw ValidationError("ILP: non-finite cost");
  }
  for (const auto& c : inst.constraints) {
    for (const auto& [var, coef] : c.terms) {
      if (var >= inst.vars.size() || !std::isfinite(coef)) {
        throw ValidationError("ILP: constraint references an invalid variable");
      }
    }
  }
}

double objective_value(const IlpInstance& inst, std::span<const std::uint8_t> y) {
  double total = 0.0;
  for (std::size_t i = 0; i < inst.cost.size(); ++i) {
    if (y[i]) total += inst.cost[i];
  }
  return total;
}

namespace {

constexpr double kFeasibilityTolerance = 1e-9;

bool row_satisfied(const Constraint& c, std::span<const std::uint8_t> y) {
  double lhs = 0.0;
  for (const auto& [var, coef] : c.terms) {
    if (y[var]) lhs += coef;
  }
  if (c.relation == Relation::kEqual) return std::abs(lhs - c.bound) <= kFeasibilityTolerance;
  return lhs <= c.bound + kFeasibilityTolerance;
}

}  // namespace

bool is_feasible(const IlpInstance& inst, std::span<const std::uint8_t> y) {
  if (y.size() != inst.num_vars()) return false;
  return std::all_of(inst.constraints.begin(), inst.constraints.end(),
                     [&](const Constraint& c) { return row_satisfied(c, y); });
}

double tie_tolerance(const IlpInstance& inst) {
  double scale = 1.0;
  for (double c : inst.cost) scale += std::abs(c);
  return 1e-9 * scale;
}

namespace {

// Fills edge variables as the AND of their endpoints.
void imply_edges(const IlpInstance& inst, std::vector<std::uint8_t>& y) {
  for (std::size_t e = inst.num_nodes; e < inst.num_vars(); ++e) {
    y[e] = y[inst.vars[e].first] && y[inst.vars[e].second];
  }
}

// Node-level view of an instance used by the branch-and-bound search.
class NodeSearch {
 public:
  explicit NodeSearch(const IlpInstance& inst) : inst_(inst), n_(inst.num_nodes) {
    node_cost_.assign(n_, 0.0);
    pair_cost_.assign(n_ * n_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) node_cost_[j] = inst.cost[j];
    for (std::size_t e = n_; e < inst.num_vars(); ++e) {
      const auto& v = inst.vars[e];
      pair_cost_[v.first * n_ + v.second] += inst.cost[e];
      pair_cost_[v.second * n_ + v.first] += inst.cost[e];
    }
    fixed_.assign(n_, -1);
    group_of_.assign(n_, -1);
    rows_of_node_.resize(n_);
    for (std::size_t r = 0; r < inst.constraints.size(); ++r) {
      const auto& c = inst.constraints[r];
      const bool nodes_only = std::all_of(c.terms.begin(), c.terms.end(),
                                          [&](const auto& t) { return t.first < n_; });
      if (!nodes_only) continue;
      if (c.relation == Relation::kEqual && c.terms.size() == 1) {
        const auto [var, coef] = c.terms.front();
        const double value = coef != 0.0 ? c.bound / coef : std::nan("");
        int v = -2;
        if (std::abs(value) <= kFeasibilityTolerance) v = 0;
        if (std::abs(value - 1.0) <= kFeasibilityTolerance) v = 1;
        if (v < 0 || (fixed_[var] >= 0 && fixed_[var] != v)) infeasible_ = true;
        fixed_[var] = static_cast<std::int8_t>(std::max(v, 0));
        continue;
      }
      const bool monotone =
          c.relation == Relation::kLessEqual &&
          std::all_of(c.terms.begin(), c.terms.end(), [](const auto& t) { return t.second >= 0.0; });
      if (!monotone) continue;
      const std::size_t row = monotone_rows_.size();
      monotone_rows_.push_back(&c);
      const bool unit = std::all_of(c.terms.begin(), c.terms.end(),
                                    [](const auto& t) { return t.second == 1.0; });
      for (const auto& [var, coef] : c.terms) {
        if (coef > 0.0) rows_of_node_[var].push_back({row, coef});
        if (unit && group_of_[var] < 0) group_of_[var] = static_cast<int>(row);
      }
    }
    row_used_.assign(monotone_rows_.size(), 0.0);
    tolerance_ = tie_tolerance(inst);
    slack_ = 1e-3 * tolerance_;
  }

  bool trivially_infeasible() const { return infeasible_; }

  // Minimum objective over feasible assignments (+inf if none).
  double find_optimum() {
    reset();
    // Heuristic order: most promising nodes first, preferred value first.
    std::vector<double> gain(n_);
    for (std::size_t u = 0; u < n_; ++u) gain[u] = node_gain(u);
    order_.resize(n_);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::stable_sort(order_.begin(), order_.end(),
                     [&](std::size_t a, std::size_t b) { return gain[a] > gain[b]; });
    prefer_one_.assign(n_, 0);
    for (std::size_t u = 0; u < n_; ++u) prefer_one_[u] = gain[u] > 0.0;
    best_ = std::numeric_limits<double>::infinity();
    mode_ = Mode::kOptimize;
    search(0);
    return best_;
  }

  // Lexicographically smallest feasible node vector with objective <= threshold.
  bool find_first_within(double threshold, std::vector<std::uint8_t>& out) {
    reset();
    order_.resize(n_);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    prefer_one_.assign(n_, 0);
    threshold_ = threshold;
    mode_ = Mode::kFirstWithin;
    found_ = false;
    search(0);
    if (found_) out = found_assignment_;
    return found_;
  }

  double tolerance() const { return tolerance_; }

 private:
  enum class Mode { kOptimize, kFirstWithin };

  double pair(std::size_t a, std::size_t b) const { return pair_cost_[a * n_ + b]; }

  void reset() {
    value_.assign(n_, -1);
    current_ = 0.0;
    link_.assign(n_, 0.0);
    positive_pairs_.assign(n_, 0.0);
    for (std::size_t u = 0; u < n_; ++u) {
      for (std::size_t v = 0; v < n_; ++v) {
        if (u != v) positive_pairs_[u] += std::max(0.0, -pair(u, v));
      }
    }
    std::fill(row_used_.begin(), row_used_.end(), 0.0);
  }

  // Upper estimate of the objective decrease from selecting unassigned u.
  double node_gain(std::size_t u) const {
    return -node_cost_[u] - link_[u] + 0.5 * positive_pairs_[u];
  }

  // Lower bound on the objective of any completion of the current assignment.
  double lower_bound() const {
    double total_gain = 0.0;
    grouped_.clear();
    for (std::size_t u = 0; u < n_; ++u) {
      if (value_[u] >= 0) continue;
      const double g = node_gain(u);
      if (g <= 0.0) continue;
      if (group_of_[u] >= 0) {
        grouped_.push_back({group_of_[u], g});
      } else {
        total_gain += g;
      }
    }
    if (!grouped_.empty()) {
      std::sort(grouped_.begin(), grouped_.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first < b.first : a.second > b.second;
      });
      std::size_t i = 0;
      while (i < grouped_.size()) {
        const int row = grouped_[i].first;
        const double capacity =
            std::floor(monotone_rows_[row]->bound - row_used_[row] + kFeasibilityTolerance);
        double taken = 0.0;
        for (; i < grouped_.size() && grouped_[i].first == row; ++i) {
          if (taken < capacity) {
            total_gain += grouped_[i].second;
            taken += 1.0;
          }
        }
      }
    }
    return current_ - total_gain;
  }

  bool rows_violated() const {
    for (std::size_t r = 0; r < monotone_rows_.size(); ++r) {
      if (row_used_[r] > monotone_rows_[r]->bound + kFeasibilityTolerance) return true;
    }
    return false;
  }

  void assign(std::size_t u, int v) {
    value_[u] = static_cast<std::int8_t>(v);
    if (v == 1) {
      current_ += node_cost_[u] + link_[u];
      for (const auto& [row, coef] : rows_of_node_[u]) row_used_[row] += coef;
    }
    for (std::size_t w = 0; w < n_; ++w) {
      if (w == u || value_[w] >= 0) continue;
      positive_pairs_[w] -= std::max(0.0, -pair(u, w));
      if (v == 1) link_[w] += pair(u, w);
    }
  }

  void unassign(std::size_t u) {
    const int v = value_[u];
    for (std::size_t w = 0; w < n_; ++w) {
      if (w == u || value_[w] >= 0) continue;
      positive_pairs_[w] += std::max(0.0, -pair(u, w));
      if (v == 1) link_[w] -= pair(u, w);
    }
    if (v == 1) {
      current_ -= node_cost_[u] + link_[u];
      for (const auto& [row, coef] : rows_of_node_[u]) row_used_[row] -= coef;
    }
    value_[u] = -1;
  }

  bool prune() const {
    if (rows_violated()) return true;
    const double lb = lower_bound();
    if (mode_ == Mode::kOptimize) return lb >= best_ - slack_;
    return lb > threshold_ + slack_;
  }

  // Returns true when the search should stop.
  bool leaf() {
    std::vector<std::uint8_t>& y = scratch_;
    y.assign(inst_.num_vars(), 0);
    for (std::size_t u = 0; u < n_; ++u) y[u] = static_cast<std::uint8_t>(value_[u] == 1);
    imply_edges(inst_, y);
    if (!is_feasible(inst_, y)) return false;
    const double obj = objective_value(inst_, y);
    if (mode_ == Mode::kOptimize) {
      best_ = std::min(best_, obj);
      return false;
    }
    if (obj <= threshold_) {
      found_ = true;
      found_assignment_ = y;
      return true;
    }
    return false;
  }

  bool search(std::size_t depth) {
    if (prune()) return false;
    if (depth == n_) return leaf();
    const std::size_t u = order_[depth];
    const int first = fixed_[u] >= 0 ? fixed_[u] : prefer_one_[u];
    for (int pass = 0; pass < 2; ++pass) {
      const int v = pass == 0 ? first : 1 - first;
      if (fixed_[u] >= 0 && v != fixed_[u]) continue;
      assign(u, v);
      const bool stop = search(depth + 1);
      unassign(u);
      if (stop) return true;
    }
    return false;
  }

  const IlpInstance& inst_;
  std::size_t n_;
  std::vector<double> node_cost_;
  std::vector<double> pair_cost_;
  std::vector<std::int8_t> fixed_;
  std::vector<int> group_of_;
  std::vector<const Constraint*> monotone_rows_;
  std::vector<std::vector<std::pair<std::size_t, double>>> rows_of_node_;
  bool infeasible_ = false;

  std::vector<std::size_t> order_;
  std::vector<std::uint8_t> prefer_one_;
  std::vector<std::int8_t> value_;
  std::vector<double> link_;
  std::vector<double> positive_pairs_;
  std::vector<double> row_used_;
  double current_ = 0.0;
  double tolerance_ = 0.0;
  double slack_ = 0.0;

  Mode mode_ = Mode::kOptimize;
  double best_ = 0.0;
  double threshold_ = 0.0;
  bool found_ = false;
  std::vector<std::uint8_t> found_assignment_;
  std::vector<std::uint8_t> scratch_;
  mutable std::vector<std::pair<int, double>> grouped_;
};

}  // namespace

IlpSolution solve_exact(const IlpInstance& inst) {
  validate(inst);
  NodeSearch search(inst);
  if (search.trivially_infeasible()) throw ValidationError("ILP: infeasible fixed variables");
  const double best = search.find_optimum();
  if (!std::isfinite(best)) throw ValidationError("ILP: no feasible assignment");
  IlpSolution sol;
  if (!search.find_first_within(best + search.tolerance(), sol.assignment)) {
    throw std::logic_error("ILP: optimum not recovered in lexicographic pass");
  }
  sol.objective = objective_value(inst, sol.assignment);
  return sol;
}

IlpSolution solve_bruteforce(const IlpInstance& inst) {
  validate(inst);
  const std::size_t n = inst.num_nodes;
  if (n > kMaxBruteForceNodes) {
    throw std::invalid_argument("solve_bruteforce: " + std::to_string(n) +
                                " nodes exceeds the limit of " +
                                std::to_string(kMaxBruteForceNodes));
  }
  // Masks enumerate node vectors in lexicographic order: node 0 is the most
  // significant bit.
  const std::uint64_t count = std::uint64_t{1} << n;
  std::vector<double> objectives(count, std::numeric_limits<double>::infinity());
  std::vector<std::uint8_t> y(inst.num_vars());
  auto fill = [&](std::uint64_t mask) {
    std::fill(y.begin(), y.end(), 0);
    for (std::size_t j = 0; j < n; ++j) y[j] = (mask >> (n - 1 - j)) & 1U;
    imply_edges(inst, y);
  };
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    fill(mask);
    if (!is_feasible(inst, y)) continue;
    objectives[mask] = objective_value(inst, y);
    best = std::min(best, objectives[mask]);
  }
  if (!std::isfinite(best)) throw ValidationError("ILP: no feasible assignment");
  const double threshold = best + tie_tolerance(inst);
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    if (objectives[mask] <= threshold) {
      fill(mask);
      return {y, objectives[mask]};
    }
  }
  throw std::logic_error("solve_bruteforce: unreachable");
}

SelectedSubgraph decode_solution(const IlpInstance& inst, const IlpSolution& sol,
                                 std::span<const Fact* const> facts) {
  if (sol.assignment.size() != inst.num_vars() || facts.size() + 1 != inst.num_nodes) {
    throw std::logic_error("decode_solution: shape mismatch");
  }
  if (!is_feasible(inst, sol.assignment)) {
    throw std::logic_error("decode_solution: infeasible assignment");
  }
  SelectedSubgraph out;
  for (std::size_t j = 1; j < inst.num_nodes; ++j) {
    if (sol.assignment[j]) out.fact_ids.push_back(facts[j - 1]->id);
  }
  std::sort(out.fact_ids.begin(), out.fact_ids.end());
  out.weight = -objective_value(inst, sol.assignment);
  return out;
}

namespace {

std::string var_name(const IlpInstance& inst, std::size_t i) {
  const auto& v = inst.vars[i];
  if (v.kind == VarKind::kNode) return "y_" + std::to_string(v.first) + "_" + std::to_string(v.first);
  return "y_" + std::to_string(v.first) + "_" + std::to_string(v.second);
}

void write_term(std::ostream& out, double coef, const std::string& name, bool first) {
  if (coef < 0) {
    out << (first ? "- " : " - ");
  } else if (!first) {
    out << " + ";
  }
  out << format_double(std::abs(coef)) << ' ' << name;
}

}  // namespace

void write_lp(std::ostream& out, const IlpInstance& inst) {
  out << "Minimize\n obj:";
  bool any = false;
  for (std::size_t i = 0; i < inst.num_vars(); ++i) {
    if (inst.cost[i] == 0.0) continue;
    out << ' ';
    write_term(out, inst.cost[i], var_name(inst, i), !any);
    any = true;
  }
  if (!any) out << " 0 " << var_name(inst, 0);
  out << "\nSubject To\n";
  for (std::size_t r = 0; r < inst.constraints.size(); ++r) {
    const auto& c = inst.constraints[r];
    out << " c" << r << ':';
    if (c.terms.empty()) out << " 0 " << var_name(inst, 0);
    for (std::size_t t = 0; t < c.terms.size(); ++t) {
      out << ' ';
      write_term(out, c.terms[t].second, var_name(inst, c.terms[t].first), t == 0);
    }
    out << (c.relation == Relation::kEqual ? " = " : " <= ") << format_double(c.bound) << '\n';
  }
  out << "Binary\n";
  for (std::size_t i = 0; i < inst.num_vars(); ++i) out << ' ' << var_name(inst, i) << '\n';
  out << "End\n";
}

}  // namespace combexplain
