#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "combexplain/graph.hpp"
#include "combexplain/ilp.hpp"

namespace combexplain {

using SolverFn = std::function<IlpSolution(const IlpInstance&)>;

// Interpolation strength; strictly positive.
class LambdaParam {
 public:
  // Throws std::invalid_argument unless value > 0 and finite.
  explicit LambdaParam(double value);
  double value() const { return value_; }

 private:
  double value_;
};

inline constexpr double kDefaultLambda = 152.0;

// State saved by the forward pass: the instance (constraints are reused by
// the backward solve), its cost c = -W over variables, and the optimum ŷ.
struct DbcsContext {
  std::shared_ptr<const IlpInstance> instance;
  std::vector<double> cost;
  std::vector<std::uint8_t> solution;

  // W over variables: -cost.
  double weight(std::size_t var) const { return -cost[var]; }
};

struct DbcsForward {
  IlpSolution solution;
  DbcsContext context;
};

// Builds the subgraph ILP from `weights`, solves it and saves the context.
DbcsForward dbcs_forward(const WeightMatrix& weights, std::size_t max_abstract,
                         const SolverFn& solver = solve_exact);

// Perturbs W' = W + λ·dL/dy, re-solves under the same constraints to get y_λ
// and returns dL/dW = -(ŷ - y_λ)/λ per variable. Always performs exactly one
// solver call. Throws std::invalid_argument when dL/dy has the wrong length
// or a non-finite entry.
std::vector<double> dbcs_backward(const DbcsContext& ctx, std::span<const double> dl_dy,
                                  LambdaParam lambda, const SolverFn& solver = solve_exact);

// The perturbed solution y_λ used by dbcs_backward.
std::vector<std::uint8_t> dbcs_perturbed_solution(const DbcsContext& ctx,
                                                  std::span<const double> dl_dy,
                                                  LambdaParam lambda,
                                                  const SolverFn& solver = solve_exact);

}  // namespace combexplain
