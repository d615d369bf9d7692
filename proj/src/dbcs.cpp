#include "combexplain/dbcs.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace combexplain {

LambdaParam::LambdaParam(double value) : value_(value) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument("DBCS lambda must be positive, got " + std::to_string(value));
  }
}

DbcsForward dbcs_forward(const WeightMatrix& weights, std::size_t max_abstract,
                         const SolverFn& solver) {
  auto instance = std::make_shared<const IlpInstance>(build_subgraph_ilp(weights, max_abstract));
  IlpSolution sol = solver(*instance);
  DbcsContext ctx{instance, instance->cost, sol.assignment};
  return {std::move(sol), std::move(ctx)};
}

std::vector<std::uint8_t> dbcs_perturbed_solution(const DbcsContext& ctx,
                                                  std::span<const double> dl_dy,
                                                  LambdaParam lambda, const SolverFn& solver) {
  if (dl_dy.size() != ctx.cost.size()) {
    throw std::invalid_argument("dbcs_backward: dL/dy has " + std::to_string(dl_dy.size()) +
                                " entries, expected " + std::to_string(ctx.cost.size()));
  }
  IlpInstance perturbed = *ctx.instance;
  for (std::size_t i = 0; i < dl_dy.size(); ++i) {
    if (!std::isfinite(dl_dy[i])) throw std::invalid_argument("dbcs_backward: non-finite dL/dy");
    // c' = -(W + λ g) = c - λ g
    perturbed.cost[i] = ctx.cost[i] - lambda.value() * dl_dy[i];
  }
  return solver(perturbed).assignment;
}

std::vector<double> dbcs_backward(const DbcsContext& ctx, std::span<const double> dl_dy,
                                  LambdaParam lambda, const SolverFn& solver) {
  const auto y_lambda = dbcs_perturbed_solution(ctx, dl_dy, lambda, solver);
  std::vector<double> grad(ctx.solution.size(), 0.0);
  for (std::size_t i = 0; i < grad.size(); ++i) {
    const int diff = static_cast<int>(ctx.solution[i]) - static_cast<int>(y_lambda[i]);
    if (diff != 0) grad[i] = -static_cast<double>(diff) / lambda.value();
  }
  return grad;
}

}  // namespace combexplain
