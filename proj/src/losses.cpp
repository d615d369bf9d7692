#include "combexplain/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace combexplain {

std::vector<double> answer_probabilities(std::span<const double> scores, double temperature) {
  if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
  if (scores.empty()) return {};
  double top = -INFINITY;
  for (double s : scores) {
    if (!std::isfinite(s)) throw std::invalid_argument("non-finite answer score");
    top = std::max(top, s * temperature);
  }
  std::vector<double> p(scores.size());
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    p[i] = std::exp(scores[i] * temperature - top);
    total += p[i];
  }
  for (double& x : p) x /= total;
  return p;
}

double answer_loss(std::span<const double> probs, std::size_t gold) {
  return -std::log(std::max(probs[gold], 1e-12));
}

namespace {

void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) throw std::invalid_argument("explanation indicators differ in length");
}

double smoothed(std::uint8_t y) {
  return kExplanationSmoothing + (1.0 - 2.0 * kExplanationSmoothing) * (y ? 1.0 : 0.0);
}

}  // namespace

double explanation_loss(std::span<const std::uint8_t> selected,
                        std::span<const std::uint8_t> gold) {
  check_lengths(selected.size(), gold.size());
  if (selected.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t j = 0; j < selected.size(); ++j) {
    const double p = smoothed(selected[j]);
    total -= gold[j] ? std::log(p) : std::log1p(-p);
  }
  return total / static_cast<double>(selected.size());
}

std::vector<double> explanation_loss_gradient(std::span<const std::uint8_t> selected,
                                              std::span<const std::uint8_t> gold) {
  check_lengths(selected.size(), gold.size());
  std::vector<double> g(selected.size(), 0.0);
  const double n = static_cast<double>(selected.size());
  for (std::size_t j = 0; j < selected.size(); ++j) {
    const double p = smoothed(selected[j]);
    const double dl_dp = gold[j] ? -1.0 / p : 1.0 / (1.0 - p);
    g[j] = dl_dp * (1.0 - 2.0 * kExplanationSmoothing) / n;
  }
  return g;
}

double total_loss(double answer, double explanation, const LossWeights& weights,
                  bool explanations_available) {
  if (!explanations_available) return answer;
  return weights.answer * answer + weights.explanation * explanation;
}

}  // namespace combexplain
