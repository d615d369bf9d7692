#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace combexplain {

struct LossWeights {
  double answer = 0.99;
  double explanation = 0.72;
  double temperature = 8.77;
};

// softmax(scores · T), max-subtracted. Throws std::invalid_argument if T <= 0
// or a score is non-finite.
std::vector<double> answer_probabilities(std::span<const double> scores, double temperature);

// -log(probs[gold]) with the probability floored at 1e-12.
double answer_loss(std::span<const double> probs, std::size_t gold);

inline constexpr double kExplanationSmoothing = 1e-6;

// Mean binary cross-entropy of hard selections against gold indicators. Each
// selection y is mapped to ε + (1 - 2ε)·y before the log. Throws
// std::invalid_argument on a length mismatch.
double explanation_loss(std::span<const std::uint8_t> selected,
                        std::span<const std::uint8_t> gold);

// d explanation_loss / d y_j, treating each selection as a real number.
std::vector<double> explanation_loss_gradient(std::span<const std::uint8_t> selected,
                                              std::span<const std::uint8_t> gold);

// λ_ans·L_ans + λ_exp·L_exp when explanations are available, else L_ans.
double total_loss(double answer, double explanation, const LossWeights& weights,
                  bool explanations_available);

}  // namespace combexplain
