#include "combexplain/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace combexplain {

AdamW::AdamW(std::size_t size, AdamWOptions options)
    : options_(options), m_(size, 0.0), v_(size, 0.0) {}

void AdamW::step(std::span<double> params, std::span<const double> grads, double lr) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw std::invalid_argument("AdamW: parameter/gradient size mismatch");
  }
  ++steps_;
  const double t = static_cast<double>(steps_);
  const double bias1 = 1.0 - std::pow(options_.beta1, t);
  const double bias2 = 1.0 - std::pow(options_.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    params[i] *= 1.0 - lr * options_.weight_decay;
    m_[i] = options_.beta1 * m_[i] + (1.0 - options_.beta1) * grads[i];
    v_[i] = options_.beta2 * v_[i] + (1.0 - options_.beta2) * grads[i] * grads[i];
    const double m_hat = m_[i] / bias1;
    const double v_hat = v_[i] / bias2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + options_.epsilon);
  }
}

void AdamW::restore(std::size_t steps, std::vector<double> m, std::vector<double> v) {
  if (m.size() != m_.size() || v.size() != v_.size()) {
    throw std::invalid_argument("AdamW: restored moments have the wrong size");
  }
  steps_ = steps;
  m_ = std::move(m);
  v_ = std::move(v);
}

double clip_gradient_norm(std::span<const std::span<double>> groups, double max_norm) {
  double sq = 0.0;
  for (auto g : groups) {
    for (double x : g) sq += x * x;
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for (auto g : groups) {
      for (double& x : g) x *= scale;
    }
  }
  return norm;
}

}  // namespace combexplain
