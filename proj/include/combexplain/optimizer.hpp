#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace combexplain {

struct AdamWOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.0;
};

// Adam with decoupled weight decay over one flat parameter group.
class AdamW {
 public:
  AdamW() = default;
  AdamW(std::size_t size, AdamWOptions options);

  // One update with learning rate `lr`; advances the step counter.
  void step(std::span<double> params, std::span<const double> grads, double lr);

  std::size_t steps() const { return steps_; }
  const std::vector<double>& first_moment() const { return m_; }
  const std::vector<double>& second_moment() const { return v_; }
  const AdamWOptions& options() const { return options_; }

  // Restores state from a checkpoint; sizes must match.
  void restore(std::size_t steps, std::vector<double> m, std::vector<double> v);

 private:
  AdamWOptions options_;
  std::size_t steps_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

// Scales all gradient groups in place so their joint L2 norm is at most
// max_norm; returns the norm before clipping. max_norm <= 0 disables.
double clip_gradient_norm(std::span<const std::span<double>> groups, double max_norm);

}  // namespace combexplain
