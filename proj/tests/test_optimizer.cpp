#include "doctest.h"

#include <cmath>

#include "combexplain/optimizer.hpp"

using namespace combexplain;

TEST_CASE("first AdamW step moves each parameter by lr against the gradient sign") {
  AdamW opt(3, {});
  std::vector<double> p{1.0, 2.0, 3.0};
  const std::vector<double> g{0.5, -2.0, 0.0};
  opt.step(p, g, 0.1);
  CHECK(p[0] == doctest::Approx(0.9).epsilon(1e-6));
  CHECK(p[1] == doctest::Approx(2.1).epsilon(1e-6));
  CHECK(p[2] == 3.0);
  CHECK(opt.steps() == 1);
}

TEST_CASE("AdamW matches a hand-rolled reference over several steps") {
  const AdamWOptions o{0.9, 0.999, 1e-8, 0.01};
  AdamW opt(1, o);
  std::vector<double> p{0.7};
  double ref = 0.7, m = 0, v = 0;
  const double lr = 0.05;
  for (int t = 1; t <= 10; ++t) {
    const double g = std::sin(t) + 0.3 * ref;
    opt.step(p, std::vector<double>{g}, lr);
    ref -= lr * o.weight_decay * ref;
    m = o.beta1 * m + (1 - o.beta1) * g;
    v = o.beta2 * v + (1 - o.beta2) * g * g;
    const double mh = m / (1 - std::pow(o.beta1, t)), vh = v / (1 - std::pow(o.beta2, t));
    ref -= lr * mh / (std::sqrt(vh) + o.epsilon);
    CHECK(p[0] == doctest::Approx(ref).epsilon(1e-12));
  }
}

TEST_CASE("zero learning rate leaves parameters bit-identical") {
  AdamW opt(2, {});
  std::vector<double> p{0.123456789, -5.5};
  const auto before = p;
  opt.step(p, std::vector<double>{3.0, -1.0}, 0.0);
  CHECK(p == before);
}

TEST_CASE("gradient clipping across groups") {
  std::vector<double> a{3.0}, b{4.0};
  const std::span<double> groups[] = {a, b};
  CHECK(clip_gradient_norm(groups, 1.0) == doctest::Approx(5.0));
  CHECK(a[0] == doctest::Approx(0.6));
  CHECK(b[0] == doctest::Approx(0.8));
  std::vector<double> c{0.3};
  const std::span<double> small[] = {c};
  clip_gradient_norm(small, 1.0);
  CHECK(c[0] == 0.3);
}
