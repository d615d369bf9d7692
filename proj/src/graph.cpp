#include "combexplain/graph.hpp"

#include <algorithm>
#include <stdexcept>

#include "combexplain/errors.hpp"
#include "combexplain/scoring.hpp"

namespace combexplain {

ThetaParams ThetaParams::uniform(double value) {
  ThetaParams t;
  t.gg = t.aa = t.ga = t.qgl = t.qgs = t.qal_lex = t.qal_sem = value;
  return t;
}

ThetaParams ThetaParams::from_array(const std::array<double, kCount>& v) {
  return {v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
}

std::array<double, ThetaParams::kCount> ThetaParams::to_array() const {
  return {gg, aa, ga, qgl, qgs, qal_lex, qal_sem};
}

const std::array<const char*, ThetaParams::kCount>& ThetaParams::names() {
  static const std::array<const char*, kCount> n = {"gg",  "aa",      "ga",     "qgl",
                                                    "qgs", "qal_lex", "qal_sem"};
  return n;
}

ThetaParams ThetaParams::clamped() const {
  auto v = to_array();
  for (auto& x : v) x = std::clamp(x, 0.0, 1.0);
  return from_array(v);
}

GraphFeatures compute_features(const Hypothesis& h, std::span<const Fact* const> facts,
                               const EmbeddingStore& store, std::span<const double> adapter) {
  if (facts.empty()) throw ValidationError("hypothesis " + h.sentence_id() + ": no facts");
  const std::size_t n = facts.size() + 1;
  GraphFeatures g;
  g.kinds.reserve(n);
  g.ids.reserve(n);
  g.kinds.push_back(NodeKind::kHypothesis);
  g.ids.push_back(h.sentence_id());
  std::vector<const TermSet*> terms{&h.terms};
  for (const Fact* f : facts) {
    g.kinds.push_back(f->kind == FactKind::kAbstract ? NodeKind::kAbstract
                                                     : NodeKind::kGrounding);
    g.ids.push_back(f->id);
    terms.push_back(&f->terms);
  }
  g.lexical = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = j + 1; k < n; ++k) {
      const double l = lexical_relevance(*terms[j], *terms[k]);
      g.lexical(j, k) = l;
      g.lexical(k, j) = l;
    }
  }
  const auto hv = store.at(g.ids[0]);
  g.semantic.assign(n, 0.0);
  for (std::size_t j = 1; j < n; ++j) {
    g.semantic[j] = scaled_semantic_relevance(hv, store.at(g.ids[j]), adapter);
  }
  return g;
}

namespace {

// Which θ component and sign weight a pair's lexical term; hypothesis pairs
// are handled separately since they also carry a semantic term.
struct PairCase {
  double ThetaParams::*lexical;
  double sign;
};

PairCase fact_pair_case(NodeKind a, NodeKind b) {
  if (a == NodeKind::kGrounding && b == NodeKind::kGrounding) return {&ThetaParams::gg, -1.0};
  if (a == NodeKind::kAbstract && b == NodeKind::kAbstract) return {&ThetaParams::aa, -1.0};
  return {&ThetaParams::ga, 1.0};
}

}  // namespace

WeightMatrix assemble_weights(const GraphFeatures& f, const ThetaParams& theta) {
  const std::size_t n = f.size();
  WeightMatrix w{f.kinds, f.ids, Matrix(n, n)};
  for (std::size_t k = 1; k < n; ++k) {
    const double l = f.lexical(0, k);
    const double s = semantic_weight_input(f.semantic[k]);
    const double value = f.kinds[k] == NodeKind::kGrounding
                             ? theta.qgl * l + theta.qgs * s
                             : theta.qal_lex * l + theta.qal_sem * s;
    w.entries(0, k) = value;
    w.entries(k, 0) = value;
  }
  for (std::size_t j = 1; j < n; ++j) {
    for (std::size_t k = j + 1; k < n; ++k) {
      const auto c = fact_pair_case(f.kinds[j], f.kinds[k]);
      const double value = c.sign * (theta.*c.lexical) * f.lexical(j, k);
      w.entries(j, k) = value;
      w.entries(k, j) = value;
    }
  }
  return w;
}

WeightMatrix build_weight_matrix(const Hypothesis& h, std::span<const Fact* const> facts,
                                 const EmbeddingStore& store, const ThetaParams& theta,
                                 std::span<const double> adapter) {
  return assemble_weights(compute_features(h, facts, store, adapter), theta);
}

namespace {

void check_shape(const Matrix& w_grad, const GraphFeatures& f) {
  if (w_grad.rows() != f.size() || w_grad.cols() != f.size()) {
    throw std::invalid_argument("weight gradient is " + std::to_string(w_grad.rows()) + "x" +
                                std::to_string(w_grad.cols()) + ", graph has " +
                                std::to_string(f.size()) + " nodes");
  }
}

}  // namespace

ThetaParams theta_gradient(const Matrix& w_grad, const GraphFeatures& f) {
  check_shape(w_grad, f);
  ThetaParams g;
  const std::size_t n = f.size();
  for (std::size_t k = 1; k < n; ++k) {
    const double upstream = w_grad(0, k) + w_grad(k, 0);
    const double l = f.lexical(0, k);
    const double s = semantic_weight_input(f.semantic[k]);
    if (f.kinds[k] == NodeKind::kGrounding) {
      g.qgl += upstream * l;
      g.qgs += upstream * s;
    } else {
      g.qal_lex += upstream * l;
      g.qal_sem += upstream * s;
    }
  }
  for (std::size_t j = 1; j < n; ++j) {
    for (std::size_t k = j + 1; k < n; ++k) {
      const auto c = fact_pair_case(f.kinds[j], f.kinds[k]);
      g.*c.lexical += (w_grad(j, k) + w_grad(k, j)) * c.sign * f.lexical(j, k);
    }
  }
  return g;
}

std::vector<double> semantic_gradient(const Matrix& w_grad, const GraphFeatures& f,
                                      const ThetaParams& theta) {
  check_shape(w_grad, f);
  std::vector<double> g(f.size(), 0.0);
  for (std::size_t k = 1; k < f.size(); ++k) {
    if (f.semantic[k] <= 0.0) continue;
    const double coef = f.kinds[k] == NodeKind::kGrounding ? theta.qgs : theta.qal_sem;
    g[k] = (w_grad(0, k) + w_grad(k, 0)) * coef;
  }
  return g;
}

}  // namespace combexplain
