#include "combexplain/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace combexplain {

double lexical_relevance(const TermSet& a, const TermSet& b) {
  const std::size_t denom = std::max(a.size(), b.size());
  if (denom == 0) return 0.0;
  return static_cast<double>(intersection_size(a, b)) / static_cast<double>(denom);
}

double scaled_semantic_relevance(std::span<const double> u, std::span<const double> v,
                                 std::span<const double> scale) {
  if (u.size() != v.size()) {
    throw std::invalid_argument("cosine: dimension mismatch (" + std::to_string(u.size()) +
                                " vs " + std::to_string(v.size()) + ")");
  }
  if (!scale.empty() && scale.size() != u.size()) {
    throw std::invalid_argument("cosine: scale vector has wrong dimension");
  }
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double a = scale.empty() ? 1.0 : scale[i];
    const double x = a * u[i];
    const double y = a * v[i];
    dot += x * y;
    uu += x * x;
    vv += y * y;
  }
  if (uu == 0.0 || vv == 0.0) throw std::invalid_argument("cosine: zero vector");
  return std::clamp(dot / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

double semantic_relevance(std::span<const double> u, std::span<const double> v) {
  return scaled_semantic_relevance(u, v, {});
}

std::vector<ScoredFact> retrieve_topk_scored(const Hypothesis& h, const FactBank& bank,
                                             const EmbeddingStore& store, std::size_t k) {
  const auto query = store.at(h.sentence_id());
  std::vector<ScoredFact> scored;
  scored.reserve(bank.size());
  for (const auto& f : bank.facts()) {
    scored.push_back({&f, semantic_relevance(query, store.at(f.id))});
  }
  auto better = [](const ScoredFact& a, const ScoredFact& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.fact->id < b.fact->id;
  };
  const std::size_t keep = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep),
                    scored.end(), better);
  scored.resize(keep);
  return scored;
}

std::vector<const Fact*> retrieve_topk(const Hypothesis& h, const FactBank& bank,
                                       const EmbeddingStore& store, std::size_t k) {
  std::vector<const Fact*> out;
  for (const auto& s : retrieve_topk_scored(h, bank, store, k)) out.push_back(s.fact);
  return out;
}

}  // namespace combexplain

namespace combexplain {

void accumulate_scaled_cosine_gradient(std::span<const double> u, std::span<const double> v,
                                       std::span<const double> scale, double multiplier,
                                       std::span<double> grad) {
  if (multiplier == 0.0) return;
  const std::size_t d = u.size();
  if (v.size() != d || scale.size() != d || grad.size() != d) {
    throw std::invalid_argument("cosine gradient: dimension mismatch");
  }
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double x = scale[i] * u[i];
    const double y = scale[i] * v[i];
    dot += x * y;
    uu += x * x;
    vv += y * y;
  }
  const double nu = std::sqrt(uu);
  const double nv = std::sqrt(vv);
  const double cos = dot / (nu * nv);
  // With x = a⊙u, y = a⊙v:
  // dcos/dx = y/(|x||y|) - cos·x/|x|², dcos/dy = x/(|x||y|) - cos·y/|y|²,
  // and dx_i/da_i = u_i, dy_i/da_i = v_i.
  for (std::size_t i = 0; i < d; ++i) {
    const double x = scale[i] * u[i];
    const double y = scale[i] * v[i];
    const double dx = y / (nu * nv) - cos * x / uu;
    const double dy = x / (nu * nv) - cos * y / vv;
    grad[i] += multiplier * (dx * u[i] + dy * v[i]);
  }
}

}  // namespace combexplain
