#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "combexplain/corpus.hpp"
#include "combexplain/terms.hpp"

namespace combexplain {

// |a ∩ b| / max(|a|, |b|); 0 when both sets are empty. In [0, 1].
double lexical_relevance(const TermSet& a, const TermSet& b);

// Cosine similarity clamped to [-1, 1]. Throws std::invalid_argument on a
// dimension mismatch or a zero vector.
double semantic_relevance(std::span<const double> u, std::span<const double> v);

// Cosine between (scale ⊙ u) and (scale ⊙ v). An empty scale means identity.
double scaled_semantic_relevance(std::span<const double> u, std::span<const double> v,
                                 std::span<const double> scale);

struct ScoredFact {
  const Fact* fact;
  double score;
};

// Exact top-k by cosine to the hypothesis embedding; descending score, ties
// by ascending fact id. k >= |bank| returns every fact.
std::vector<ScoredFact> retrieve_topk_scored(const Hypothesis& h, const FactBank& bank,
                                             const EmbeddingStore& store, std::size_t k);

std::vector<const Fact*> retrieve_topk(const Hypothesis& h, const FactBank& bank,
                                       const EmbeddingStore& store, std::size_t k);

}  // namespace combexplain

namespace combexplain {

// Accumulates multiplier · d cos(scale⊙u, scale⊙v) / d scale into `grad`.
void accumulate_scaled_cosine_gradient(std::span<const double> u, std::span<const double> v,
                                       std::span<const double> scale, double multiplier,
                                       std::span<double> grad);

}  // namespace combexplain
