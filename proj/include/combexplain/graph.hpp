#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "combexplain/corpus.hpp"
#include "combexplain/matrix.hpp"

namespace combexplain {

// Edge-weight coefficients, each kept in [0, 1].
struct ThetaParams {
  static constexpr std::size_t kCount = 7;

  double gg = 0.0;       // grounding–grounding (penalty)
  double aa = 0.0;       // abstract–abstract (penalty)
  double ga = 0.0;       // grounding–abstract
  double qgl = 0.0;      // hypothesis–grounding, lexical
  double qgs = 0.0;      // hypothesis–grounding, semantic
  double qal_lex = 0.0;  // hypothesis–abstract, lexical
  double qal_sem = 0.0;  // hypothesis–abstract, semantic

  static ThetaParams uniform(double value);
  static ThetaParams from_array(const std::array<double, kCount>& values);
  std::array<double, kCount> to_array() const;
  static const std::array<const char*, kCount>& names();

  ThetaParams clamped() const;

  bool operator==(const ThetaParams&) const = default;
};

enum class NodeKind { kHypothesis, kAbstract, kGrounding };

// Parameter-independent inputs to the weight matrix of one hypothesis graph.
// Node 0 is the hypothesis; nodes 1..k are the facts in retrieval order.
struct GraphFeatures {
  std::vector<NodeKind> kinds;
  std::vector<std::string> ids;
  Matrix lexical;                // symmetric, zero diagonal
  std::vector<double> semantic;  // raw cosine to the hypothesis; semantic[0] = 0

  std::size_t size() const { return kinds.size(); }
};

// Lexical overlaps and (optionally adapter-scaled) cosines for {h} ∪ facts.
// Throws ValidationError for missing embeddings and if facts is empty.
GraphFeatures compute_features(const Hypothesis& h, std::span<const Fact* const> facts,
                               const EmbeddingStore& store,
                               std::span<const double> adapter = {});

struct WeightMatrix {
  std::vector<NodeKind> kinds;
  std::vector<std::string> ids;
  Matrix entries;  // symmetric, zero diagonal

  std::size_t size() const { return kinds.size(); }
  double operator()(std::size_t j, std::size_t k) const { return entries(j, k); }
};

// Semantic scores enter the weights only through their positive part.
inline double semantic_weight_input(double s) { return s > 0.0 ? s : 0.0; }

// Edge weights from the case table keyed by the two endpoint kinds.
WeightMatrix assemble_weights(const GraphFeatures& features, const ThetaParams& theta);

WeightMatrix build_weight_matrix(const Hypothesis& h, std::span<const Fact* const> facts,
                                 const EmbeddingStore& store, const ThetaParams& theta,
                                 std::span<const double> adapter = {});

// Gradient of sum_{j,k} w_grad(j,k) * W(j,k) with respect to each θ component.
// Reads the full matrix (both triangles). Throws std::invalid_argument on a
// shape mismatch.
ThetaParams theta_gradient(const Matrix& w_grad, const GraphFeatures& features);

// Gradient of the same scalar with respect to each raw cosine semantic[j],
// including the zero slope below the clamp. Entry 0 is always 0.
std::vector<double> semantic_gradient(const Matrix& w_grad, const GraphFeatures& features,
                                      const ThetaParams& theta);

}  // namespace combexplain
