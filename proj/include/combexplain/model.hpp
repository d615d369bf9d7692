#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "combexplain/corpus.hpp"
#include "combexplain/dbcs.hpp"
#include "combexplain/errors.hpp"
#include "combexplain/graph.hpp"
#include "combexplain/losses.hpp"
#include "combexplain/metrics.hpp"
#include "combexplain/optimizer.hpp"

namespace combexplain {

enum class SupervisionMode { kAnswer, kAnswerAndExplanation };

std::string_view to_string(SupervisionMode mode);
// Accepts "answer" and "answer+explanation".
SupervisionMode parse_supervision_mode(std::string_view text);

struct ModelConfig {
  std::size_t k = 10;             // facts retrieved per hypothesis
  std::size_t max_abstract = 2;   // M
  double lambda = kDefaultLambda;
  LossWeights loss;
  double lr = 1e-5;
  double adapter_lr = 1e-5;
  std::size_t epochs = 8;
  std::size_t batch_size = 1;
  std::uint64_t seed = 42;
  double max_grad_norm = 1.0;
  AdamWOptions adam;
  SupervisionMode mode = SupervisionMode::kAnswerAndExplanation;
  bool use_adapter = true;
  double theta_init = 0.5;

  // Throws ValidationError: k >= 1, λ > 0, T > 0, loss weights in [0, 1],
  // learning rates >= 0, batch size >= 1.
  void validate() const;
};

// θ plus an optional per-dimension positive scale applied to embeddings
// before cosine (empty = disabled).
struct TrainableParams {
  ThetaParams theta;
  std::vector<double> adapter;

  static TrainableParams initial(const ModelConfig& config, std::size_t embedding_dim);
  bool operator==(const TrainableParams&) const = default;
};

inline constexpr double kMinAdapterScale = 1e-6;

// One hypothesis with its retrieved facts and parameter-independent features.
struct CandidateGraph {
  Hypothesis hypothesis;
  std::vector<const Fact*> facts;
  GraphFeatures features;  // semantic scores computed without the adapter
};

// Everything about a question that does not change during training.
struct PreparedQuestion {
  const Question* question = nullptr;
  std::vector<CandidateGraph> candidates;
  std::size_t gold = 0;
  // Per candidate: 1 where the retrieved fact is in the gold explanation.
  std::vector<std::vector<std::uint8_t>> gold_indicators;
};

PreparedQuestion prepare_question(const Question& q, const FactBank& bank,
                                  const EmbeddingStore& store, const TermExtractor& extractor,
                                  std::size_t k);

struct CandidateForward {
  GraphFeatures features;  // with current adapter
  WeightMatrix weights;
  DbcsForward dbcs;
  double score = 0.0;  // W·ŷ
};

struct QuestionForward {
  std::vector<CandidateForward> candidates;
  std::vector<double> scores;
  std::vector<double> probabilities;
  std::size_t predicted = 0;
};

QuestionForward forward(const PreparedQuestion& pq, const EmbeddingStore& store,
                        const TrainableParams& params, const ModelConfig& config,
                        const SolverFn& solver = solve_exact);

// Argmax with ties broken towards the lexicographically smallest label.
std::size_t argmax_with_label_tiebreak(std::span<const double> values,
                                       std::span<const Candidate> candidates);

// Selected facts ranked by their summed weight to the other selected nodes
// (descending, ties by id), with those weights.
std::vector<std::pair<std::string, double>> ranked_explanation(const CandidateForward& cf);

PredictionRecord make_record(const PreparedQuestion& pq, const QuestionForward& fw);

PredictionRecord predict(const Question& q, const FactBank& bank, const EmbeddingStore& store,
                         const TermExtractor& extractor, const TrainableParams& params,
                         const ModelConfig& config);

struct Gradient {
  ThetaParams theta;
  std::vector<double> adapter;
};

struct QuestionLoss {
  double answer = 0.0;
  double explanation = 0.0;
  double total = 0.0;
  bool explanations_available = false;
};

struct BackwardOptions {
  // When false only the analytic d(W·ŷ)/dW path is used, as if ŷ were fixed.
  bool through_solver = true;
};

// Losses for one question and their gradient with respect to θ and the adapter.
QuestionLoss backward(const PreparedQuestion& pq, const EmbeddingStore& store,
                      const TrainableParams& params, const ModelConfig& config,
                      const QuestionForward& fw, Gradient& grad,
                      BackwardOptions options = {}, const SolverFn& solver = solve_exact);

// Total loss with every candidate's node selection held at `solutions`.
double frozen_solution_loss(const PreparedQuestion& pq, const EmbeddingStore& store,
                            const TrainableParams& params, const ModelConfig& config,
                            std::span<const std::vector<std::uint8_t>> solutions);

struct EpochStats {
  std::size_t epoch = 0;
  double answer_loss = 0.0;
  double explanation_loss = 0.0;
  double total_loss = 0.0;
};

struct OptimizerState {
  AdamW theta;
  AdamW adapter;
};

struct TrainingState {
  TrainableParams params;
  OptimizerState optimizer;
  std::size_t epoch = 0;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

TrainingState initial_training_state(const ModelConfig& config, std::size_t embedding_dim);

using EpochCallback = std::function<void(const EpochStats&, const TrainingState&)>;

// AdamW over shuffled single- or mini-batch steps; θ clamped to [0, 1] after
// every step. Throws TrainingError on a non-finite gradient.
std::vector<EpochStats> train(std::span<const Question> corpus, const FactBank& bank,
                              const EmbeddingStore& store, const TermExtractor& extractor,
                              const ModelConfig& config, TrainingState& state,
                              const EpochCallback& on_epoch = {});

std::vector<PredictionRecord> evaluate(std::span<const Question> questions,
                                       const FactBank& bank, const EmbeddingStore& store,
                                       const TermExtractor& extractor,
                                       const TrainableParams& params, const ModelConfig& config);

}  // namespace combexplain
