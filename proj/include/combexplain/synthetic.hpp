#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "combexplain/corpus.hpp"

namespace combexplain {

// Planted multiple-choice task.
//
// Each question has a gold explanation of two abstract facts and one
// grounding fact: the first abstract shares the question topic, the second
// links to the grounding fact through a shared concept, and the grounding
// fact names the gold answer. Every wrong answer gets a decoy chain with the
// same shape and the same lexical overlap. Topic-related and unrelated
// distractors fill the rest of the bank.
//
// Embedding dimensions are split in half. Gold facts agree with the gold
// hypothesis in the first half ("content"); decoys agree with their wrong
// hypothesis in the second half ("nuisance"), with weight `nuisance`. With
// nuisance > 1 the decoys look better than the gold facts until the
// nuisance dimensions are scaled down.
struct SyntheticOptions {
  std::size_t questions = 200;
  std::size_t choices = 4;
  std::size_t dimension = 64;
  std::size_t distractors_per_question = 24;
  double topic_distractor_fraction = 0.5;
  double nuisance = 1.2;
  // Weight of each fact's own direction.
  double fact_specificity = 0.8;
  double noise = 0.2;
  std::uint64_t seed = 7;
};

struct SyntheticDataset {
  std::vector<Question> questions;
  std::vector<Fact> facts;  // terms left empty
  EmbeddingStore store{1};
};

SyntheticDataset generate_synthetic(const SyntheticOptions& options);

// First `train_count` questions and the rest.
struct QuestionSplit {
  std::vector<Question> train;
  std::vector<Question> test;
};
QuestionSplit split_questions(std::span<const Question> questions, std::size_t train_count);

}  // namespace combexplain
