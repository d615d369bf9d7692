#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace combexplain {

struct PredictionRecord {
  std::string qid;
  std::string predicted;
  std::string gold;
  // Candidate label -> objective score W·ŷ (before temperature).
  std::map<std::string, double> scores;
  // Selected facts of the predicted candidate, best first.
  std::vector<std::string> explanation_ids;
  std::vector<std::string> gold_explanation_ids;

  bool correct() const { return predicted == gold; }
  bool operator==(const PredictionRecord&) const = default;
};

// Fraction of records whose prediction matches gold. Throws
// std::invalid_argument on an empty record list.
double accuracy(std::span<const PredictionRecord> records);

// Mean over records of |top-K explanation ∩ gold| / K. Records with fewer than
// K selected facts still divide by K. Throws std::invalid_argument if K == 0
// or records are empty.
double precision_at_k(std::span<const PredictionRecord> records, std::size_t k);

// Per-question partition of answer correctness and presence of a gold fact in
// the selected explanation.
struct FaithfulnessTally {
  std::vector<std::string> correct;            // A_Qc
  std::vector<std::string> wrong;              // A_Qw
  std::vector<std::string> with_gold_fact;     // A_Q1
  std::vector<std::string> without_gold_fact;  // A_Q0
  std::size_t correct_with_gold = 0;           // |A_Qc ∩ A_Q1|
  std::size_t wrong_without_gold = 0;          // |A_Qw ∩ A_Q0|
};

FaithfulnessTally faithfulness_tally(std::span<const PredictionRecord> records);

// (|A_Qw ∩ A_Q0| + |A_Qc ∩ A_Q1|) / |A_Qc ∪ A_Qw|. Throws on empty input.
double faithfulness(std::span<const PredictionRecord> records);

using GoldExplanationMap = std::unordered_map<std::string, std::vector<std::string>>;

GoldExplanationMap gold_map_from_records(std::span<const PredictionRecord> records);

// Sum over ordered pairs (Q_t, Q_j), t != j, whose gold explanations overlap
// in a set O with |O| >= K, of |O ∩ E_t| divided by the sum of |O|. E_t is
// the full selected explanation of Q_t; peers are taken from `gold`.
// Returns nullopt when no pair qualifies. Throws std::invalid_argument if K == 0.
std::optional<double> explanation_consistency_at_k(std::span<const PredictionRecord> records,
                                                   const GoldExplanationMap& gold,
                                                   std::size_t k);

std::vector<PredictionRecord> parse_predictions(std::istream& in,
                                                const std::string& source = "<stream>");
std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path);
void write_predictions(std::ostream& out, std::span<const PredictionRecord> records);
void save_predictions(const std::filesystem::path& path,
                      std::span<const PredictionRecord> records);

// The standard metric set of an evaluation run.
struct MetricsReport {
  std::size_t questions = 0;
  double accuracy = 0.0;
  double precision_at_1 = 0.0;
  double precision_at_2 = 0.0;
  double faithfulness = 0.0;
  std::optional<double> consistency_at_1;
  std::optional<double> consistency_at_2;
  std::optional<double> consistency_at_3;
};

MetricsReport compute_report(std::span<const PredictionRecord> records);

}  // namespace combexplain
