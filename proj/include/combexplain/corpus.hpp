#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "combexplain/terms.hpp"

namespace combexplain {

struct Candidate {
  std::string label;
  std::string text;

  bool operator==(const Candidate&) const = default;
};

struct Question {
  std::string id;
  std::string stem;
  std::vector<Candidate> candidates;
  std::string answer;
  // Gold explanation fact ids in file order; may be empty.
  std::vector<std::string> explanation_ids;

  // Index of the gold answer among candidates.
  std::size_t answer_index() const;

  bool operator==(const Question&) const = default;
};

// Throws ValidationError unless: >= 2 candidates, unique labels, answer is a
// label, explanation ids unique.
void validate(const Question& q);

struct Hypothesis {
  std::string question_id;
  std::string candidate_label;
  std::string text;
  TermSet terms;

  // Key of this hypothesis in an embedding file: "<question id>#<label>".
  std::string sentence_id() const;
};

std::string hypothesis_sentence_id(std::string_view question_id, std::string_view label);

// Collapses whitespace runs to one space and trims both ends.
std::string normalize_whitespace(std::string_view text);

// One hypothesis per candidate: stem + " " + candidate text, whitespace-normalized.
std::vector<Hypothesis> build_hypotheses(const Question& q, const TermExtractor& extractor);
std::vector<Hypothesis> build_hypotheses(const Question& q);

enum class FactKind { kAbstract, kGrounding };

std::string_view to_string(FactKind kind);
// Throws ValidationError on anything but "abstract" or "grounding".
FactKind parse_fact_kind(std::string_view text);

struct Fact {
  std::string id;
  std::string text;
  FactKind kind = FactKind::kAbstract;
  TermSet terms;
};

class FactBank {
 public:
  FactBank() = default;
  // Throws ValidationError on duplicate ids.
  explicit FactBank(std::vector<Fact> facts);

  std::span<const Fact> facts() const { return facts_; }
  std::size_t size() const { return facts_.size(); }
  std::size_t grounding_count() const { return grounding_; }
  std::size_t abstract_count() const { return abstract_; }

  const Fact* find(std::string_view id) const;
  // Throws ValidationError for unknown ids.
  const Fact& at(std::string_view id) const;

 private:
  std::vector<Fact> facts_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t grounding_ = 0;
  std::size_t abstract_ = 0;
};

// Immutable id -> vector map. Every vector has `dimension()` finite
// components and nonzero norm.
class EmbeddingStore {
 public:
  explicit EmbeddingStore(std::size_t dimension);

  // Throws ValidationError on wrong length, non-finite component, zero
  // vector or duplicate id; the message names the sentence id.
  void add(std::string id, std::vector<double> vector);

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return order_.size(); }
  bool contains(std::string_view id) const;
  const std::vector<double>* find(std::string_view id) const;
  // Throws ValidationError naming the id if absent.
  std::span<const double> at(std::string_view id) const;

  // Ids in insertion order.
  const std::vector<std::string>& ids() const { return order_; }

 private:
  std::size_t dimension_;
  std::unordered_map<std::string, std::vector<double>> vectors_;
  std::vector<std::string> order_;
};

std::vector<Question> parse_corpus(std::istream& in, const std::string& source = "<stream>");
std::vector<Question> load_corpus(const std::filesystem::path& path);
// Canonical form: one compact JSON object per line with keys
// id, stem, candidates, answer, explanation_ids in that order.
void write_corpus(std::ostream& out, std::span<const Question> questions);
void save_corpus(const std::filesystem::path& path, std::span<const Question> questions);

FactBank parse_fact_bank(std::istream& in, const TermExtractor& extractor,
                         const std::string& source = "<stream>");
FactBank load_fact_bank(const std::filesystem::path& path, const TermExtractor& extractor);
FactBank load_fact_bank(const std::filesystem::path& path);
void write_fact_bank(std::ostream& out, const FactBank& bank);
void save_fact_bank(const std::filesystem::path& path, const FactBank& bank);

EmbeddingStore parse_embeddings(std::istream& in, const std::string& source = "<stream>");
EmbeddingStore load_embeddings(const std::filesystem::path& path);
void write_embeddings(std::ostream& out, const EmbeddingStore& store);
void save_embeddings(const std::filesystem::path& path, const EmbeddingStore& store);

}  // namespace combexplain
