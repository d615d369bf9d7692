#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace combexplain {

// Sorted, duplicate-free list of normalized (lowercase, nonempty) terms.
class TermSet {
 public:
  TermSet() = default;
  explicit TermSet(std::vector<std::string> terms);

  const std::vector<std::string>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }
  bool contains(std::string_view term) const;

  // Space-joined terms, in sorted order.
  std::string joined() const;

  bool operator==(const TermSet&) const = default;

 private:
  std::vector<std::string> terms_;
};

std::size_t intersection_size(const TermSet& a, const TermSet& b);

// Maps one lowercase token to its normalized form.
class TermNormalizer {
 public:
  virtual ~TermNormalizer() = default;
  virtual std::string normalize(std::string_view token) const = 0;
};

// Default normalizer: optional lemma dictionary lookup, then plural
// suffix stripping ("boxes" -> "box", "cats" -> "cat"). Words ending in
// "ss", "us" or "is" and words of three letters or fewer keep their "s".
class SuffixStripNormalizer final : public TermNormalizer {
 public:
  SuffixStripNormalizer() = default;
  explicit SuffixStripNormalizer(std::unordered_map<std::string, std::string> lemmas)
      : lemmas_(std::move(lemmas)) {}

  std::string normalize(std::string_view token) const override;

 private:
  std::unordered_map<std::string, std::string> lemmas_;
};

// Tokenizes text on non-alphanumeric characters, lowercases, drops
// stopwords and normalizes each token to a fixed point of the normalizer.
class TermExtractor {
 public:
  // Default stopword list and suffix stripping.
  TermExtractor();
  TermExtractor(std::unordered_set<std::string> stopwords,
                std::shared_ptr<const TermNormalizer> normalizer);

  TermSet extract(std::string_view text) const;

  const std::unordered_set<std::string>& stopwords() const { return stopwords_; }

 private:
  std::unordered_set<std::string> stopwords_;
  std::shared_ptr<const TermNormalizer> normalizer_;
};

// Convenience wrapper with the default normalizer.
TermSet term_set(std::string_view text, const std::unordered_set<std::string>& stopwords);

const std::unordered_set<std::string>& default_stopwords();

// One token per line; blank lines and lines starting with '#' ignored.
std::unordered_set<std::string> load_stopwords(const std::filesystem::path& path);

// "surface\tlemma" per line.
std::unordered_map<std::string, std::string> load_lemma_dictionary(
    const std::filesystem::path& path);

}  // namespace combexplain
