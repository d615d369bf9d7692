#include "combexplain/terms.hpp"

#include <algorithm>
#include <cctype>

#include "combexplain/errors.hpp"
#include "combexplain/io.hpp"

namespace combexplain {

TermSet::TermSet(std::vector<std::string> terms) : terms_(std::move(terms)) {
  std::erase_if(terms_, [](const std::string& t) { return t.empty(); });
  std::sort(terms_.begin(), terms_.end());
  terms_.erase(std::unique(terms_.begin(), terms_.end()), terms_.end());
}

bool TermSet::contains(std::string_view term) const {
  return std::binary_search(terms_.begin(), terms_.end(), term);
}

std::string TermSet::joined() const {
  std::string out;
  for (const auto& t : terms_) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

std::size_t intersection_size(const TermSet& a, const TermSet& b) {
  std::size_t count = 0;
  auto i = a.terms().begin();
  auto j = b.terms().begin();
  while (i != a.terms().end() && j != b.terms().end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++count;
      ++i;
      ++j;
    }
  }
  return count;
}

namespace {

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

std::string SuffixStripNormalizer::normalize(std::string_view token) const {
  if (auto it = lemmas_.find(std::string(token)); it != lemmas_.end()) {
    return it->second;
  }
  if (token.size() > 4 && ends_with(token, "es")) {
    const std::string_view stem = token.substr(0, token.size() - 2);
    if (ends_with(stem, "s") || ends_with(stem, "x") || ends_with(stem, "z") ||
        ends_with(stem, "ch") || ends_with(stem, "sh")) {
      return std::string(stem);
    }
  }
  if (token.size() > 3 && ends_with(token, "s") && !ends_with(token, "ss") &&
      !ends_with(token, "us") && !ends_with(token, "is")) {
    return std::string(token.substr(0, token.size() - 1));
  }
  return std::string(token);
}

TermExtractor::TermExtractor()
    : stopwords_(default_stopwords()),
      normalizer_(std::make_shared<SuffixStripNormalizer>()) {}

TermExtractor::TermExtractor(std::unordered_set<std::string> stopwords,
                             std::shared_ptr<const TermNormalizer> normalizer)
    : stopwords_(std::move(stopwords)),
      normalizer_(normalizer ? std::move(normalizer)
                             : std::make_shared<SuffixStripNormalizer>()) {}

TermSet TermExtractor::extract(std::string_view text) const {
  // Bound on normalizer iterations; a lemma dictionary with a cycle would
  // otherwise never reach a fixed point.
  constexpr int kMaxRounds = 8;
  std::vector<std::string> terms;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    if (!stopwords_.contains(token)) {
      std::string current = token;
      for (int round = 0; round < kMaxRounds; ++round) {
        std::string next = normalizer_->normalize(current);
        if (next == current) break;
        current = std::move(next);
      }
      if (!current.empty() && !stopwords_.contains(current)) {
        terms.push_back(std::move(current));
      }
    }
    token.clear();
  };
  for (const char raw : text) {
    const auto c = static_cast<unsigned char>(raw);
    if (std::isalnum(c) || c >= 0x80) {
      token += static_cast<char>(std::tolower(c));
    } else {
      flush();
    }
  }
  flush();
  return TermSet(std::move(terms));
}

TermSet term_set(std::string_view text, const std::unordered_set<std::string>& stopwords) {
  return TermExtractor(stopwords, nullptr).extract(text);
}

const std::unordered_set<std::string>& default_stopwords() {
  static const std::unordered_set<std::string> words = {
      "a",     "an",    "and",   "are",  "as",    "at",   "be",    "been",
      "by",    "can",   "do",    "does", "for",   "from", "has",   "have",
      "how",   "if",    "in",    "into", "is",    "it",   "its",   "kind",
      "most",  "of",    "on",    "or",   "that",  "the",  "their", "them",
      "then",  "there", "these", "they", "this",  "those", "to",   "type",
      "was",   "were",  "what",  "when", "where", "which", "who",  "why",
      "will",  "with",  "would", "you",  "your"};
  return words;
}

std::unordered_set<std::string> load_stopwords(const std::filesystem::path& path) {
  std::unordered_set<std::string> words;
  for (auto& line : read_lines(path)) {
    std::string word;
    for (char c : line) {
      if (!std::isspace(static_cast<unsigned char>(c))) {
        word += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      }
    }
    if (word.empty() || word.front() == '#') continue;
    words.insert(std::move(word));
  }
  return words;
}

std::unordered_map<std::string, std::string> load_lemma_dictionary(
    const std::filesystem::path& path) {
  std::unordered_map<std::string, std::string> lemmas;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& line = lines[i];
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
      throw ParseError(path.string(), i + 1, "expected \"surface<TAB>lemma\"");
    }
    lemmas[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return lemmas;
}

}  // namespace combexplain
