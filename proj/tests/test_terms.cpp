#include "doctest.h"

#include "combexplain/terms.hpp"

using namespace combexplain;

TEST_CASE("term_set lowercases, strips punctuation, drops stopwords and plural s") {
  const TermSet t = term_set("The cats sat.", {"the"});
  CHECK(t.terms() == std::vector<std::string>{"cat", "sat"});
}

TEST_CASE("term_set of empty text is empty") {
  CHECK(term_set("", default_stopwords()).empty());
  CHECK(term_set("  ,.;  ", default_stopwords()).empty());
}

TEST_CASE("term_set is idempotent on its joined output") {
  for (const char* text : {"The cats sat.", "Boxes of matches and glasses", "A bus's buses",
                           "Plants need sunlight to make food.", "churches dishes foxes quizzes"}) {
    const TermSet once = term_set(text, default_stopwords());
    CHECK(term_set(once.joined(), default_stopwords()) == once);
  }
}

TEST_CASE("suffix stripping rules") {
  SuffixStripNormalizer n;
  CHECK(n.normalize("boxes") == "box");
  CHECK(n.normalize("churches") == "church");
  CHECK(n.normalize("cats") == "cat");
  CHECK(n.normalize("glass") == "glass");
  CHECK(n.normalize("virus") == "virus");
  CHECK(n.normalize("axis") == "axis");
  CHECK(n.normalize("gas") == "gas");
  CHECK(n.normalize("shoes") == "shoe");
}

TEST_CASE("lemma dictionary wins over suffix rules") {
  auto norm = std::make_shared<SuffixStripNormalizer>(
      std::unordered_map<std::string, std::string>{{"mice", "mouse"}, {"leaves", "leaf"}});
  TermExtractor ex({}, norm);
  CHECK(ex.extract("Mice eat leaves").terms() == std::vector<std::string>{"eat", "leaf", "mouse"});
}

TEST_CASE("terms are unique and sorted") {
  const TermSet t = term_set("rock rocks ROCK stone", {});
  CHECK(t.terms() == std::vector<std::string>{"rock", "stone"});
  CHECK(t.contains("rock"));
  CHECK_FALSE(t.contains("rocks"));
}

TEST_CASE("intersection size") {
  CHECK(intersection_size(TermSet({"x", "y", "z"}), TermSet({"v", "w", "y", "z"})) == 2);
  CHECK(intersection_size(TermSet(), TermSet({"a"})) == 0);
}
