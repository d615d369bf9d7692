#include "combexplain/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <random>
#include <string>
#include <utility>

#include "combexplain/errors.hpp"

namespace combexplain {

namespace {

// Letters only and no 's', so tokens survive suffix stripping unchanged.
constexpr std::string_view kAlphabet = "abcdefghijklmnopqrtuvwxyz";

class WordMint {
 public:
  explicit WordMint(char prefix) : prefix_(prefix) {}

  std::string next() {
    std::size_t id = count_++;
    std::string out(1, prefix_);
    for (int i = 0; i < 3 || id > 0; ++i) {
      out += kAlphabet[id % kAlphabet.size()];
      id /= kAlphabet.size();
    }
    return out;
  }

 private:
  char prefix_;
  std::size_t count_ = 0;
};

using Vec = std::vector<double>;

class VectorMint {
 public:
  VectorMint(std::size_t dim, std::uint64_t seed) : dim_(dim), rng_(seed) {}

  // Random unit vector supported on [begin, end).
  Vec unit(std::size_t begin, std::size_t end) {
    Vec v(dim_, 0.0);
    double norm = 0.0;
    while (norm == 0.0) {
      for (std::size_t i = begin; i < end; ++i) {
        v[i] = normal_(rng_);
        norm += v[i] * v[i];
      }
    }
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    return v;
  }
  Vec unit() { return unit(0, dim_); }

  Vec mix(std::initializer_list<std::pair<double, const Vec*>> parts, double noise) {
    Vec v(dim_, 0.0);
    for (const auto& [w, dir] : parts) {
      for (std::size_t i = 0; i < dim_; ++i) v[i] += w * (*dir)[i];
    }
    const Vec n = unit();
    for (std::size_t i = 0; i < dim_; ++i) v[i] += noise * n[i];
    return v;
  }

  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

 private:
  std::size_t dim_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

std::string candidate_label(std::size_t i) {
  std::string label;
  do {
    label.insert(label.begin(), static_cast<char>('A' + i % 26));
    i /= 26;
  } while (i-- > 0);
  return label;
}

}  // namespace

SyntheticDataset generate_synthetic(const SyntheticOptions& o) {
  if (o.choices < 2) throw ValidationError("synthetic: need at least 2 choices");
  if (o.dimension < 2) throw ValidationError("synthetic: dimension must be at least 2");
  SyntheticDataset data;
  data.store = EmbeddingStore(o.dimension);
  const std::size_t half = o.dimension / 2;
  VectorMint vec(o.dimension, o.seed);
  WordMint topic_words('q'), concept_words('v'), answer_words('z'), filler_words('j');

  auto add_fact = [&](std::string text, FactKind kind, Vec embedding) {
    char id[16];
    std::snprintf(id, sizeof id, "F%06zu", data.facts.size());
    Fact f;
    f.id = id;
    f.text = std::move(text);
    f.kind = kind;
    data.store.add(f.id, std::move(embedding));
    data.facts.push_back(std::move(f));
    return data.facts.back().id;
  };

  for (std::size_t qi = 0; qi < o.questions; ++qi) {
    Question q;
    q.id = "Q" + std::to_string(qi);
    const std::string topic_a = topic_words.next();
    const std::string topic_b = topic_words.next();
    q.stem = "Which " + topic_a + " " + topic_b + " property?";
    const Vec topic = vec.unit(0, half);

    std::vector<Vec> content, nuisance;
    std::vector<std::string> answer_text;
    for (std::size_t c = 0; c < o.choices; ++c) {
      content.push_back(vec.unit(0, half));
      nuisance.push_back(vec.unit(half, o.dimension));
      answer_text.push_back(answer_words.next());
      q.candidates.push_back({candidate_label(c), answer_text.back()});
    }
    const std::size_t gold = vec.index(o.choices);
    q.answer = q.candidates[gold].label;

    for (std::size_t c = 0; c < o.choices; ++c) {
      data.store.add(hypothesis_sentence_id(q.id, q.candidates[c].label),
                     vec.mix({{1.0, &topic}, {1.0, &content[c]}, {o.nuisance, &nuisance[c]}},
                             o.noise));
    }

    // Chain for every candidate: gold along content, decoys along nuisance.
    for (std::size_t c = 0; c < o.choices; ++c) {
      const bool is_gold = c == gold;
      const Vec& link = is_gold ? content[c] : nuisance[c];
      const double w = is_gold ? 1.0 : o.nuisance;
      const std::string concept_u = concept_words.next();
      const std::string concept_v = concept_words.next();
      const Vec own1 = vec.unit(), own2 = vec.unit(), own3 = vec.unit();
      const double s = o.fact_specificity;
      std::vector<std::string> ids;
      ids.push_back(add_fact(topic_a + " " + topic_b + " depends on " + concept_u,
                             FactKind::kAbstract,
                             vec.mix({{1.0, &topic}, {w, &link}, {s, &own1}}, o.noise)));
      ids.push_back(add_fact("every " + concept_v + " has " + concept_u, FactKind::kAbstract,
                             vec.mix({{1.0, &topic}, {w, &link}, {s, &own2}}, o.noise)));
      ids.push_back(add_fact(answer_text[c] + " is a " + concept_v, FactKind::kGrounding,
                             vec.mix({{1.0, &topic}, {w, &link}, {s, &own3}}, o.noise)));
      if (is_gold) q.explanation_ids = std::move(ids);
    }

    for (std::size_t d = 0; d < o.distractors_per_question; ++d) {
      const bool on_topic = static_cast<double>(d) <
                            o.topic_distractor_fraction *
                                static_cast<double>(o.distractors_per_question);
      const FactKind kind = d % 2 == 0 ? FactKind::kAbstract : FactKind::kGrounding;
      const Vec r = vec.unit();
      std::string text = filler_words.next() + " " + filler_words.next();
      Vec e;
      if (on_topic) {
        text = topic_a + " " + text;
        e = vec.mix({{0.7, &topic}, {1.0, &r}}, o.noise);
      } else {
        e = vec.mix({{1.0, &r}}, o.noise);
      }
      add_fact(std::move(text), kind, std::move(e));
    }
    data.questions.push_back(std::move(q));
  }
  return data;
}

QuestionSplit split_questions(std::span<const Question> questions, std::size_t train_count) {
  train_count = std::min(train_count, questions.size());
  QuestionSplit s;
  s.train.assign(questions.begin(), questions.begin() + static_cast<std::ptrdiff_t>(train_count));
  s.test.assign(questions.begin() + static_cast<std::ptrdiff_t>(train_count), questions.end());
  return s;
}

}  // namespace combexplain
