#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "combexplain/corpus.hpp"
#include "combexplain/graph.hpp"
#include "combexplain/ilp.hpp"
#include "combexplain/metrics.hpp"
#include "combexplain/synthetic.hpp"

namespace testing {

using namespace combexplain;

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(COMBEXPLAIN_FIXTURES) / name;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("combexplain_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Random weight matrix with the sign pattern of the case table, or arbitrary
// signs when `any_sign` is set.
inline WeightMatrix random_weights(std::mt19937_64& rng, std::size_t nodes, bool any_sign = false) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  WeightMatrix w;
  w.kinds.push_back(NodeKind::kHypothesis);
  w.ids.push_back("h");
  for (std::size_t j = 1; j < nodes; ++j) {
    w.kinds.push_back(u(rng) < 0.5 ? NodeKind::kAbstract : NodeKind::kGrounding);
    w.ids.push_back("f" + std::to_string(j));
  }
  w.entries = Matrix(nodes, nodes, 0.0);
  for (std::size_t j = 0; j < nodes; ++j) {
    for (std::size_t k = j + 1; k < nodes; ++k) {
      double v = u(rng);
      if (any_sign) {
        v = 2.0 * v - 1.0;
      } else if (j > 0 && w.kinds[j] == w.kinds[k]) {
        v = -v;
      }
      // Some exact zeros and repeated values so ties occur.
      if (u(rng) < 0.1) v = 0.0;
      if (u(rng) < 0.1) v = std::round(v * 4.0) / 4.0;
      w.entries(j, k) = w.entries(k, j) = v;
    }
  }
  return w;
}

// Best subgraph weight by direct enumeration over fact subsets containing the
// hypothesis, honouring the abstract cap. Independent of the ILP encoding.
inline double best_subgraph_weight(const WeightMatrix& w, std::size_t max_abstract) {
  const std::size_t facts = w.size() - 1;
  double best = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << facts); ++mask) {
    std::vector<std::size_t> nodes = {0};
    std::size_t abstract = 0;
    for (std::size_t f = 0; f < facts; ++f) {
      if (mask >> f & 1) {
        nodes.push_back(f + 1);
        if (w.kinds[f + 1] == NodeKind::kAbstract) ++abstract;
      }
    }
    if (abstract > max_abstract) continue;
    double total = 0.0;
    for (std::size_t a = 0; a < nodes.size(); ++a) {
      for (std::size_t b = a + 1; b < nodes.size(); ++b) total += w(nodes[a], nodes[b]);
    }
    best = std::max(best, total);
  }
  return best;
}

// Metric formulas evaluated directly over std::set, one question at a time.
namespace oracle {

inline double accuracy(const std::vector<PredictionRecord>& rs) {
  double hits = 0;
  for (const auto& r : rs) hits += r.predicted == r.gold ? 1 : 0;
  return hits / static_cast<double>(rs.size());
}

inline double precision_at_k(const std::vector<PredictionRecord>& rs, std::size_t k) {
  double sum = 0;
  for (const auto& r : rs) {
    const std::set<std::string> gold(r.gold_explanation_ids.begin(), r.gold_explanation_ids.end());
    std::size_t hit = 0;
    for (std::size_t i = 0; i < r.explanation_ids.size() && i < k; ++i) {
      hit += gold.count(r.explanation_ids[i]);
    }
    sum += static_cast<double>(hit) / static_cast<double>(k);
  }
  return sum / static_cast<double>(rs.size());
}

inline double faithfulness(const std::vector<PredictionRecord>& rs) {
  std::set<std::string> qc, qw, q1, q0;
  for (const auto& r : rs) {
    (r.predicted == r.gold ? qc : qw).insert(r.qid);
    bool any = false;
    for (const auto& id : r.explanation_ids) {
      any = any || std::find(r.gold_explanation_ids.begin(), r.gold_explanation_ids.end(), id) !=
                       r.gold_explanation_ids.end();
    }
    (any ? q1 : q0).insert(r.qid);
  }
  std::set<std::string> all, wrong_none, correct_some;
  std::set_union(qc.begin(), qc.end(), qw.begin(), qw.end(), std::inserter(all, all.end()));
  std::set_intersection(qw.begin(), qw.end(), q0.begin(), q0.end(),
                        std::inserter(wrong_none, wrong_none.end()));
  std::set_intersection(qc.begin(), qc.end(), q1.begin(), q1.end(),
                        std::inserter(correct_some, correct_some.end()));
  return static_cast<double>(wrong_none.size() + correct_some.size()) /
         static_cast<double>(all.size());
}

inline std::optional<double> consistency_at_k(const std::vector<PredictionRecord>& rs,
                                              std::size_t k) {
  std::map<std::string, std::set<std::string>> gold;
  for (const auto& r : rs) gold[r.qid].insert(r.gold_explanation_ids.begin(),
                                               r.gold_explanation_ids.end());
  std::size_t num = 0, den = 0;
  for (const auto& t : rs) {
    const std::set<std::string> mine(t.explanation_ids.begin(), t.explanation_ids.end());
    for (const auto& [peer, peer_gold] : gold) {
      if (peer == t.qid) continue;
      std::set<std::string> overlap;
      std::set_intersection(gold[t.qid].begin(), gold[t.qid].end(), peer_gold.begin(),
                            peer_gold.end(), std::inserter(overlap, overlap.end()));
      if (overlap.size() < k) continue;
      den += overlap.size();
      for (const auto& f : overlap) num += mine.count(f);
    }
  }
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace oracle

// Random prediction records over a small shared fact vocabulary so that gold
// overlaps between questions are common.
inline std::vector<PredictionRecord> random_records(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> n_records(1, 12), n_facts(0, 5), fact(0, 7), label(0, 3);
  const char* labels[] = {"A", "B", "C", "D"};
  auto facts = [&] {
    std::vector<std::string> out;
    const int n = n_facts(rng);
    for (int i = 0; i < n; ++i) {
      std::string id = "f" + std::to_string(fact(rng));
      if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
    }
    return out;
  };
  std::vector<PredictionRecord> rs(static_cast<std::size_t>(n_records(rng)));
  for (std::size_t i = 0; i < rs.size(); ++i) {
    rs[i].qid = "q" + std::to_string(i);
    rs[i].predicted = labels[label(rng)];
    rs[i].gold = labels[label(rng)];
    rs[i].scores = {{"A", 0.5}, {"B", -0.25}};
    rs[i].explanation_ids = facts();
    rs[i].gold_explanation_ids = facts();
  }
  return rs;
}

// Synthetic corpus with terms extracted, ready for the model.
struct PlantedData {
  std::vector<Question> questions;
  FactBank bank;
  EmbeddingStore store{1};
  TermExtractor extractor;
};

inline PlantedData planted(const SyntheticOptions& options) {
  PlantedData d;
  auto data = generate_synthetic(options);
  for (auto& f : data.facts) f.terms = d.extractor.extract(f.text);
  d.questions = std::move(data.questions);
  d.bank = FactBank(std::move(data.facts));
  d.store = std::move(data.store);
  return d;
}

}  // namespace testing
