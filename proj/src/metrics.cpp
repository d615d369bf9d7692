#include "combexplain/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <unordered_set>

#include "combexplain/errors.hpp"
#include "combexplain/io.hpp"
#include "json.hpp"

namespace combexplain {

namespace {

void require_nonempty(std::span<const PredictionRecord> records, const char* metric) {
  if (records.empty()) throw std::invalid_argument(std::string(metric) + ": no records");
}

bool has_gold_fact(const PredictionRecord& r) {
  return std::any_of(r.explanation_ids.begin(), r.explanation_ids.end(), [&](const auto& id) {
    return std::find(r.gold_explanation_ids.begin(), r.gold_explanation_ids.end(), id) !=
           r.gold_explanation_ids.end();
  });
}

}  // namespace

double accuracy(std::span<const PredictionRecord> records) {
  require_nonempty(records, "accuracy");
  const auto hits = std::count_if(records.begin(), records.end(),
                                  [](const PredictionRecord& r) { return r.correct(); });
  return static_cast<double>(hits) / static_cast<double>(records.size());
}

double precision_at_k(std::span<const PredictionRecord> records, std::size_t k) {
  if (k == 0) throw std::invalid_argument("precision_at_k: K must be positive");
  require_nonempty(records, "precision_at_k");
  double total = 0.0;
  for (const auto& r : records) {
    const std::unordered_set<std::string> gold(r.gold_explanation_ids.begin(),
                                               r.gold_explanation_ids.end());
    const std::size_t top = std::min(k, r.explanation_ids.size());
    std::size_t hits = 0;
    for (std::size_t i = 0; i < top; ++i) hits += gold.contains(r.explanation_ids[i]);
    total += static_cast<double>(hits) / static_cast<double>(k);
  }
  return total / static_cast<double>(records.size());
}

FaithfulnessTally faithfulness_tally(std::span<const PredictionRecord> records) {
  FaithfulnessTally t;
  for (const auto& r : records) {
    const bool ok = r.correct();
    const bool supported = has_gold_fact(r);
    (ok ? t.correct : t.wrong).push_back(r.qid);
    (supported ? t.with_gold_fact : t.without_gold_fact).push_back(r.qid);
    if (ok && supported) ++t.correct_with_gold;
    if (!ok && !supported) ++t.wrong_without_gold;
  }
  return t;
}

double faithfulness(std::span<const PredictionRecord> records) {
  require_nonempty(records, "faithfulness");
  const auto t = faithfulness_tally(records);
  return static_cast<double>(t.correct_with_gold + t.wrong_without_gold) /
         static_cast<double>(t.correct.size() + t.wrong.size());
}

GoldExplanationMap gold_map_from_records(std::span<const PredictionRecord> records) {
  GoldExplanationMap gold;
  for (const auto& r : records) gold[r.qid] = r.gold_explanation_ids;
  return gold;
}

std::optional<double> explanation_consistency_at_k(std::span<const PredictionRecord> records,
                                                   const GoldExplanationMap& gold,
                                                   std::size_t k) {
  if (k == 0) throw std::invalid_argument("explanation_consistency_at_k: K must be positive");
  // Peers in a fixed order so the floating-point sums do not depend on hashing.
  std::vector<std::pair<std::string, std::unordered_set<std::string>>> peers;
  peers.reserve(gold.size());
  for (const auto& [qid, ids] : gold) peers.emplace_back(qid, std::unordered_set(ids.begin(), ids.end()));
  std::sort(peers.begin(), peers.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  std::size_t numerator = 0;
  std::size_t denominator = 0;
  for (const auto& r : records) {
    auto own = gold.find(r.qid);
    const auto& own_gold = own != gold.end() ? own->second : r.gold_explanation_ids;
    const std::unordered_set<std::string> selected(r.explanation_ids.begin(),
                                                   r.explanation_ids.end());
    for (const auto& [peer_id, peer_gold] : peers) {
      if (peer_id == r.qid) continue;
      std::size_t overlap = 0;
      std::size_t retrieved = 0;
      for (const auto& id : own_gold) {
        if (!peer_gold.contains(id)) continue;
        ++overlap;
        retrieved += selected.contains(id);
      }
      if (overlap < k) continue;
      numerator += retrieved;
      denominator += overlap;
    }
  }
  if (denominator == 0) return std::nullopt;
  return static_cast<double>(numerator) / static_cast<double>(denominator);
}

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::vector<std::string> string_array(const json& j, const char* key) {
  std::vector<std::string> out;
  auto it = j.find(key);
  if (it == j.end()) return out;
  if (!it->is_array()) throw std::invalid_argument(std::string("\"") + key + "\" must be an array");
  for (const auto& e : *it) out.push_back(e.get<std::string>());
  return out;
}

}  // namespace

std::vector<PredictionRecord> parse_predictions(std::istream& in, const std::string& source) {
  std::vector<PredictionRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      PredictionRecord r;
      r.qid = j.at("qid").get<std::string>();
      r.predicted = j.at("predicted").get<std::string>();
      r.gold = j.at("gold").get<std::string>();
      if (auto s = j.find("scores"); s != j.end()) {
        for (const auto& [label, value] : s->items()) r.scores[label] = value.get<double>();
      }
      r.explanation_ids = string_array(j, "explanation_ids");
      r.gold_explanation_ids = string_array(j, "gold_explanation_ids");
      out.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw ParseError(source, lineno, e.what());
    }
  }
  return out;
}

std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_predictions(in, path.string());
}

void write_predictions(std::ostream& out, std::span<const PredictionRecord> records) {
  for (const auto& r : records) {
    ordered_json j;
    j["qid"] = r.qid;
    j["predicted"] = r.predicted;
    j["gold"] = r.gold;
    j["scores"] = ordered_json::object();
    for (const auto& [label, value] : r.scores) j["scores"][label] = value;
    j["explanation_ids"] = r.explanation_ids;
    j["gold_explanation_ids"] = r.gold_explanation_ids;
    out << j.dump() << '\n';
  }
}

void save_predictions(const std::filesystem::path& path,
                      std::span<const PredictionRecord> records) {
  write_file_atomic(path, [&](std::ostream& out) { write_predictions(out, records); });
}

MetricsReport compute_report(std::span<const PredictionRecord> records) {
  MetricsReport r;
  r.questions = records.size();
  r.accuracy = accuracy(records);
  r.precision_at_1 = precision_at_k(records, 1);
  r.precision_at_2 = precision_at_k(records, 2);
  r.faithfulness = faithfulness(records);
  const auto gold = gold_map_from_records(records);
  r.consistency_at_1 = explanation_consistency_at_k(records, gold, 1);
  r.consistency_at_2 = explanation_consistency_at_k(records, gold, 2);
  r.consistency_at_3 = explanation_consistency_at_k(records, gold, 3);
  return r;
}

}  // namespace combexplain
