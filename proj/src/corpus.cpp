#include "combexplain/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "combexplain/errors.hpp"
#include "combexplain/io.hpp"
#include "json.hpp"

namespace combexplain {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::size_t Question::answer_index() const {
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i].label == answer) return i;
  }
  throw ValidationError("question " + id + ": answer '" + answer + "' is not a candidate label");
}

void validate(const Question& q) {
  if (q.id.empty()) throw ValidationError("question with empty id");
  if (q.candidates.size() < 2) {
    throw ValidationError("question " + q.id + ": needs at least 2 candidates");
  }
  std::unordered_set<std::string> labels;
  for (const auto& c : q.candidates) {
    if (c.label.empty()) throw ValidationError("question " + q.id + ": empty candidate label");
    if (!labels.insert(c.label).second) {
      throw ValidationError("question " + q.id + ": duplicate candidate label '" + c.label + "'");
    }
  }
  if (!labels.contains(q.answer)) {
    throw ValidationError("question " + q.id + ": answer '" + q.answer +
                          "' is not a candidate label");
  }
  std::unordered_set<std::string> expl;
  for (const auto& e : q.explanation_ids) {
    if (!expl.insert(e).second) {
      throw ValidationError("question " + q.id + ": duplicate explanation id '" + e + "'");
    }
  }
}

std::string hypothesis_sentence_id(std::string_view question_id, std::string_view label) {
  std::string out(question_id);
  out += '#';
  out += label;
  return out;
}

std::string Hypothesis::sentence_id() const {
  return hypothesis_sentence_id(question_id, candidate_label);
}

std::string normalize_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out += ' ';
      pending_space = false;
      out += c;
    }
  }
  return out;
}

std::vector<Hypothesis> build_hypotheses(const Question& q, const TermExtractor& extractor) {
  validate(q);
  std::vector<Hypothesis> out;
  out.reserve(q.candidates.size());
  for (const auto& c : q.candidates) {
    Hypothesis h;
    h.question_id = q.id;
    h.candidate_label = c.label;
    h.text = normalize_whitespace(q.stem + " " + c.text);
    h.terms = extractor.extract(h.text);
    out.push_back(std::move(h));
  }
  return out;
}

std::vector<Hypothesis> build_hypotheses(const Question& q) {
  static const TermExtractor extractor;
  return build_hypotheses(q, extractor);
}

std::string_view to_string(FactKind kind) {
  return kind == FactKind::kAbstract ? "abstract" : "grounding";
}

FactKind parse_fact_kind(std::string_view text) {
  if (text == "abstract") return FactKind::kAbstract;
  if (text == "grounding") return FactKind::kGrounding;
  throw ValidationError("unknown fact kind '" + std::string(text) +
                        "' (expected abstract or grounding)");
}

FactBank::FactBank(std::vector<Fact> facts) : facts_(std::move(facts)) {
  index_.reserve(facts_.size());
  for (std::size_t i = 0; i < facts_.size(); ++i) {
    if (!index_.emplace(facts_[i].id, i).second) {
      throw ValidationError("duplicate fact id '" + facts_[i].id + "'");
    }
    if (facts_[i].kind == FactKind::kGrounding) {
      ++grounding_;
    } else {
      ++abstract_;
    }
  }
}

const Fact* FactBank::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &facts_[it->second];
}

const Fact& FactBank::at(std::string_view id) const {
  if (const Fact* f = find(id)) return *f;
  throw ValidationError("unknown fact id '" + std::string(id) + "'");
}

EmbeddingStore::EmbeddingStore(std::size_t dimension) : dimension_(dimension) {
  if (dimension == 0) throw ValidationError("embedding dimension must be positive");
}

void EmbeddingStore::add(std::string id, std::vector<double> vector) {
  if (id.empty() || id.find_first_of("\t\n") != std::string::npos) {
    throw ValidationError("invalid embedding id '" + id + "'");
  }
  if (vector.size() != dimension_) {
    throw ValidationError("embedding '" + id + "': expected " + std::to_string(dimension_) +
                          " components, got " + std::to_string(vector.size()));
  }
  bool nonzero = false;
  for (double v : vector) {
    if (!std::isfinite(v)) throw ValidationError("embedding '" + id + "': non-finite component");
    nonzero = nonzero || v != 0.0;
  }
  if (!nonzero) throw ValidationError("embedding '" + id + "': zero vector");
  auto [it, inserted] = vectors_.emplace(id, std::move(vector));
  if (!inserted) throw ValidationError("embedding '" + id + "': duplicate id");
  order_.push_back(std::move(id));
}

bool EmbeddingStore::contains(std::string_view id) const {
  return vectors_.contains(std::string(id));
}

const std::vector<double>* EmbeddingStore::find(std::string_view id) const {
  auto it = vectors_.find(std::string(id));
  return it == vectors_.end() ? nullptr : &it->second;
}

std::span<const double> EmbeddingStore::at(std::string_view id) const {
  if (const auto* v = find(id)) return *v;
  throw ValidationError("no embedding for sentence '" + std::string(id) + "'");
}

namespace {

std::string require_string(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw std::invalid_argument(std::string("missing string field \"") + key + "\"");
  }
  return it->get<std::string>();
}

Question question_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("expected a JSON object");
  Question q;
  q.id = require_string(j, "id");
  q.stem = require_string(j, "stem");
  q.answer = require_string(j, "answer");
  auto cands = j.find("candidates");
  if (cands == j.end() || !cands->is_array()) {
    throw std::invalid_argument("missing array field \"candidates\"");
  }
  for (const auto& c : *cands) {
    if (!c.is_object()) throw std::invalid_argument("candidate must be an object");
    q.candidates.push_back({require_string(c, "label"), require_string(c, "text")});
  }
  if (auto ex = j.find("explanation_ids"); ex != j.end()) {
    if (!ex->is_array()) throw std::invalid_argument("\"explanation_ids\" must be an array");
    for (const auto& e : *ex) {
      if (!e.is_string()) throw std::invalid_argument("explanation id must be a string");
      q.explanation_ids.push_back(e.get<std::string>());
    }
  }
  return q;
}

template <typename F>
void for_each_jsonl(std::istream& in, const std::string& source, F&& fn) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(source, lineno, e.what());
    }
    try {
      fn(j, lineno);
    } catch (const ValidationError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(source, lineno, e.what());
    }
  }
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

}  // namespace

std::vector<Question> parse_corpus(std::istream& in, const std::string& source) {
  std::vector<Question> questions;
  std::unordered_set<std::string> seen;
  for_each_jsonl(in, source, [&](const json& j, std::size_t lineno) {
    Question q = question_from_json(j);
    try {
      validate(q);
    } catch (const ValidationError& e) {
      throw ParseError(source, lineno, e.what());
    }
    if (!seen.insert(q.id).second) {
      throw ValidationError(source + ": duplicate question id '" + q.id + "'");
    }
    questions.push_back(std::move(q));
  });
  return questions;
}

std::vector<Question> load_corpus(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_corpus(in, path.string());
}

void write_corpus(std::ostream& out, std::span<const Question> questions) {
  for (const auto& q : questions) {
    ordered_json j;
    j["id"] = q.id;
    j["stem"] = q.stem;
    j["candidates"] = ordered_json::array();
    for (const auto& c : q.candidates) {
      ordered_json cj;
      cj["label"] = c.label;
      cj["text"] = c.text;
      j["candidates"].push_back(std::move(cj));
    }
    j["answer"] = q.answer;
    j["explanation_ids"] = q.explanation_ids;
    out << j.dump() << '\n';
  }
}

void save_corpus(const std::filesystem::path& path, std::span<const Question> questions) {
  write_file_atomic(path, [&](std::ostream& out) { write_corpus(out, questions); });
}

FactBank parse_fact_bank(std::istream& in, const TermExtractor& extractor,
                         const std::string& source) {
  std::vector<Fact> facts;
  std::unordered_set<std::string> seen;
  for_each_jsonl(in, source, [&](const json& j, std::size_t lineno) {
    if (!j.is_object()) throw std::invalid_argument("expected a JSON object");
    Fact f;
    f.id = require_string(j, "id");
    f.text = require_string(j, "text");
    try {
      f.kind = parse_fact_kind(require_string(j, "kind"));
    } catch (const ValidationError& e) {
      throw ParseError(source, lineno, "fact '" + f.id + "': " + e.what());
    }
    if (!seen.insert(f.id).second) {
      throw ValidationError(source + ": duplicate fact id '" + f.id + "'");
    }
    f.terms = extractor.extract(f.text);
    facts.push_back(std::move(f));
  });
  return FactBank(std::move(facts));
}

FactBank load_fact_bank(const std::filesystem::path& path, const TermExtractor& extractor) {
  auto in = open_input(path);
  return parse_fact_bank(in, extractor, path.string());
}

FactBank load_fact_bank(const std::filesystem::path& path) {
  return load_fact_bank(path, TermExtractor());
}

void write_fact_bank(std::ostream& out, const FactBank& bank) {
  for (const auto& f : bank.facts()) {
    ordered_json j;
    j["id"] = f.id;
    j["text"] = f.text;
    j["kind"] = std::string(to_string(f.kind));
    out << j.dump() << '\n';
  }
}

void save_fact_bank(const std::filesystem::path& path, const FactBank& bank) {
  write_file_atomic(path, [&](std::ostream& out) { write_fact_bank(out, bank); });
}

namespace {

bool parse_header_field(std::string_view field, std::string_view key, std::size_t& out) {
  if (field.substr(0, key.size()) != key) return false;
  const auto digits = field.substr(key.size());
  if (digits.empty()) return false;
  std::size_t value = 0;
  for (char c : digits) {
    if (c < '0' || c > '9') return false;
    value = value * 10 + static_cast<std::size_t>(c - '0');
  }
  out = value;
  return true;
}

}  // namespace

EmbeddingStore parse_embeddings(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source, 1, "missing header line");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::size_t count = 0;
  std::size_t dim = 0;
  {
    std::istringstream header(line);
    std::string ids_field, dim_field, extra;
    header >> ids_field >> dim_field;
    if (!parse_header_field(ids_field, "ids=", count) ||
        !parse_header_field(dim_field, "dim=", dim) || (header >> extra) || dim == 0) {
      throw ParseError(source, 1, "expected header \"ids=<count> dim=<d>\"");
    }
  }
  EmbeddingStore store(dim);
  std::size_t lineno = 1;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw ParseError(source, lineno, "expected \"<id><TAB><floats>\"");
    }
    std::string id = line.substr(0, tab);
    values.clear();
    std::string_view rest(line);
    rest.remove_prefix(tab + 1);
    while (!rest.empty()) {
      const auto start = rest.find_first_not_of(' ');
      if (start == std::string_view::npos) break;
      rest.remove_prefix(start);
      const auto end = rest.find(' ');
      const auto token = rest.substr(0, end);
      double v = 0.0;
      if (!parse_double(token, v)) {
        throw ParseError(source, lineno, "embedding '" + id + "': bad number '" +
                                             std::string(token) + "'");
      }
      values.push_back(v);
      rest.remove_prefix(end == std::string_view::npos ? rest.size() : end);
    }
    try {
      store.add(std::move(id), values);
    } catch (const ValidationError& e) {
      throw ParseError(source, lineno, e.what());
    }
  }
  if (store.size() != count) {
    throw ParseError(source, lineno, "header declares " + std::to_string(count) +
                                         " vectors, file has " + std::to_string(store.size()));
  }
  return store;
}

EmbeddingStore load_embeddings(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_embeddings(in, path.string());
}

void write_embeddings(std::ostream& out, const EmbeddingStore& store) {
  out << "ids=" << store.size() << " dim=" << store.dimension() << '\n';
  for (const auto& id : store.ids()) {
    out << id << '\t';
    const auto v = store.at(id);
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) out << ' ';
      out << format_double(v[i]);
    }
    out << '\n';
  }
}

void save_embeddings(const std::filesystem::path& path, const EmbeddingStore& store) {
  write_file_atomic(path, [&](std::ostream& out) { write_embeddings(out, store); });
}

}  // namespace combexplain
