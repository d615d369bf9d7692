#include "combexplain/commands.hpp"

#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "combexplain/checkpoint.hpp"
#include "combexplain/errors.hpp"
#include "combexplain/io.hpp"
#include "combexplain/synthetic.hpp"
#include "json.hpp"

namespace combexplain {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

const std::vector<std::string> kPathKeys = {"corpus", "eval_corpus", "facts",    "embeddings",
                                            "checkpoint", "out",     "stopwords", "lemmas"};

template <typename T>
T get_as(const json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError("config: bad value for '" + key + "'");
  }
}

fs::path resolve(const fs::path& base, const std::string& value) {
  fs::path p(value);
  return p.is_relative() ? base / p : p;
}

double nonnegative(double v, const char* name) {
  if (!(v >= 0.0)) throw ValidationError(std::string("config: ") + name + " must be >= 0");
  return v;
}

ModelConfig prepared_model(const RunConfig& config) {
  config.validate();
  return config.model;
}

Checkpoint load_compatible_checkpoint(const RunConfig& config, const Workspace& ws) {
  Checkpoint ckpt = load_checkpoint(config.paths.checkpoint, config.model.adam);
  check_compatible(ckpt, ws.store.dimension());
  return ckpt;
}

const fs::path& eval_corpus_path(const RunPaths& p) {
  return p.eval_corpus.empty() ? p.corpus : p.eval_corpus;
}

ordered_json optional_number(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

}  // namespace

void RunConfig::validate() const {
  model.validate();
  if (paths.facts.empty()) throw ValidationError("config: 'facts' path is required");
  if (paths.embeddings.empty()) throw ValidationError("config: 'embeddings' path is required");
  if (sweep_k.empty()) throw ValidationError("config: sweep_k must not be empty");
  for (std::size_t k : sweep_k) {
    if (k == 0) throw ValidationError("config: sweep_k entries must be >= 1");
  }
}

RunConfig parse_run_config(std::string_view json_text, const fs::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("config: expected a JSON object");

  static const std::vector<std::string> kKnown = [] {
    std::vector<std::string> keys = kPathKeys;
    for (const char* k : {"k", "max_abstract", "lambda", "lambda_ans", "lambda_exp", "temperature",
                          "lr", "adapter_lr", "epochs", "batch_size", "seed", "max_grad_norm",
                          "mode", "use_adapter", "theta_init", "weight_decay", "sweep_k"}) {
      keys.emplace_back(k);
    }
    return keys;
  }();
  for (const auto& [key, value] : j.items()) {
    if (std::find(kKnown.begin(), kKnown.end(), key) == kKnown.end()) {
      throw ValidationError("config: unknown key '" + key + "'");
    }
  }

  RunConfig c;
  auto path_field = [&](const std::string& key) -> std::optional<fs::path> {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return resolve(base_dir, get_as<std::string>(j, key));
  };
  c.paths.corpus = path_field("corpus").value_or(fs::path());
  c.paths.eval_corpus = path_field("eval_corpus").value_or(fs::path());
  c.paths.facts = path_field("facts").value_or(fs::path());
  c.paths.embeddings = path_field("embeddings").value_or(fs::path());
  c.paths.checkpoint = path_field("checkpoint").value_or(fs::path());
  c.paths.out = path_field("out").value_or(fs::path());
  c.paths.stopwords = path_field("stopwords");
  c.paths.lemmas = path_field("lemmas");

  ModelConfig& m = c.model;
  auto count = [&](const char* key, std::size_t& dst) {
    if (!j.contains(key)) return;
    const auto v = get_as<long long>(j, key);
    if (v < 0) throw ValidationError(std::string("config: ") + key + " must be >= 0");
    dst = static_cast<std::size_t>(v);
  };
  auto real = [&](const char* key, double& dst) {
    if (j.contains(key)) dst = get_as<double>(j, key);
  };
  count("k", m.k);
  count("max_abstract", m.max_abstract);
  count("epochs", m.epochs);
  count("batch_size", m.batch_size);
  real("lambda", m.lambda);
  real("lambda_ans", m.loss.answer);
  real("lambda_exp", m.loss.explanation);
  real("temperature", m.loss.temperature);
  real("lr", m.lr);
  real("adapter_lr", m.adapter_lr);
  real("max_grad_norm", m.max_grad_norm);
  real("theta_init", m.theta_init);
  real("weight_decay", m.adam.weight_decay);
  if (j.contains("seed")) m.seed = get_as<std::uint64_t>(j, "seed");
  if (j.contains("mode")) m.mode = parse_supervision_mode(get_as<std::string>(j, "mode"));
  if (j.contains("use_adapter")) m.use_adapter = get_as<bool>(j, "use_adapter");
  if (j.contains("sweep_k")) c.sweep_k = get_as<std::vector<std::size_t>>(j, "sweep_k");
  nonnegative(m.max_grad_norm, "max_grad_norm");
  nonnegative(m.adam.weight_decay, "weight_decay");
  if (!(m.theta_init >= 0.0 && m.theta_init <= 1.0)) {
    throw ValidationError("config: theta_init must be in [0, 1]");
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), path.parent_path());
}

std::string run_config_json(const RunConfig& c) {
  ordered_json j;
  auto put_path = [&](const char* key, const fs::path& p) {
    j[key] = p.empty() ? ordered_json(nullptr) : ordered_json(p.generic_string());
  };
  put_path("corpus", c.paths.corpus);
  put_path("eval_corpus", c.paths.eval_corpus);
  put_path("facts", c.paths.facts);
  put_path("embeddings", c.paths.embeddings);
  put_path("checkpoint", c.paths.checkpoint);
  put_path("out", c.paths.out);
  put_path("stopwords", c.paths.stopwords.value_or(fs::path()));
  put_path("lemmas", c.paths.lemmas.value_or(fs::path()));
  const ModelConfig& m = c.model;
  j["k"] = m.k;
  j["max_abstract"] = m.max_abstract;
  j["lambda"] = m.lambda;
  j["lambda_ans"] = m.loss.answer;
  j["lambda_exp"] = m.loss.explanation;
  j["temperature"] = m.loss.temperature;
  j["lr"] = m.lr;
  j["adapter_lr"] = m.adapter_lr;
  j["epochs"] = m.epochs;
  j["batch_size"] = m.batch_size;
  j["seed"] = m.seed;
  j["max_grad_norm"] = m.max_grad_norm;
  j["mode"] = std::string(to_string(m.mode));
  j["use_adapter"] = m.use_adapter;
  j["theta_init"] = m.theta_init;
  j["weight_decay"] = m.adam.weight_decay;
  j["sweep_k"] = c.sweep_k;
  return j.dump(2) + "\n";
}

Workspace load_workspace(const RunPaths& paths) {
  Workspace ws;
  if (paths.stopwords || paths.lemmas) {
    auto stop = paths.stopwords ? load_stopwords(*paths.stopwords) : default_stopwords();
    auto lemmas = paths.lemmas ? load_lemma_dictionary(*paths.lemmas)
                               : std::unordered_map<std::string, std::string>{};
    ws.extractor = TermExtractor(std::move(stop),
                                 std::make_shared<SuffixStripNormalizer>(std::move(lemmas)));
  }
  ws.bank = load_fact_bank(paths.facts, ws.extractor);
  ws.store = load_embeddings(paths.embeddings);
  return ws;
}

TrainOutcome cmd_train(const RunConfig& config, std::ostream& log) {
  const ModelConfig model = prepared_model(config);
  if (config.paths.corpus.empty()) throw ValidationError("config: 'corpus' path is required");
  if (config.paths.checkpoint.empty()) throw ValidationError("no checkpoint path given");
  if (config.paths.out.empty()) throw ValidationError("no output directory given");
  const Workspace ws = load_workspace(config.paths);
  const auto corpus = load_corpus(config.paths.corpus);

  TrainingState state = initial_training_state(model, ws.store.dimension());
  TrainOutcome outcome;
  outcome.trace = train(corpus, ws.bank, ws.store, ws.extractor, model, state,
                        [&](const EpochStats& e, const TrainingState&) {
                          log << "epoch " << e.epoch << " L_ans=" << format_double(e.answer_loss)
                              << " L_exp=" << format_double(e.explanation_loss)
                              << " L=" << format_double(e.total_loss) << '\n';
                        });
  outcome.checkpoint = config.paths.checkpoint;
  save_checkpoint(outcome.checkpoint, Checkpoint{state, model.seed});

  outcome.trace_csv = config.paths.out / "trace.csv";
  write_file_atomic(outcome.trace_csv, [&](std::ostream& out) {
    out << "epoch,L_ans,L_exp,L,seed\n";
    for (const auto& e : outcome.trace) {
      out << e.epoch << ',' << format_double(e.answer_loss) << ','
          << format_double(e.explanation_loss) << ',' << format_double(e.total_loss) << ','
          << model.seed << '\n';
    }
  });
  return outcome;
}

std::string report_json(const MetricsReport& r, const RunConfig* config) {
  ordered_json j;
  j["format"] = "combexplain-report";
  if (config) j["seed"] = config->model.seed;
  ordered_json m;
  m["questions"] = r.questions;
  m["accuracy"] = r.accuracy;
  m["precision_at_1"] = r.precision_at_1;
  m["precision_at_2"] = r.precision_at_2;
  m["faithfulness"] = r.faithfulness;
  m["consistency_at_1"] = optional_number(r.consistency_at_1);
  m["consistency_at_2"] = optional_number(r.consistency_at_2);
  m["consistency_at_3"] = optional_number(r.consistency_at_3);
  j["metrics"] = m;
  if (config) j["config"] = ordered_json::parse(run_config_json(*config));
  return j.dump(2) + "\n";
}

EvalOutcome cmd_eval(const RunConfig& config) {
  const ModelConfig model = prepared_model(config);
  if (config.paths.out.empty()) throw ValidationError("no output directory given");
  const Workspace ws = load_workspace(config.paths);
  const Checkpoint ckpt = load_compatible_checkpoint(config, ws);
  const auto questions = load_corpus(eval_corpus_path(config.paths));

  EvalOutcome outcome;
  outcome.records = evaluate(questions, ws.bank, ws.store, ws.extractor, ckpt.state.params, model);
  outcome.report = compute_report(outcome.records);
  outcome.predictions_jsonl = config.paths.out / "predictions.jsonl";
  save_predictions(outcome.predictions_jsonl, outcome.records);
  outcome.report_json = config.paths.out / "report.json";
  const std::string text = report_json(outcome.report, &config);
  write_file_atomic(outcome.report_json, [&](std::ostream& out) { out << text; });
  return outcome;
}

std::vector<SweepPoint> cmd_sweep_k(const RunConfig& config, std::span<const std::size_t> ks) {
  ModelConfig model = prepared_model(config);
  if (ks.empty()) throw ValidationError("empty k list");
  if (config.paths.out.empty()) throw ValidationError("no output directory given");
  const Workspace ws = load_workspace(config.paths);
  const Checkpoint ckpt = load_compatible_checkpoint(config, ws);
  const auto questions = load_corpus(eval_corpus_path(config.paths));

  std::vector<SweepPoint> points;
  for (std::size_t k : ks) {
    if (k == 0) throw ValidationError("k must be >= 1");
    model.k = k;
    const auto records =
        evaluate(questions, ws.bank, ws.store, ws.extractor, ckpt.state.params, model);
    points.push_back({k, accuracy(records)});
  }
  write_file_atomic(config.paths.out / "sweep_k.csv", [&](std::ostream& out) {
    out << "k,accuracy,seed\n";
    for (const auto& p : points) {
      out << p.k << ',' << format_double(p.accuracy) << ',' << model.seed << '\n';
    }
  });
  return points;
}

void cmd_explain(const RunConfig& config, std::string_view question_id, std::ostream& out) {
  const ModelConfig model = prepared_model(config);
  const Workspace ws = load_workspace(config.paths);
  const Checkpoint ckpt = load_compatible_checkpoint(config, ws);
  const auto questions = load_corpus(eval_corpus_path(config.paths));
  const auto it = std::find_if(questions.begin(), questions.end(),
                               [&](const Question& q) { return q.id == question_id; });
  if (it == questions.end()) {
    throw ValidationError("unknown question id '" + std::string(question_id) + "'");
  }
  const Question& q = *it;
  const PreparedQuestion pq = prepare_question(q, ws.bank, ws.store, ws.extractor, model.k);
  const QuestionForward fw = forward(pq, ws.store, ckpt.state.params, model);

  out << "question " << q.id << ": " << q.stem << '\n';
  for (std::size_t c = 0; c < q.candidates.size(); ++c) {
    out << "  " << q.candidates[c].label << "  score " << format_double(fw.scores[c])
        << "  p " << format_double(fw.probabilities[c]) << "  " << q.candidates[c].text << '\n';
  }
  const auto& predicted = q.candidates[fw.predicted];
  out << "predicted: " << predicted.label << " (" << predicted.text << ")";
  out << (fw.predicted == pq.gold ? "  correct" : "  wrong, gold " + q.answer) << '\n';
  const auto facts = ranked_explanation(fw.candidates[fw.predicted]);
  if (facts.empty()) {
    out << "no explanation selected\n";
    return;
  }
  out << "explanation:\n";
  for (const auto& [id, weight] : facts) {
    const Fact& f = ws.bank.at(id);
    out << "  " << id << "  " << format_double(weight) << "  [" << to_string(f.kind) << "] "
        << f.text << '\n';
  }
}

std::string cmd_metrics(const fs::path& predictions) {
  const auto records = load_predictions(predictions);
  return report_json(compute_report(records), nullptr);
}

void cmd_synth(const SynthOptions& options, const fs::path& out_dir) {
  if (options.train > options.questions) {
    throw ValidationError("synth: train split larger than the corpus");
  }
  SyntheticOptions so;
  so.questions = options.questions;
  so.dimension = options.dimension;
  so.seed = options.seed;
  SyntheticDataset data = generate_synthetic(so);
  const auto split = split_questions(data.questions, options.train);
  save_corpus(out_dir / "train.jsonl", split.train);
  save_corpus(out_dir / "test.jsonl", split.test);
  save_fact_bank(out_dir / "facts.jsonl", FactBank(std::move(data.facts)));
  save_embeddings(out_dir / "embeddings.txt", data.store);

  RunConfig c;
  c.paths.corpus = "train.jsonl";
  c.paths.eval_corpus = "test.jsonl";
  c.paths.facts = "facts.jsonl";
  c.paths.embeddings = "embeddings.txt";
  c.paths.checkpoint = "run/checkpoint.json";
  c.paths.out = "run";
  c.model.lr = 1e-2;
  c.model.adapter_lr = 1e-2;
  const std::string text = run_config_json(c);
  write_file_atomic(out_dir / "config.json", [&](std::ostream& out) { out << text; });
}

}  // namespace combexplain
