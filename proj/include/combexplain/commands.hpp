#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "combexplain/metrics.hpp"
#include "combexplain/model.hpp"

namespace combexplain {

// Input and output locations of a run. Relative paths in a config file are
// resolved against the file's directory.
struct RunPaths {
  std::filesystem::path corpus;       // training questions
  std::filesystem::path eval_corpus;  // defaults to `corpus`
  std::filesystem::path facts;
  std::filesystem::path embeddings;
  std::filesystem::path checkpoint;
  std::filesystem::path out;
  std::optional<std::filesystem::path> stopwords;
  std::optional<std::filesystem::path> lemmas;
};

inline const std::vector<std::size_t> kDefaultSweepK = {1, 2, 3, 5, 10, 20, 30, 40, 50};

struct RunConfig {
  RunPaths paths;
  ModelConfig model;
  std::vector<std::size_t> sweep_k = kDefaultSweepK;

  // Throws ValidationError.
  void validate() const;
};

// Throws ValidationError on unknown keys or bad values, IoError if unreadable.
RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);
// Canonical JSON form; paths are written as given.
std::string run_config_json(const RunConfig& config);

// Corpus-independent inputs shared by every command.
struct Workspace {
  TermExtractor extractor;
  FactBank bank;
  EmbeddingStore store{1};
};
Workspace load_workspace(const RunPaths& paths);

struct TrainOutcome {
  std::vector<EpochStats> trace;
  std::filesystem::path checkpoint;
  std::filesystem::path trace_csv;
};
// Trains from scratch, writes the checkpoint and <out>/trace.csv.
TrainOutcome cmd_train(const RunConfig& config, std::ostream& log);

struct EvalOutcome {
  std::vector<PredictionRecord> records;
  MetricsReport report;
  std::filesystem::path report_json;
  std::filesystem::path predictions_jsonl;
};
// Evaluates the checkpoint on the eval corpus; writes <out>/report.json and
// <out>/predictions.jsonl.
EvalOutcome cmd_eval(const RunConfig& config);

struct SweepPoint {
  std::size_t k = 0;
  double accuracy = 0.0;
};
// One evaluation per k; writes <out>/sweep_k.csv.
std::vector<SweepPoint> cmd_sweep_k(const RunConfig& config, std::span<const std::size_t> ks);

// Candidate scores, the predicted answer and its selected facts.
void cmd_explain(const RunConfig& config, std::string_view question_id, std::ostream& out);

// Metrics recomputed from a predictions file, as report JSON.
std::string cmd_metrics(const std::filesystem::path& predictions);

std::string report_json(const MetricsReport& report, const RunConfig* config);

// Writes train.jsonl, test.jsonl, facts.jsonl, embeddings.txt and config.json
// for a generated planted corpus.
struct SynthOptions {
  std::size_t questions = 200;
  std::size_t train = 100;
  std::size_t dimension = 64;
  std::uint64_t seed = 7;
};
void cmd_synth(const SynthOptions& options, const std::filesystem::path& out_dir);

}  // namespace combexplain
