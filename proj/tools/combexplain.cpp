#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "combexplain/commands.hpp"
#include "combexplain/errors.hpp"
#include "combexplain/io.hpp"

namespace ce = combexplain;

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kIo = 2;

struct Overrides {
  std::string config;
  std::string checkpoint;
  std::string out;
  std::optional<std::size_t> k;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
};

void add_common(CLI::App* cmd, Overrides& o, bool with_k = true) {
  cmd->add_option("--config", o.config, "run config JSON")->required();
  cmd->add_option("--checkpoint", o.checkpoint, "checkpoint path (overrides config)");
  cmd->add_option("--out", o.out, "output directory (overrides config)");
  if (with_k) cmd->add_option("--k", o.k, "facts retrieved per hypothesis");
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("--mode", o.mode, "supervision: answer or answer+explanation")
      ->check(CLI::IsMember({"answer", "answer+explanation"}));
}

ce::RunConfig resolve_config(const Overrides& o) {
  ce::RunConfig c = ce::load_run_config(o.config);
  if (!o.checkpoint.empty()) c.paths.checkpoint = o.checkpoint;
  if (!o.out.empty()) c.paths.out = o.out;
  if (o.k) c.model.k = *o.k;
  if (o.seed) c.model.seed = *o.seed;
  if (o.mode) c.model.mode = ce::parse_supervision_mode(*o.mode);
  c.validate();
  return c;
}

void print_report(const ce::MetricsReport& r) {
  auto opt = [](const std::optional<double>& v) {
    return v ? ce::format_double(*v) : std::string("undefined");
  };
  std::cout << "questions " << r.questions << "\naccuracy " << ce::format_double(r.accuracy)
            << "\nP@1 " << ce::format_double(r.precision_at_1) << "\nP@2 "
            << ce::format_double(r.precision_at_2) << "\nfaithfulness "
            << ce::format_double(r.faithfulness) << "\nconsistency@1 " << opt(r.consistency_at_1)
            << "\nconsistency@2 " << opt(r.consistency_at_2) << "\nconsistency@3 "
            << opt(r.consistency_at_3) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Explainable multiple-choice QA over fact graphs selected by an exact ILP solver"};
  app.require_subcommand(1);

  Overrides train_o, eval_o, sweep_o, explain_o;
  auto* train = app.add_subcommand("train", "train θ and the embedding adapter");
  add_common(train, train_o);
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint; writes report and predictions");
  add_common(eval, eval_o);
  auto* sweep = app.add_subcommand("sweep-k", "accuracy for each number of retrieved facts");
  add_common(sweep, sweep_o, false);
  std::vector<std::size_t> sweep_ks;
  sweep->add_option("--k", sweep_ks, "k values (default: config sweep_k)")->delimiter(',');
  auto* explain = app.add_subcommand("explain", "print scores and explanation for one question");
  add_common(explain, explain_o);
  std::string question_id;
  explain->add_option("question", question_id, "question id")->required();
  auto* metrics = app.add_subcommand("metrics", "recompute metrics from a predictions file");
  std::string predictions_path;
  metrics->add_option("predictions", predictions_path, "predictions JSONL")->required();
  auto* synth = app.add_subcommand("synth", "write a planted synthetic corpus and config");
  ce::SynthOptions synth_o;
  std::string synth_out;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--seed", synth_o.seed, "generator seed");
  synth->add_option("--questions", synth_o.questions, "number of questions");
  synth->add_option("--train", synth_o.train, "questions in the training split");
  synth->add_option("--dim", synth_o.dimension, "embedding dimension");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidation;
  }

  try {
    if (train->parsed()) {
      const auto c = resolve_config(train_o);
      const auto r = ce::cmd_train(c, std::cerr);
      std::cout << "checkpoint " << r.checkpoint.string() << "\ntrace " << r.trace_csv.string()
                << '\n';
    } else if (eval->parsed()) {
      const auto r = ce::cmd_eval(resolve_config(eval_o));
      print_report(r.report);
    } else if (sweep->parsed()) {
      const auto c = resolve_config(sweep_o);
      const auto points = ce::cmd_sweep_k(c, sweep_ks.empty() ? c.sweep_k : sweep_ks);
      for (const auto& p : points) {
        std::cout << "k=" << p.k << " accuracy " << ce::format_double(p.accuracy) << '\n';
      }
    } else if (explain->parsed()) {
      ce::cmd_explain(resolve_config(explain_o), question_id, std::cout);
    } else if (metrics->parsed()) {
      std::cout << ce::cmd_metrics(predictions_path);
    } else if (synth->parsed()) {
      ce::cmd_synth(synth_o, synth_out);
      std::cout << "wrote " << synth_out << '\n';
    }
  } catch (const ce::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kIo;
  } catch (const ce::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  }
  return kOk;
}
