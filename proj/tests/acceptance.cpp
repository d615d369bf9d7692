// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "combexplain/commands.hpp"
#include "combexplain/dbcs.hpp"
#include "combexplain/model.hpp"
#include "support.hpp"

using namespace combexplain;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* format, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

Outcome ilp_oracle_equivalence() {
  std::mt19937_64 rng(1001);
  std::uniform_int_distribution<std::size_t> nodes(1, 12), cap(0, 3);
  std::size_t mismatches = 0;
  const auto t0 = Clock::now();
  for (int i = 0; i < 1000; ++i) {
    const auto w = testing::random_weights(rng, nodes(rng), i % 2 == 1);
    const auto inst = build_subgraph_ilp(w, cap(rng));
    const auto exact = solve_exact(inst);
    const auto brute = solve_bruteforce(inst);
    if (exact.assignment != brute.assignment || exact.objective != brute.objective) ++mismatches;
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 60.0,
          fmt("1000 instances, %zu mismatches, %.2f s", mismatches, secs)};
}

Outcome dbcs_identity() {
  std::mt19937_64 rng(2002);
  std::uniform_int_distribution<std::size_t> nodes(1, 10), cap(0, 3);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> lam(0.1, 500.0);
  std::size_t identity_fail = 0, value_fail = 0, zero_fail = 0;
  for (int i = 0; i < 200; ++i) {
    const auto w = testing::random_weights(rng, nodes(rng), i % 2 == 1);
    const auto fw = dbcs_forward(w, cap(rng));
    std::vector<double> dy(fw.context.cost.size());
    const double scale = std::pow(10.0, static_cast<double>(i % 4) - 3.0);
    for (double& x : dy) x = g(rng) * scale;
    const LambdaParam lambda(lam(rng));
    const double l = lambda.value();
    const auto grad = dbcs_backward(fw.context, dy, lambda);

    IlpInstance perturbed = *fw.context.instance;
    for (std::size_t v = 0; v < dy.size(); ++v) perturbed.cost[v] = fw.context.cost[v] - l * dy[v];
    const auto y_l = solve_bruteforce(perturbed).assignment;
    for (std::size_t v = 0; v < grad.size(); ++v) {
      const double want =
          -(static_cast<double>(fw.solution.assignment[v]) - static_cast<double>(y_l[v])) / l;
      if (grad[v] != want) ++identity_fail;
      if (grad[v] != 0.0 && grad[v] != 1.0 / l && grad[v] != -1.0 / l) ++value_fail;
    }
    const std::vector<double> zero(dy.size(), 0.0);
    for (double x : dbcs_backward(fw.context, zero, lambda)) {
      if (x != 0.0) ++zero_fail;
    }
  }
  return {identity_fail == 0 && value_fail == 0 && zero_fail == 0,
          fmt("200 triples, identity mismatches %zu, off-grid entries %zu, nonzero at zero "
              "input %zu",
              identity_fail, value_fail, zero_fail)};
}

// Relative error of two gradient vectors, measured on the vector norm.
double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double denom = std::max(std::sqrt(na), std::sqrt(nb));
  if (denom < 1e-12) return std::sqrt(diff);
  return std::sqrt(diff) / denom;
}

Outcome frozen_gradient_check() {
  SyntheticOptions o;
  o.questions = 50;
  o.dimension = 16;
  o.distractors_per_question = 10;
  o.seed = 31;
  auto d = testing::planted(o);
  std::mt19937_64 rng(3003);
  std::uniform_real_distribution<double> u(0.05, 0.95), a(0.3, 2.0);
  std::uniform_int_distribution<std::size_t> kk(2, 8);
  double worst_theta = 0.0, worst_adapter = 0.0;
  for (std::size_t f = 0; f < 50; ++f) {
    ModelConfig cfg;
    cfg.k = kk(rng);
    cfg.mode = f % 2 == 0 ? SupervisionMode::kAnswerAndExplanation : SupervisionMode::kAnswer;
    TrainableParams p = TrainableParams::initial(cfg, d.store.dimension());
    std::array<double, ThetaParams::kCount> th;
    for (double& x : th) x = u(rng);
    p.theta = ThetaParams::from_array(th);
    for (double& x : p.adapter) x = a(rng);
    const auto pq = prepare_question(d.questions[f], d.bank, d.store, d.extractor, cfg.k);
    const auto fw = forward(pq, d.store, p, cfg);
    std::vector<std::vector<std::uint8_t>> frozen;
    for (const auto& cf : fw.candidates) frozen.push_back(cf.dbcs.solution.assignment);
    Gradient grad;
    backward(pq, d.store, p, cfg, fw, grad, {false});

    const double h = 1e-6;
    auto central = [&](auto&& nudge) {
      auto hi = p, lo = p;
      nudge(hi, h);
      nudge(lo, -h);
      return (frozen_solution_loss(pq, d.store, hi, cfg, frozen) -
              frozen_solution_loss(pq, d.store, lo, cfg, frozen)) /
             (2 * h);
    };
    const auto analytic_theta = grad.theta.to_array();
    std::vector<double> at(analytic_theta.begin(), analytic_theta.end()), ft;
    for (std::size_t c = 0; c < th.size(); ++c) {
      ft.push_back(central([&](TrainableParams& q, double step) {
        auto t = th;
        t[c] += step;
        q.theta = ThetaParams::from_array(t);
      }));
    }
    std::vector<double> fa;
    for (std::size_t i = 0; i < p.adapter.size(); ++i) {
      fa.push_back(central([&](TrainableParams& q, double step) { q.adapter[i] += step; }));
    }
    worst_theta = std::max(worst_theta, relative_error(at, ft));
    worst_adapter = std::max(worst_adapter, relative_error(grad.adapter, fa));
  }
  return {worst_theta <= 1e-4 && worst_adapter <= 1e-4,
          fmt("50 fixtures, worst relative error theta %.2e, adapter %.2e", worst_theta,
              worst_adapter)};
}

// Learning-rate setting for the synthetic runs; every other value stays at its default.
ModelConfig synthetic_config(std::uint64_t seed, SupervisionMode mode) {
  ModelConfig c;
  c.lr = 1e-2;
  c.adapter_lr = 1e-2;
  c.seed = seed;
  c.mode = mode;
  return c;
}

struct SyntheticRun {
  testing::PlantedData data;
  QuestionSplit split;
  ModelConfig config;
  TrainingState state;
  double train_seconds = 0.0;
};

SyntheticRun train_synthetic(std::uint64_t data_seed, std::uint64_t train_seed,
                             SupervisionMode mode) {
  SyntheticOptions o;
  o.seed = data_seed;
  SyntheticRun r{testing::planted(o), {}, synthetic_config(train_seed, mode), {}, 0.0};
  r.split = split_questions(r.data.questions, 100);
  r.state = initial_training_state(r.config, r.data.store.dimension());
  const auto t0 = Clock::now();
  train(r.split.train, r.data.bank, r.data.store, r.data.extractor, r.config, r.state);
  r.train_seconds = seconds_since(t0);
  return r;
}

std::vector<PredictionRecord> evaluate_at(const SyntheticRun& r, std::size_t k) {
  ModelConfig c = r.config;
  c.k = k;
  return evaluate(r.split.test, r.data.bank, r.data.store, r.data.extractor, r.state.params, c);
}

std::size_t correct_count(const std::vector<PredictionRecord>& rs) {
  std::size_t n = 0;
  for (const auto& r : rs) n += r.predicted == r.gold ? 1 : 0;
  return n;
}

Outcome synthetic_learning(const SyntheticRun& run) {
  const auto report = compute_report(evaluate_at(run, run.config.k));
  const bool pass = run.split.train.size() == 100 && run.split.test.size() == 100 &&
                    run.config.epochs <= 20 && run.train_seconds < 600.0 &&
                    report.accuracy >= 0.95 && report.precision_at_2 >= 0.90;
  return {pass, fmt("200 questions, %zu epochs in %.1f s, held-out accuracy %.3f, P@2 %.3f",
                    run.config.epochs, run.train_seconds, report.accuracy,
                    report.precision_at_2)};
}

Outcome supervision_ordering() {
  std::size_t satisfied = 0;
  std::string detail;
  for (std::uint64_t seed : {7, 8, 9}) {
    double p2[2];
    int i = 0;
    for (auto mode : {SupervisionMode::kAnswerAndExplanation, SupervisionMode::kAnswer}) {
      const auto run = train_synthetic(seed, seed, mode);
      p2[i++] = compute_report(evaluate_at(run, run.config.k)).precision_at_2;
    }
    if (p2[0] >= p2[1]) ++satisfied;
    detail += fmt("%sseed %llu: %.3f vs %.3f", detail.empty() ? "" : "; ",
                  static_cast<unsigned long long>(seed), p2[0], p2[1]);
  }
  return {satisfied >= 2, fmt("%zu/3 seeds with P@2(answer+explanation) >= P@2(answer); ",
                              satisfied) + detail};
}

Outcome distractor_stability(const SyntheticRun& run) {
  const auto at3 = evaluate_at(run, 3);
  const auto at50 = evaluate_at(run, 50);
  const std::size_t n = at3.size();
  const auto c3 = correct_count(at3), c50 = correct_count(at50);
  const std::size_t gap = c3 > c50 ? c3 - c50 : c50 - c3;
  // Within 2 absolute points: 100·gap/n <= 2, kept in integers.
  return {100 * gap <= 2 * n, fmt("accuracy k=3 %.3f, k=50 %.3f", static_cast<double>(c3) / n,
                                  static_cast<double>(c50) / n)};
}

Outcome metric_oracles() {
  std::mt19937_64 rng(4004);
  std::size_t mismatches = 0;
  for (int i = 0; i < 200; ++i) {
    const auto rs = testing::random_records(rng);
    if (accuracy(rs) != testing::oracle::accuracy(rs)) ++mismatches;
    for (std::size_t k : {1, 2, 3}) {
      if (precision_at_k(rs, k) != testing::oracle::precision_at_k(rs, k)) ++mismatches;
      if (explanation_consistency_at_k(rs, gold_map_from_records(rs), k) !=
          testing::oracle::consistency_at_k(rs, k)) {
        ++mismatches;
      }
    }
    if (faithfulness(rs) != testing::oracle::faithfulness(rs)) ++mismatches;
  }
  return {mismatches == 0, fmt("200 record sets, %zu mismatches", mismatches)};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  const auto dir = testing::scratch_dir("acceptance_determinism");
  cmd_synth(SynthOptions{}, dir);
  const RunConfig config = load_run_config(dir / "config.json");
  std::vector<std::string> outputs[2];
  for (auto& out : outputs) {
    std::ostringstream log;
    cmd_train(config, log);
    const auto e = cmd_eval(config);
    out = {slurp(config.paths.checkpoint), slurp(e.report_json), slurp(e.predictions_jsonl)};
  }
  const bool same = outputs[0] == outputs[1] && !outputs[0][0].empty() && !outputs[0][1].empty();
  return {same, same ? "checkpoint, report and predictions byte-identical across two runs"
                     : "outputs differ between runs"};
}

}  // namespace

int main() {
  bool all = true;
  auto report = [&](const char* name, const std::function<Outcome()>& check) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all = all && o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  };

  report("ilp_oracle_equivalence", ilp_oracle_equivalence);
  report("dbcs_definitional_identity", dbcs_identity);
  report("frozen_solver_gradient_check", frozen_gradient_check);

  std::optional<SyntheticRun> run;
  report("synthetic_end_to_end_learning", [&] {
    run.emplace(train_synthetic(7, 42, SupervisionMode::kAnswerAndExplanation));
    return synthetic_learning(*run);
  });
  report("supervision_mode_ordering", supervision_ordering);
  report("distractor_stability", [&] {
    return run ? distractor_stability(*run) : Outcome{false, "no trained model"};
  });
  report("metric_oracles", metric_oracles);
  report("determinism", determinism);
  return all ? 0 : 1;
}
