#include "combexplain/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_set>

#include "combexplain/scoring.hpp"

namespace combexplain {

std::string_view to_string(SupervisionMode mode) {
  return mode == SupervisionMode::kAnswer ? "answer" : "answer+explanation";
}

SupervisionMode parse_supervision_mode(std::string_view text) {
  if (text == "answer") return SupervisionMode::kAnswer;
  if (text == "answer+explanation") return SupervisionMode::kAnswerAndExplanation;
  throw ValidationError("unknown supervision mode '" + std::string(text) +
                        "' (expected answer or answer+explanation)");
}

void ModelConfig::validate() const {
  auto fail = [](const std::string& what) { throw ValidationError("config: " + what); };
  if (k < 1) fail("k must be >= 1");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) fail("lambda must be > 0");
  if (!(loss.temperature > 0.0)) fail("temperature must be > 0");
  if (loss.answer < 0.0 || loss.answer > 1.0) fail("lambda_ans must be in [0, 1]");
  if (loss.explanation < 0.0 || loss.explanation > 1.0) fail("lambda_exp must be in [0, 1]");
  if (!(lr >= 0.0) || !(adapter_lr >= 0.0)) fail("learning rates must be >= 0");
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (theta_init < 0.0 || theta_init > 1.0) fail("theta_init must be in [0, 1]");
}

TrainableParams TrainableParams::initial(const ModelConfig& config, std::size_t embedding_dim) {
  TrainableParams p;
  p.theta = ThetaParams::uniform(config.theta_init);
  if (config.use_adapter) p.adapter.assign(embedding_dim, 1.0);
  return p;
}

PreparedQuestion prepare_question(const Question& q, const FactBank& bank,
                                  const EmbeddingStore& store, const TermExtractor& extractor,
                                  std::size_t k) {
  PreparedQuestion pq;
  pq.question = &q;
  pq.gold = q.answer_index();
  const std::unordered_set<std::string> gold(q.explanation_ids.begin(), q.explanation_ids.end());
  for (auto& h : build_hypotheses(q, extractor)) {
    CandidateGraph cg;
    cg.facts = retrieve_topk(h, bank, store, k);
    cg.features = compute_features(h, cg.facts, store);
    std::vector<std::uint8_t> indicator;
    indicator.reserve(cg.facts.size());
    for (const Fact* f : cg.facts) indicator.push_back(gold.contains(f->id) ? 1 : 0);
    pq.gold_indicators.push_back(std::move(indicator));
    cg.hypothesis = std::move(h);
    pq.candidates.push_back(std::move(cg));
  }
  return pq;
}

namespace {

GraphFeatures features_with_adapter(const CandidateGraph& cg, const EmbeddingStore& store,
                                    std::span<const double> adapter) {
  GraphFeatures f = cg.features;
  if (adapter.empty()) return f;
  const auto hv = store.at(f.ids[0]);
  for (std::size_t j = 1; j < f.size(); ++j) {
    f.semantic[j] = scaled_semantic_relevance(hv, store.at(f.ids[j]), adapter);
  }
  return f;
}

// Node selection of the facts (nodes 1..n-1) in a full assignment.
std::vector<std::uint8_t> fact_selection(std::span<const std::uint8_t> assignment,
                                         std::size_t num_nodes) {
  return {assignment.begin() + 1, assignment.begin() + static_cast<std::ptrdiff_t>(num_nodes)};
}

}  // namespace

std::size_t argmax_with_label_tiebreak(std::span<const double> values,
                                       std::span<const Candidate> candidates) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best] ||
        (values[i] == values[best] && candidates[i].label < candidates[best].label)) {
      best = i;
    }
  }
  return best;
}

QuestionForward forward(const PreparedQuestion& pq, const EmbeddingStore& store,
                        const TrainableParams& params, const ModelConfig& config,
                        const SolverFn& solver) {
  QuestionForward fw;
  fw.candidates.reserve(pq.candidates.size());
  for (const auto& cg : pq.candidates) {
    GraphFeatures features = features_with_adapter(cg, store, params.adapter);
    WeightMatrix weights = assemble_weights(features, params.theta);
    DbcsForward dbcs = dbcs_forward(weights, config.max_abstract, solver);
    const double score = -dbcs.solution.objective;
    fw.scores.push_back(score);
    fw.candidates.push_back({std::move(features), std::move(weights), std::move(dbcs), score});
  }
  fw.probabilities = answer_probabilities(fw.scores, config.loss.temperature);
  fw.predicted = argmax_with_label_tiebreak(fw.probabilities, pq.question->candidates);
  return fw;
}

std::vector<std::pair<std::string, double>> ranked_explanation(const CandidateForward& cf) {
  const auto& y = cf.dbcs.solution.assignment;
  const std::size_t n = cf.weights.size();
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t j = 1; j < n; ++j) {
    if (!y[j]) continue;
    double total = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      if (v != j && y[v]) total += cf.weights(j, v);
    }
    out.emplace_back(cf.weights.ids[j], total);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  return out;
}

PredictionRecord make_record(const PreparedQuestion& pq, const QuestionForward& fw) {
  const Question& q = *pq.question;
  PredictionRecord r;
  r.qid = q.id;
  r.predicted = q.candidates[fw.predicted].label;
  r.gold = q.answer;
  for (std::size_t i = 0; i < q.candidates.size(); ++i) r.scores[q.candidates[i].label] = fw.scores[i];
  for (auto& [id, weight] : ranked_explanation(fw.candidates[fw.predicted])) {
    r.explanation_ids.push_back(std::move(id));
  }
  r.gold_explanation_ids = q.explanation_ids;
  return r;
}

PredictionRecord predict(const Question& q, const FactBank& bank, const EmbeddingStore& store,
                         const TermExtractor& extractor, const TrainableParams& params,
                         const ModelConfig& config) {
  const PreparedQuestion pq = prepare_question(q, bank, store, extractor, config.k);
  return make_record(pq, forward(pq, store, params, config));
}

QuestionLoss backward(const PreparedQuestion& pq, const EmbeddingStore& store,
                      const TrainableParams& params, const ModelConfig& config,
                      const QuestionForward& fw, Gradient& grad, BackwardOptions options,
                      const SolverFn& solver) {
  const Question& q = *pq.question;
  const std::size_t gold = pq.gold;
  QuestionLoss loss;
  loss.explanations_available =
      config.mode == SupervisionMode::kAnswerAndExplanation && !q.explanation_ids.empty();
  loss.answer = answer_loss(fw.probabilities, gold);

  const auto& gold_cf = fw.candidates[gold];
  const auto gold_selection =
      fact_selection(gold_cf.dbcs.solution.assignment, gold_cf.weights.size());
  if (!q.explanation_ids.empty()) {
    loss.explanation = explanation_loss(gold_selection, pq.gold_indicators[gold]);
  }
  loss.total = total_loss(loss.answer, loss.explanation, config.loss, loss.explanations_available);

  if (grad.adapter.size() != params.adapter.size()) grad.adapter.assign(params.adapter.size(), 0.0);
  const double answer_weight = loss.explanations_available ? config.loss.answer : 1.0;
  const LambdaParam lambda(config.lambda);

  for (std::size_t i = 0; i < fw.candidates.size(); ++i) {
    const auto& cf = fw.candidates[i];
    const IlpInstance& inst = *cf.dbcs.context.instance;
    const auto& y = cf.dbcs.solution.assignment;
    const std::size_t n = inst.num_nodes;
    // dL/dscore_i, with score_i = W_i·ŷ_i and γ_i = T·score_i.
    const double dscore = answer_weight * (fw.probabilities[i] - (i == gold ? 1.0 : 0.0)) *
                          config.loss.temperature;

    Matrix w_grad(n, n);
    for (std::size_t e = n; e < inst.num_vars(); ++e) {
      if (y[e]) w_grad(inst.vars[e].first, inst.vars[e].second) += dscore;
    }
    if (options.through_solver) {
      std::vector<double> dl_dy(inst.num_vars(), 0.0);
      for (std::size_t e = n; e < inst.num_vars(); ++e) {
        dl_dy[e] = dscore * cf.dbcs.context.weight(e);
      }
      if (loss.explanations_available && i == gold) {
        const auto g = explanation_loss_gradient(gold_selection, pq.gold_indicators[gold]);
        for (std::size_t j = 1; j < n; ++j) dl_dy[j] += config.loss.explanation * g[j - 1];
      }
      const auto dw = dbcs_backward(cf.dbcs.context, dl_dy, lambda, solver);
      // Node variables have no weight (zero diagonal); only edges carry gradient.
      for (std::size_t e = n; e < inst.num_vars(); ++e) {
        w_grad(inst.vars[e].first, inst.vars[e].second) += dw[e];
      }
    }

    const ThetaParams tg = theta_gradient(w_grad, cf.features);
    auto acc = grad.theta.to_array();
    const auto add = tg.to_array();
    for (std::size_t c = 0; c < acc.size(); ++c) acc[c] += add[c];
    grad.theta = ThetaParams::from_array(acc);

    if (!params.adapter.empty()) {
      const auto sg = semantic_gradient(w_grad, cf.features, params.theta);
      const auto hv = store.at(cf.features.ids[0]);
      for (std::size_t j = 1; j < n; ++j) {
        if (sg[j] == 0.0) continue;
        accumulate_scaled_cosine_gradient(hv, store.at(cf.features.ids[j]), params.adapter, sg[j],
                                          grad.adapter);
      }
    }
  }
  return loss;
}

double frozen_solution_loss(const PreparedQuestion& pq, const EmbeddingStore& store,
                            const TrainableParams& params, const ModelConfig& config,
                            std::span<const std::vector<std::uint8_t>> solutions) {
  const Question& q = *pq.question;
  std::vector<double> scores;
  for (std::size_t i = 0; i < pq.candidates.size(); ++i) {
    const auto features = features_with_adapter(pq.candidates[i], store, params.adapter);
    const auto w = assemble_weights(features, params.theta);
    const auto& y = solutions[i];
    double score = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
      for (std::size_t k = j + 1; k < w.size(); ++k) {
        if (y[j] && y[k]) score += w(j, k);
      }
    }
    scores.push_back(score);
  }
  const auto probs = answer_probabilities(scores, config.loss.temperature);
  const bool available =
      config.mode == SupervisionMode::kAnswerAndExplanation && !q.explanation_ids.empty();
  double exp_loss = 0.0;
  if (!q.explanation_ids.empty()) {
    const auto& y = solutions[pq.gold];
    exp_loss = explanation_loss(fact_selection(y, pq.candidates[pq.gold].features.size()),
                                pq.gold_indicators[pq.gold]);
  }
  return total_loss(answer_loss(probs, pq.gold), exp_loss, config.loss, available);
}

TrainingState initial_training_state(const ModelConfig& config, std::size_t embedding_dim) {
  TrainingState s;
  s.params = TrainableParams::initial(config, embedding_dim);
  s.optimizer.theta = AdamW(ThetaParams::kCount, config.adam);
  s.optimizer.adapter = AdamW(s.params.adapter.size(), config.adam);
  return s;
}

namespace {

bool all_finite(const Gradient& g) {
  for (double x : g.theta.to_array()) {
    if (!std::isfinite(x)) return false;
  }
  return std::all_of(g.adapter.begin(), g.adapter.end(), [](double x) { return std::isfinite(x); });
}

std::string describe(const Gradient& g, std::span<const std::string> qids, std::size_t epoch) {
  std::ostringstream os;
  os << "non-finite gradient in epoch " << epoch << " (questions:";
  for (const auto& id : qids) os << ' ' << id;
  os << ") theta-grad:";
  const auto names = ThetaParams::names();
  const auto values = g.theta.to_array();
  for (std::size_t c = 0; c < values.size(); ++c) os << ' ' << names[c] << '=' << values[c];
  return os.str();
}

}  // namespace

std::vector<EpochStats> train(std::span<const Question> corpus, const FactBank& bank,
                              const EmbeddingStore& store, const TermExtractor& extractor,
                              const ModelConfig& config, TrainingState& state,
                              const EpochCallback& on_epoch) {
  config.validate();
  if (corpus.empty()) throw ValidationError("train: empty training corpus");
  if (!state.params.adapter.empty() && state.params.adapter.size() != store.dimension()) {
    throw ValidationError("train: adapter dimension does not match embeddings");
  }
  std::vector<PreparedQuestion> prepared;
  prepared.reserve(corpus.size());
  for (const auto& q : corpus) prepared.push_back(prepare_question(q, bank, store, extractor, config.k));

  std::vector<EpochStats> trace;
  for (std::size_t epoch = state.epoch; epoch < config.epochs; ++epoch) {
    std::vector<std::size_t> order(prepared.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(config.seed + epoch);
    std::shuffle(order.begin(), order.end(), rng);

    EpochStats stats;
    stats.epoch = epoch + 1;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      Gradient grad;
      grad.adapter.assign(state.params.adapter.size(), 0.0);
      std::vector<std::string> qids;
      for (std::size_t b = start; b < end; ++b) {
        const auto& pq = prepared[order[b]];
        qids.push_back(pq.question->id);
        const auto fw = forward(pq, store, state.params, config);
        const auto loss = backward(pq, store, state.params, config, fw, grad);
        stats.answer_loss += loss.answer;
        stats.explanation_loss += loss.explanation;
        stats.total_loss += loss.total;
      }
      const double inv = 1.0 / static_cast<double>(end - start);
      auto theta_grad = grad.theta.to_array();
      for (double& x : theta_grad) x *= inv;
      for (double& x : grad.adapter) x *= inv;
      grad.theta = ThetaParams::from_array(theta_grad);
      if (!all_finite(grad)) throw TrainingError(describe(grad, qids, epoch + 1));

      const std::span<double> groups[] = {theta_grad, grad.adapter};
      clip_gradient_norm(groups, config.max_grad_norm);

      auto theta = state.params.theta.to_array();
      state.optimizer.theta.step(theta, theta_grad, config.lr);
      state.params.theta = ThetaParams::from_array(theta).clamped();
      if (!state.params.adapter.empty()) {
        state.optimizer.adapter.step(state.params.adapter, grad.adapter, config.adapter_lr);
        for (double& a : state.params.adapter) a = std::max(a, kMinAdapterScale);
      }
    }
    const double count = static_cast<double>(prepared.size());
    stats.answer_loss /= count;
    stats.explanation_loss /= count;
    stats.total_loss /= count;
    state.epoch = epoch + 1;
    trace.push_back(stats);
    if (on_epoch) on_epoch(stats, state);
  }
  return trace;
}

std::vector<PredictionRecord> evaluate(std::span<const Question> questions,
                                       const FactBank& bank, const EmbeddingStore& store,
                                       const TermExtractor& extractor,
                                       const TrainableParams& params, const ModelConfig& config) {
  std::vector<PredictionRecord> records;
  records.reserve(questions.size());
  for (const auto& q : questions) records.push_back(predict(q, bank, store, extractor, params, config));
  return records;
}

}  // namespace combexplain
