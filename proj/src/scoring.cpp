#include "smudge/scoring.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

#include "smudge/error.hpp"

namespace smudge {

namespace {

bool in_unit_interval(double v) { return v >= 0.0 && v <= 1.0; }

template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      fn(i);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(failure_mu);
            if (!failure) {
              failure = std::current_exception();
            }
            next.store(n);
          }
        }
      });
    }
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
}

}  // namespace

void ScoreConfig::validate() const {
  if (!in_unit_interval(alpha)) {
    throw ValidationError("alpha must lie in [0, 1]");
  }
  similarity.validate();
  grounding.validate();
}

double composite(double m, double g, double alpha) {
  if (!in_unit_interval(m) || !in_unit_interval(g) || !in_unit_interval(alpha)) {
    throw ValidationError("composite expects m, g and alpha in [0, 1]");
  }
  return std::clamp(alpha * m + (1.0 - alpha) * g, 0.0, 1.0);
}

double ScoredSample::composite_at(double alpha) const {
  double best = 0.0;
  for (const auto& v : variants) {
    best = std::max(best, composite(v.m, v.g, alpha));
  }
  return best;
}

ScoredSample score_sample(const QASample& sample, const Prediction* pred,
                          const DocumentIndex& index, const ScoreConfig& config) {
  if (index.layout().doc_id != sample.doc_id) {
    throw ValidationError("sample " + sample.qid + " refers to document " + sample.doc_id +
                          " but was given " + index.layout().doc_id);
  }
  if (sample.answers.empty()) {
    throw ValidationError("sample " + sample.qid + " has no answers");
  }
  ScoredSample out;
  out.qid = sample.qid;
  out.doc_id = sample.doc_id;
  out.question_type = sample.question_type;
  out.answer_type = classify_answer_type(sample.answers.front());
  out.chosen_answer = sample.answers.front();

  if (pred == nullptr) {
    out.missing = true;
    out.variants.assign(sample.answers.size(), VariantScore{});
    return out;
  }
  out.prediction = pred->answer;

  std::optional<int> gt_page;
  if (sample.answer_page && index.find_page(*sample.answer_page) != nullptr) {
    gt_page = sample.answer_page;
  }
  const auto& gcfg = config.grounding;
  const auto pred_span = locate(pred->answer, index, gcfg, false);

  bool have_best = false;
  for (std::size_t i = 0; i < sample.answers.size(); ++i) {
    const auto& answer = sample.answers[i];
    const auto match = match_score(pred->answer, answer, config.similarity);
    auto grounding = ground_spans(locate(answer, index, gcfg, true, gt_page), pred_span,
                                  index.layout(), gcfg);
    const double s = composite(match.value, grounding.score, config.alpha);
    out.variants.push_back({match.value, grounding.score, grounding.distance});
    out.anls = std::max(out.anls, anls_flattened(pred->answer, answer,
                                                 config.similarity.anls_threshold,
                                                 config.similarity.text));
    if (!have_best || s > out.s) {
      have_best = true;
      out.variant = i;
      out.chosen_answer = answer;
      out.m = match.value;
      out.g = grounding.score;
      out.d = grounding.distance;
      out.s = s;
      out.num_score = match.num_score;
      out.str_score = match.str_score;
      out.empty_prediction = match.empty_prediction;
      out.hallucinated = grounding.hallucinated;
      out.gt_span = std::move(grounding.gt_span);
      out.pred_span = std::move(grounding.pred_span);
    }
  }
  return out;
}

ScoredSample score_sample(const QASample& sample, const Prediction* pred,
                          const DocumentLayout& doc, const ScoreConfig& config) {
  const DocumentIndex index(doc, config.grounding);
  return score_sample(sample, pred, index, config);
}

Aggregates aggregate(const std::vector<const ScoredSample*>& samples) {
  Aggregates agg;
  agg.count = samples.size();
  if (samples.empty()) {
    return agg;
  }
  for (const auto* s : samples) {
    agg.missing += s->missing ? 1 : 0;
    agg.hallucinated += s->hallucinated ? 1 : 0;
    agg.empty_predictions += s->empty_prediction ? 1 : 0;
    agg.s += s->s;
    agg.m += s->m;
    agg.g += s->g;
    agg.d += s->d;
    agg.anls += s->anls;
  }
  const auto n = static_cast<double>(samples.size());
  agg.s /= n;
  agg.m /= n;
  agg.g /= n;
  agg.d /= n;
  agg.anls /= n;
  return agg;
}

unsigned resolve_thread_count(std::optional<unsigned> requested) {
  if (requested && *requested > 0) {
    return *requested;
  }
  if (const char* env = std::getenv("SMUDGE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) {
      return static_cast<unsigned>(std::min(v, 1024L));
    }
  }
  return 1;
}

DatasetReport score_dataset(const DatasetBundle& bundle, const PredictionRun& run,
                            const ScoreConfig& config, unsigned threads) {
  config.validate();
  std::vector<const QASample*> order;
  order.reserve(bundle.samples.size());
  std::size_t joined = 0;
  for (const auto& s : bundle.samples) {
    order.push_back(&s);
    joined += run.predictions.contains(s.qid) ? 1 : 0;
  }
  if (joined == 0) {
    throw ValidationError("no ground-truth qid has a prediction in run \"" + run.model + "\"");
  }
  std::sort(order.begin(), order.end(),
            [](const QASample* a, const QASample* b) { return a->qid < b->qid; });

  std::map<std::string, DocumentIndex> indexes;
  for (const auto* s : order) {
    if (indexes.contains(s->doc_id)) {
      continue;
    }
    const DocumentLayout* doc = bundle.find_document(s->doc_id);
    if (doc == nullptr) {
      throw ValidationError("unresolvable document " + s->doc_id + " for qid " + s->qid);
    }
    indexes.emplace(s->doc_id, DocumentIndex(*doc, config.grounding));
  }

  DatasetReport report;
  report.dataset = bundle.name;
  report.model = run.model;
  report.config = config;
  report.samples.resize(order.size());
  parallel_for(order.size(), threads, [&](std::size_t i) {
    const QASample& sample = *order[i];
    auto it = run.predictions.find(sample.qid);
    const Prediction* pred = it == run.predictions.end() ? nullptr : &it->second;
    report.samples[i] = score_sample(sample, pred, indexes.at(sample.doc_id), config);
  });

  std::vector<const ScoredSample*> all;
  std::map<std::string, std::vector<const ScoredSample*>> by_type;
  std::map<std::string, std::vector<const ScoredSample*>> by_question;
  for (const auto& s : report.samples) {
    all.push_back(&s);
    by_type[std::string(to_string(s.answer_type))].push_back(&s);
    if (s.question_type) {
      by_question[*s.question_type].push_back(&s);
    }
  }
  report.overall = aggregate(all);
  for (const auto& [k, v] : by_type) {
    report.by_answer_type.emplace(k, aggregate(v));
  }
  for (const auto& [k, v] : by_question) {
    report.by_question_type.emplace(k, aggregate(v));
  }
  std::set<std::string_view> gt_qids;
  for (const auto* s : order) {
    gt_qids.insert(s->qid);
  }
  for (const auto& [qid, pred] : run.predictions) {
    if (!gt_qids.contains(qid)) {
      report.unmatched_predictions.push_back(qid);
    }
  }
  return report;
}

std::vector<double> default_alpha_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 20; ++i) {
    grid.push_back(i / 20.0);
  }
  return grid;
}

std::vector<SweepPoint> alpha_sweep(const DatasetReport& report, const std::vector<double>& grid) {
  if (grid.empty()) {
    throw ValidationError("alpha grid is empty");
  }
  for (double a : grid) {
    if (!in_unit_interval(a)) {
      throw ValidationError("alpha grid values must lie in [0, 1]");
    }
  }
  std::vector<SweepPoint> out;
  out.reserve(grid.size());
  for (double a : grid) {
    double total = 0.0;
    for (const auto& s : report.samples) {
      total += s.composite_at(a);
    }
    out.push_back({a, report.samples.empty() ? 0.0 : total / static_cast<double>(report.samples.size())});
  }
  return out;
}

std::vector<SweepPoint> alpha_sweep(const DatasetBundle& bundle, const PredictionRun& run,
                                    const ScoreConfig& config, const std::vector<double>& grid,
                                    unsigned threads) {
  if (grid.empty()) {
    throw ValidationError("alpha grid is empty");
  }
  return alpha_sweep(score_dataset(bundle, run, config, threads), grid);
}

}  // namespace smudge
