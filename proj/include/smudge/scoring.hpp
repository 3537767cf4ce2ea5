#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "smudge/document.hpp"
#include "smudge/grounding.hpp"
#include "smudge/ingest.hpp"
#include "smudge/similarity.hpp"

namespace smudge {

struct ScoreConfig {
  double alpha = 0.25;
  SimilarityConfig similarity;
  GroundingConfig grounding;

  void validate() const;
};

/// alpha * m + (1 - alpha) * g. Throws ValidationError outside [0, 1].
[[nodiscard]] double composite(double m, double g, double alpha);

/// Match and grounding sub-scores against one ground-truth variant.
struct VariantScore {
  double m = 0.0;
  double g = 0.0;
  double d = 1.0;
};

struct ScoredSample {
  std::string qid;
  std::string doc_id;
  std::string prediction;
  std::size_t variant = 0;
  std::string chosen_answer;
  double m = 0.0;
  double g = 0.0;
  double d = 1.0;
  double s = 0.0;
  double anls = 0.0;
  // Type of the sample's first answer variant, so subsets agree across runs.
  AnswerType answer_type = AnswerType::Textual;
  std::optional<std::string> question_type;
  std::optional<double> num_score;
  std::optional<double> str_score;
  bool hallucinated = false;
  bool missing = false;
  bool empty_prediction = false;
  std::optional<LocatedSpan> gt_span;
  std::optional<LocatedSpan> pred_span;
  // Per-variant sub-scores, kept so alpha can be swept without rescoring.
  std::vector<VariantScore> variants;

  /// Best composite over variants at a different alpha.
  [[nodiscard]] double composite_at(double alpha) const;
};

/// Scores one sample. A null prediction is scored as missing. The composite
/// is maximized jointly over the answer variants (m and g from the same one);
/// the first variant wins ties.
[[nodiscard]] ScoredSample score_sample(const QASample& sample, const Prediction* pred,
                                        const DocumentIndex& index, const ScoreConfig& config);

[[nodiscard]] ScoredSample score_sample(const QASample& sample, const Prediction* pred,
                                        const DocumentLayout& doc, const ScoreConfig& config);

struct Aggregates {
  std::size_t count = 0;
  std::size_t missing = 0;
  std::size_t hallucinated = 0;
  std::size_t empty_predictions = 0;
  double s = 0.0;
  double m = 0.0;
  double g = 0.0;
  double d = 0.0;
  double anls = 0.0;
};

[[nodiscard]] Aggregates aggregate(const std::vector<const ScoredSample*>& samples);

struct DatasetReport {
  std::string dataset;
  std::string model;
  ScoreConfig config;
  // Sorted by qid.
  std::vector<ScoredSample> samples;
  Aggregates overall;
  std::map<std::string, Aggregates> by_answer_type;
  std::map<std::string, Aggregates> by_question_type;
  // Prediction qids with no ground truth.
  std::vector<std::string> unmatched_predictions;
};

/// Number of scoring threads: `requested` if set, else SMUDGE_THREADS, else 1.
[[nodiscard]] unsigned resolve_thread_count(std::optional<unsigned> requested = std::nullopt);

/// Scores every ground-truth sample; samples without a prediction count as
/// missing (all zeros). Output is independent of the thread count.
/// Throws ValidationError when no ground-truth qid has a prediction.
[[nodiscard]] DatasetReport score_dataset(const DatasetBundle& bundle, const PredictionRun& run,
                                          const ScoreConfig& config, unsigned threads = 1);

struct SweepPoint {
  double alpha = 0.0;
  double s = 0.0;
};

/// 0.00, 0.05, ..., 1.00.
[[nodiscard]] std::vector<double> default_alpha_grid();

[[nodiscard]] std::vector<SweepPoint> alpha_sweep(const DatasetReport& report,
                                                  const std::vector<double>& grid);

[[nodiscard]] std::vector<SweepPoint> alpha_sweep(const DatasetBundle& bundle,
                                                  const PredictionRun& run,
                                                  const ScoreConfig& config,
                                                  const std::vector<double>& grid,
                                                  unsigned threads = 1);

}  // namespace smudge
