#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "smudge/scoring.hpp"

namespace smudge {

struct RankedEntry {
  std::string model;
  double score = 0.0;
  // 1-based; tied scores share the mean of the ranks they span.
  double rank = 0.0;
};

struct Ranking {
  // Ordered best first (higher score), then by model name.
  std::vector<RankedEntry> entries;

  [[nodiscard]] std::optional<double> rank_of(std::string_view model) const;
};

/// Higher score ranks first. Throws on non-finite scores or duplicate names.
[[nodiscard]] Ranking rank_scores(std::vector<std::pair<std::string, double>> scores);

struct TauResult {
  double tau = 0.0;
  double p_value = 1.0;
};

/// Kendall tau-b of paired observations with a two-sided p-value: exact
/// permutation distribution for n <= 10, tie-corrected normal approximation
/// above. Throws ValidationError for n < 2 or when either side is all ties.
[[nodiscard]] TauResult kendall_tau(std::span<const double> x, std::span<const double> y);

/// Aligns the two rankings by model name first. Mismatched model sets raise a
/// ValidationError naming the models present on only one side.
[[nodiscard]] TauResult kendall_tau(const Ranking& a, const Ranking& b);

/// Throws ValidationError("degenerate series") when either side is constant.
[[nodiscard]] double pearson_r(std::span<const double> xs, std::span<const double> ys);

/// Population standard deviation scaled by sqrt(T).
[[nodiscard]] double volatility(std::span<const double> series);

[[nodiscard]] double median(std::span<const double> series);

/// 1 / ((1 + volatility) * median rank). A model ranked first everywhere
/// scores 1; higher is better.
[[nodiscard]] double robustness_score(std::span<const double> ranks);

struct RobustnessRecord {
  std::string model;
  std::vector<double> ranks;
  double volatility = 0.0;
  double median_rank = 0.0;
  double robustness = 0.0;
};

/// Model x subset rank matrix.
struct RankTable {
  std::vector<std::string> subsets;
  std::vector<std::pair<std::string, std::vector<double>>> rows;
};

/// CSV with header `model,<subset>...`. Throws ValidationError when empty or
/// ragged.
[[nodiscard]] RankTable parse_rank_table(std::string_view csv);
[[nodiscard]] std::string rank_table_csv(const RankTable& table);

/// Sorted by robustness descending, then model name.
[[nodiscard]] std::vector<RobustnessRecord> robustness_table(const RankTable& table);
[[nodiscard]] std::string robustness_csv(const std::vector<RobustnessRecord>& records);

enum class Metric { Anls, Composite, Match, Grounding };

[[nodiscard]] std::string_view to_string(Metric metric);
[[nodiscard]] std::optional<Metric> parse_metric(std::string_view name);

struct RerankOptions {
  Metric baseline = Metric::Anls;
  Metric target = Metric::Composite;
  bool by_answer_type = true;
  bool by_question_type = true;
  // Tau of the composite ranking against the overall baseline ranking, per
  // subset, at each alpha. Empty skips the table.
  std::vector<double> alpha_grid;
};

struct SubsetRanking {
  // "all", "answer_type:<t>" or "question_type:<t>".
  std::string subset;
  std::size_t samples = 0;
  Ranking baseline;
  Ranking target;
  // Target vs baseline inside the subset.
  std::optional<TauResult> tau_within;
  // Target inside the subset vs the overall baseline ranking.
  std::optional<TauResult> tau_vs_overall;
};

struct Movement {
  std::string model;
  std::string subset;
  double baseline_rank = 0.0;
  double target_rank = 0.0;
  // Positive when the model moved up the board.
  double delta = 0.0;
};

struct TauAlphaPoint {
  double alpha = 0.0;
  std::string subset;
  std::optional<TauResult> tau;
};

struct RerankReport {
  Metric baseline = Metric::Anls;
  Metric target = Metric::Composite;
  std::vector<std::string> models;
  std::vector<SubsetRanking> subsets;
  std::vector<Movement> movements;
  std::vector<TauAlphaPoint> tau_by_alpha;
  std::vector<std::string> warnings;

  /// Target-metric ranks, one column per subset.
  [[nodiscard]] RankTable rank_table(bool use_target = true) const;
};

/// Rankings of the runs under both metrics, overall and per subset, with
/// Kendall tau and per-model movements against the overall baseline ranking.
/// Requires >= 2 runs with distinct names over the same qid set.
[[nodiscard]] RerankReport rerank_report(
    const std::vector<std::pair<std::string, DatasetReport>>& runs, const RerankOptions& options);

[[nodiscard]] std::string rerank_document(const RerankReport& report);
[[nodiscard]] std::string rankings_csv(const RerankReport& report);
[[nodiscard]] std::string movements_csv(const RerankReport& report);
[[nodiscard]] std::string tau_csv(const RerankReport& report);
[[nodiscard]] std::string tau_alpha_csv(const RerankReport& report);

}  // namespace smudge
